#include "rgtn/network.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace rgtn {
namespace {

struct PairPlan {
    std::vector<std::size_t> modes_a, modes_b;
    std::vector<int> labels;  // result labels: a's free then b's free
    double out_size = 1.0;
};

PairPlan plan_pair(const LabeledTensor& a, const LabeledTensor& b) {
    PairPlan p;
    std::vector<bool> b_used(b.labels.size(), false);
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[i]);
        if (it != b.labels.end()) {
            const auto j = static_cast<std::size_t>(it - b.labels.begin());
            p.modes_a.push_back(i);
            p.modes_b.push_back(j);
            b_used[j] = true;
        } else {
            p.labels.push_back(a.labels[i]);
            p.out_size *= static_cast<double>(a.tensor.dim(i));
        }
    }
    for (std::size_t j = 0; j < b.labels.size(); ++j) {
        if (b_used[j]) continue;
        p.labels.push_back(b.labels[j]);
        p.out_size *= static_cast<double>(b.tensor.dim(j));
    }
    return p;
}

// Drops the dummy size-1 mode that contract() returns for full contractions.
LabeledTensor contract_pair(const LabeledTensor& a, const LabeledTensor& b) {
    PairPlan p = plan_pair(a, b);
    DenseTensor t = contract(a.tensor, p.modes_a, b.tensor, p.modes_b);
    return {std::move(t), std::move(p.labels)};
}

}  // namespace

DenseTensor contract_network(std::vector<LabeledTensor> ops, std::span<const int> output) {
    if (ops.empty()) throw ShapeError("contract_network: no operands");
    std::map<int, std::pair<int, std::size_t>> seen;  // label -> (count, dim)
    for (const auto& op : ops) {
        if (op.labels.size() != op.tensor.order() && !(op.labels.empty() && op.tensor.size() == 1))
            throw ShapeError("contract_network: label count does not match tensor order");
        for (std::size_t i = 0; i < op.labels.size(); ++i) {
            auto& [count, dim] = seen[op.labels[i]];
            if (count > 0 && dim != op.tensor.dim(i))
                throw ShapeError("contract_network: inconsistent size for label " + std::to_string(op.labels[i]));
            ++count;
            dim = op.tensor.dim(i);
        }
    }
    for (const auto& [label, info] : seen) {
        const bool in_out = std::find(output.begin(), output.end(), label) != output.end();
        if (info.first > 2) throw ShapeError("contract_network: label appears more than twice");
        if (info.first == 2 && in_out) throw ShapeError("contract_network: contracted label requested in output");
        if (info.first == 1 && !in_out) throw ShapeError("contract_network: dangling label not in output");
    }
    if (static_cast<std::ptrdiff_t>(output.size()) != std::count_if(seen.begin(), seen.end(), [](const auto& kv) { return kv.second.first == 1; }))
        throw ShapeError("contract_network: output labels do not match free labels");

    // Scalars (empty label lists) are folded in as plain factors.
    double scalar = 1.0;
    std::erase_if(ops, [&](const LabeledTensor& op) {
        if (!op.labels.empty()) return false;
        scalar *= op.tensor[0];
        return true;
    });
    if (ops.empty()) return DenseTensor({1}, {scalar});

    while (ops.size() > 1) {
        std::size_t best_i = 0, best_j = 1;
        double best_cost = std::numeric_limits<double>::infinity();
        bool best_shares = false;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            for (std::size_t j = i + 1; j < ops.size(); ++j) {
                PairPlan p = plan_pair(ops[i], ops[j]);
                const bool shares = !p.modes_a.empty();
                const double cost = p.out_size - static_cast<double>(ops[i].tensor.size()) -
                                    static_cast<double>(ops[j].tensor.size());
                if ((shares && !best_shares) || (shares == best_shares && cost < best_cost)) {
                    best_cost = cost;
                    best_shares = shares;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        LabeledTensor merged = contract_pair(ops[best_i], ops[best_j]);
        if (merged.labels.empty()) {
            scalar *= merged.tensor[0];
            ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(best_j));
            ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(best_i));
            if (ops.empty()) return DenseTensor({1}, {scalar});
            continue;
        }
        ops[best_i] = std::move(merged);
        ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(best_j));
    }

    LabeledTensor& last = ops.front();
    if (output.empty()) return DenseTensor({1}, {scalar * last.tensor[0]});
    std::vector<std::size_t> perm(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) {
        auto it = std::find(last.labels.begin(), last.labels.end(), output[i]);
        perm[i] = static_cast<std::size_t>(it - last.labels.begin());
    }
    DenseTensor out = permute(last.tensor, perm);
    if (scalar != 1.0) out *= scalar;
    return out;
}

}  // namespace rgtn
