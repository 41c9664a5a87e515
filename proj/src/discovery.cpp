#include "rgtn/discovery.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "rgtn/metrics.hpp"

namespace rgtn {

namespace {

// Node id -> key made from its physical modes.
using ModeKey = std::vector<std::size_t>;

std::map<std::pair<ModeKey, ModeKey>, std::size_t> canonical_edges(const StructureSignature& s) {
    std::map<std::pair<ModeKey, ModeKey>, std::size_t> out;
    for (const auto& [pair, rank] : s.ranks) {
        if (rank < 2) continue;
        ModeKey a = s.physical.at(pair.first), b = s.physical.at(pair.second);
        if (b < a) std::swap(a, b);
        out[{a, b}] = rank;
    }
    return out;
}

}  // namespace

bool compare(const StructureSignature& found, const StructureSignature& truth, std::size_t rank_tol) {
    if (found.node_count != truth.node_count) return false;
    if (found.physical.size() != found.node_count || truth.physical.size() != truth.node_count) return false;
    std::multiset<ModeKey> fk, tk;
    for (const auto& [n, modes] : found.physical) {
        if (modes.empty()) return false;
        fk.insert(modes);
    }
    for (const auto& [n, modes] : truth.physical) tk.insert(modes);
    if (fk != tk) return false;
    const auto fe = canonical_edges(found), te = canonical_edges(truth);
    if (fe.size() != te.size()) return false;
    for (const auto& [key, rank] : te) {
        const auto it = fe.find(key);
        if (it == fe.end()) return false;
        const std::size_t diff = rank > it->second ? rank - it->second : it->second - rank;
        if (diff > rank_tol) return false;
    }
    return true;
}

TNGraph with_fresh_cores(const TNGraph& g, std::uint64_t seed) {
    TNGraph out = g;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (NodeId n : out.node_ids()) {
        double p = 1.0;
        for (EdgeId e : out.incident(n)) p *= static_cast<double>(out.edge(e).bond_dim);
        const double scale = std::pow(p, -0.25);
        for (auto& v : out.core(n).tensor.values()) v = scale * normal(rng);
    }
    return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t spec_index, std::size_t trial) {
    std::seed_seq seq{master, static_cast<std::uint64_t>(spec_index), static_cast<std::uint64_t>(trial)};
    std::uint64_t out;
    seq.generate(reinterpret_cast<std::uint32_t*>(&out), reinterpret_cast<std::uint32_t*>(&out) + 2);
    return out;
}

namespace {

TrialOutcome run_trial(const TNGraph& truth_graph, const StructureSignature& truth_sig, std::size_t trial,
                       std::uint64_t seed, const RevealOptions& opt, const RGConfig& base) {
    const auto start = std::chrono::steady_clock::now();
    TrialOutcome out;
    out.trial = trial;
    out.seed = seed;
    out.truth = truth_sig;
    try {
        const TNGraph g = with_fresh_cores(truth_graph, seed);
        DenseTensor x = realize(g);
        if (opt.noise_fraction > 0.0) x = add_noise(x, opt.noise_fraction * frobenius_norm(x), seed ^ 0x9e3779b97f4a7c15ULL);
        const DenseTensor mask = DenseTensor::filled(x.shape(), 1.0);
        RGConfig cfg = base;
        cfg.seed = seed;
        const auto res = rg_search(x, mask, cfg);
        const double tau = temperature(res.report.total_steps, cfg);
        out.found = harden(res.best, cfg.eps_diag, cfg.delta_gate, tau);
        out.matched = compare(out.found, truth_sig, opt.rank_tol);
        out.re_final = relative_error(x, reconstruct(res.best, tau));
        if (res.report.aborted) out.error = res.report.diagnostic;
    } catch (const std::exception& e) {
        out.error = e.what();
        out.matched = false;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

std::vector<SpecResult> success_rate(const std::vector<std::pair<std::string, TruthSpec>>& specs,
                                     const RevealOptions& opt, const RGConfig& cfg, const TrialCallback& on_trial) {
    if (opt.trials < 1) throw std::invalid_argument("success_rate: at least one trial per spec");
    struct Job {
        std::size_t spec, trial;
    };
    std::vector<SpecResult> results(specs.size());
    std::vector<TNGraph> truths;
    std::vector<StructureSignature> sigs;
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        truths.push_back(gen_structure(specs[i].second));
        sigs.push_back(harden(truths.back(), cfg.eps_diag, cfg.delta_gate, kRealizeTemperature));
        results[i].name = specs[i].first;
        results[i].trials = opt.trials;
        results[i].outcomes.resize(opt.trials);
        for (std::size_t t = 0; t < opt.trials; ++t) jobs.push_back({i, t});
    }
    std::atomic<std::size_t> next{0};
    std::mutex report_mu;
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            const auto [si, t] = jobs[j];
            auto outcome = run_trial(truths[si], sigs[si], t, trial_seed(opt.master_seed, si, t), opt, cfg);
            results[si].outcomes[t] = outcome;
            if (on_trial) {
                std::lock_guard lock(report_mu);
                on_trial(results[si].name, outcome);
            }
        }
    };
    const std::size_t nw = std::max<std::size_t>(1, std::min(opt.workers, jobs.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < nw; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& r : results) {
        for (const auto& o : r.outcomes) r.matches += o.matched ? 1 : 0;
        r.fraction = static_cast<double>(r.matches) / static_cast<double>(r.trials);
    }
    return results;
}

std::string signature_to_string(const StructureSignature& s) {
    std::ostringstream os;
    os << "nodes=" << s.node_count << " edges=";
    bool first = true;
    for (const auto& [pair, rank] : s.ranks) {
        if (!first) os << ';';
        first = false;
        os << pair.first << '-' << pair.second << ':' << rank;
    }
    return os.str();
}

void write_success_table(std::ostream& os, const std::vector<SpecResult>& results) {
    os << "spec,trials,matches,fraction\n";
    for (const auto& r : results) os << r.name << ',' << r.trials << ',' << r.matches << ',' << r.fraction << '\n';
}

void write_trial_log(std::ostream& os, const std::vector<SpecResult>& results) {
    os << "spec,trial,seed,matched,re_final,seconds,found,truth,error\n";
    for (const auto& r : results)
        for (const auto& o : r.outcomes)
            os << r.name << ',' << o.trial << ',' << o.seed << ',' << (o.matched ? 1 : 0) << ',' << o.re_final << ','
               << o.seconds << ',' << signature_to_string(o.found) << ',' << signature_to_string(o.truth) << ','
               << o.error << '\n';
}

}  // namespace rgtn
