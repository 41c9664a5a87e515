#pragma once
// Generic contraction of a set of tensors whose modes carry integer labels.
// A label shared by two operands is summed over; every other label must
// appear in the requested output order.

#include <span>
#include <vector>

#include "rgtn/tensor.hpp"

namespace rgtn {

struct LabeledTensor {
    DenseTensor tensor;
    std::vector<int> labels;  // one per mode
};

/// Contracts all operands pairwise in a greedy order (smallest intermediate
/// first, deterministic tie-break) and permutes the result to `output`.
/// An empty `output` yields a shape-{1} scalar.
DenseTensor contract_network(std::vector<LabeledTensor> operands, std::span<const int> output);

}  // namespace rgtn
