#pragma once
// Multi-scale training loss of a gated tensor network and its exact gradient
// with respect to cores, diagonal factors and gate weights.
//
//   total = data + alpha * temporal + beta * spatial
//         + gamma * sum |D| + delta * sum H(g_e) + epsilon * TNN(X)
//
// with data = 1/2 ||M * (F - X)||^2 and X = reconstruct(g, tau).

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rgtn/tensor.hpp"
#include "rgtn/tn_graph.hpp"

namespace rgtn {

struct CouplingConstants {
    double alpha = 0.0;    // temporal consistency
    double beta = 0.0;     // spatial smoothness
    double gamma = 0.01;   // diagonal sparsity
    double delta = 0.001;  // edge entropy
    double epsilon = 0.1;  // tensor nuclear norm
    /// Per-mode TNN weights; empty means uniform 1/N.
    std::vector<double> tnn_mode_weights;

    /// Per-term geometric multipliers applied by couplings_at_scale.
    double rho_alpha = 1.0;
    double rho_beta = 1.0;
    double rho_gamma = 1.0;
    double rho_delta = 1.0;
    double rho_epsilon = 1.0;

    /// Throws std::invalid_argument on negative weights or bad mode weights.
    void validate(std::size_t order) const;
    std::vector<double> mode_weights(std::size_t order) const;
};

/// lambda_k(s) = lambda_k(0) * rho_k^s for each of the five couplings.
CouplingConstants couplings_at_scale(const CouplingConstants& base, std::size_t s);

/// Which modes carry video-like semantics for the smoothness terms.
struct SmoothnessModes {
    std::optional<std::size_t> temporal;
    std::optional<std::array<std::size_t, 2>> spatial;
};

struct LossBreakdown {
    double data = 0.0;
    double temporal = 0.0;
    double spatial = 0.0;
    double diag_sparsity = 0.0;
    double edge_entropy = 0.0;
    double tnn = 0.0;
    double total = 0.0;
};

struct GradientBundle {
    std::map<NodeId, DenseTensor> cores;
    std::map<std::pair<NodeId, EdgeId>, std::vector<double>> diagonals;
    std::map<EdgeId, double> gates;
};

double binary_entropy(double g);
double soft_threshold(double z, double theta);

/// sum_k w_k ||X_(k)||_*
double tnn(const DenseTensor& x, const std::vector<double>& weights);

/// Per-term evaluation of the individual regularizers on a given tensor.
double temporal_variation(const DenseTensor& x, std::size_t mode);
double spatial_variation(const DenseTensor& x, const std::array<std::size_t, 2>& modes);

LossBreakdown total_loss(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask,
                         const CouplingConstants& c, double tau, const SmoothnessModes& modes = {});

/// Loss and its gradient in one pass.
std::pair<LossBreakdown, GradientBundle> loss_and_grad(const TNGraph& g, const DenseTensor& data,
                                                       const DenseTensor& mask, const CouplingConstants& c,
                                                       double tau, const SmoothnessModes& modes = {});

GradientBundle grad_total_loss(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask,
                               const CouplingConstants& c, double tau, const SmoothnessModes& modes = {});

/// Gradient of the data-fidelity term alone.
GradientBundle grad_data_loss(const TNGraph& g, const DenseTensor& data, const DenseTensor& mask, double tau);

/// Back-propagates an upstream gradient dL/dX of the reconstruction into
/// cores, diagonals and gate weights.
GradientBundle backprop_reconstruction(const TNGraph& g, const DenseTensor& dx, double tau);

}  // namespace rgtn
