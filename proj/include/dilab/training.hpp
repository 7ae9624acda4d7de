#pragma once

// Derivative-informed training of encoder-decoder models against target operators.
//
// The softened Sobolev loss on a batch is sum_{i <= k_loss} mean_s |D^i F(x_s)(h_s..) - D^i M(x_s)(h_s..)|^2,
// the order-i term using the first i directions of each draw. Its parameter gradient is obtained
// by reverse accumulation through the jet propagation: every Taylor coefficient of every layer is
// forward state, and the adjoint of a pointwise activation o = sigma(a) follows from
// d o[S] / d a[B] = (sigma' o a)[S \ B] for B subset of S.

#include "dilab/measures.hpp"
#include "dilab/targets.hpp"

#include <functional>
#include <string>

namespace dilab {

enum class Optimizer { gd, momentum_gd };

struct TrainConfig {
    int k_loss = 1;
    double p = 2.0;
    int n_train = 256;
    int n_dirs = 1;
    Optimizer optimizer = Optimizer::momentum_gd;
    double step_size = 1e-2;
    double momentum = 0.9;
    int iterations = 1000;
    std::vector<std::uint64_t> seeds{0};
    int n_heldout = 512;
    double divergence_threshold = 1e6;

    /// Throws DomainError on inconsistent values.
    void validate() const;
};

enum class TrainStatus { completed, diverged };

const char* to_string(TrainStatus status) noexcept;

struct TrainReport {
    std::vector<double> history;     ///< softened loss at the parameters of each iteration (0..iterations)
    std::vector<double> best_so_far; ///< running minimum of history
    double best_loss = 0.0;
    std::vector<double> heldout_errors;    ///< held-out Bastiani error per order (p-th root of each term)
    std::vector<double> heldout_std_error; ///< delta-method standard errors of heldout_errors
    double wall_clock_seconds = 0.0;
    std::uint64_t seed = 0;
    TrainStatus status = TrainStatus::completed;
};

struct TrainResult {
    EdaModel model;
    TrainReport report;
};

/// max_{i <= k_loss} mean_s |D^i F - D^i M|^p over the batch.
double sobolev_loss(const EdaModel& model, const TargetOperator& target, std::span<const Draw> batch, int k_loss,
                    double p);

struct LossGradient {
    double loss = 0.0;               ///< softened loss
    std::vector<double> order_losses; ///< mean squared residual per order
    Vector gradient;                 ///< d loss / d theta in NetParams::flatten order
};

/// Softened loss (p = 2) and its parameter gradient. Throws NumericalError on a non-finite gradient.
LossGradient loss_and_gradient(const EdaModel& model, const TargetOperator& target, std::span<const Draw> batch,
                               int k_loss);

/// Gradient only; p must be 2.
Vector grad_theta(const EdaModel& model, const TargetOperator& target, std::span<const Draw> batch, int k_loss,
                  double p);

/// Fixed training inputs x_1..x_{n_train} from mu^0, n_dirs fresh direction sets per input at every
/// iteration, held-out errors of orders 0..min(1, mu.k) on an independent stream. Returns the
/// best-loss parameters. A loss above the divergence threshold (or non-finite) stops the run with
/// status diverged.
TrainResult train(const TrainConfig& cfg, const EdaModel& initial, const TargetOperator& target,
                  const MeasureSampler& mu, std::uint64_t seed);

/// Uses cfg.seeds.front().
TrainResult train(const TrainConfig& cfg, const EdaModel& initial, const TargetOperator& target,
                  const MeasureSampler& mu);

struct ComparisonRow {
    std::uint64_t seed = 0;
    int k_loss = 0;
    double heldout_order0 = 0.0;
    double heldout_order1 = 0.0;
    double best_loss = 0.0;
    TrainStatus status = TrainStatus::completed;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;  ///< one per (seed, k_loss)
    std::vector<double> ratios;       ///< per seed: order-1 error with k_loss = 1 over k_loss = 0
    double median_ratio = 0.0;
};

/// Trains the model built by make_model(seed) with k_loss = 0 and k_loss = 1 on the same inputs.
ComparisonReport compare_k0_k1(const TrainConfig& cfg, const TargetOperator& target, const MeasureSampler& mu,
                               const std::function<EdaModel(std::uint64_t)>& make_model);

} // namespace dilab
