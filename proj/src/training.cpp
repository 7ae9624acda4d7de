#include "dilab/training.hpp"

#include "dilab/metrics.hpp"
#include "dilab/parallel.hpp"
#include "dilab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace dilab {
namespace {

unsigned order_mask(int i) { return (1U << i) - 1U; }

/// Adjoint of the rowwise map o = sigma(a) on jets: abar[B] = sum_{S superset B} obar[S] g[S \ B],
/// g = sigma' o a.
Matrix pointwise_adjoint(ScalarMap act, int order, const Matrix& a, const Matrix& obar)
{
    const auto n = static_cast<std::size_t>(a.cols());
    const unsigned full = static_cast<unsigned>(n) - 1U;
    Matrix abar = Matrix::Zero(a.rows(), a.cols());
    std::vector<double> row(n);
    std::vector<double> g(n);
    DerivativeTable shifted{};
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (std::size_t s = 0; s < n; ++s) {
            row[s] = a(r, static_cast<Eigen::Index>(s));
        }
        const DerivativeTable d = scalar_derivatives(act, row[0], order + 1);
        for (int t = 0; t <= order; ++t) {
            shifted[static_cast<std::size_t>(t)] = d[static_cast<std::size_t>(t) + 1];
        }
        jet_algebra::compose(std::span<const double>(shifted.data(), static_cast<std::size_t>(order) + 1), row, g);
        for (unsigned b = 0; b <= full; ++b) {
            const unsigned rest = full & ~b;
            double acc = 0.0;
            // Enumerate every T subset of rest, including the empty set.
            for (unsigned t = rest;; t = (t - 1) & rest) {
                acc += obar(r, static_cast<Eigen::Index>(b | t)) * g[t];
                if (t == 0) {
                    break;
                }
            }
            abar(r, static_cast<Eigen::Index>(b)) = acc;
        }
    }
    return abar;
}

struct SamplePass {
    std::vector<double> order_sq;
    Vector gradient;
};

/// Residuals of one draw and, if requested, the gradient of scale * sum_i |r_i|^2.
SamplePass sample_pass(const EdaModel& model, const Draw& draw, std::span<const Coeffs> targets, int k,
                       double scale, bool want_gradient)
{
    const NetParams& net = model.net();
    const Matrix& enc = model.encoder().functionals();
    const Matrix& dec = model.decoder().elements();
    const ScalarMap act = to_scalar_map(net.activation);
    const int layers = net.num_layers();

    std::vector<Vector> encoded_dirs;
    for (int j = 0; j < k; ++j) {
        encoded_dirs.push_back(enc * draw.dirs[static_cast<std::size_t>(j)]);
    }
    MultiJet jet = lift(Vector(enc * draw.x), encoded_dirs);
    std::vector<Matrix> inputs(static_cast<std::size_t>(layers));
    std::vector<Matrix> pre(static_cast<std::size_t>(layers));
    Matrix cur = jet.coeffs();
    for (int l = 0; l < layers; ++l) {
        const auto idx = static_cast<std::size_t>(l);
        Matrix a = net.weights[idx] * cur;
        a.col(0) += net.biases[idx];
        inputs[idx] = std::move(cur);
        if (l + 1 < layers) {
            MultiJet aj(k, static_cast<int>(a.rows()));
            aj.coeffs() = a;
            cur = apply_pointwise(act, aj).coeffs();
        } else {
            cur = a;
        }
        pre[idx] = std::move(a);
    }

    SamplePass out;
    out.order_sq.resize(static_cast<std::size_t>(k) + 1);
    Matrix ybar;
    if (want_gradient) {
        ybar = Matrix::Zero(cur.rows(), cur.cols());
    }
    for (int i = 0; i <= k; ++i) {
        const Vector r = targets[static_cast<std::size_t>(i)] - dec * cur.col(order_mask(i));
        out.order_sq[static_cast<std::size_t>(i)] = r.squaredNorm();
        if (want_gradient) {
            ybar.col(order_mask(i)) = -2.0 * scale * (dec.transpose() * r);
        }
    }
    if (!want_gradient) {
        return out;
    }

    out.gradient.resize(net.num_parameters());
    std::vector<Eigen::Index> offsets(static_cast<std::size_t>(layers));
    Eigen::Index pos = 0;
    for (int l = 0; l < layers; ++l) {
        offsets[static_cast<std::size_t>(l)] = pos;
        pos += net.weights[static_cast<std::size_t>(l)].size() + net.biases[static_cast<std::size_t>(l)].size();
    }
    Matrix adj = std::move(ybar);
    for (int l = layers - 1; l >= 0; --l) {
        const auto idx = static_cast<std::size_t>(l);
        if (l + 1 < layers) {
            adj = pointwise_adjoint(act, k, pre[idx], adj);
        }
        const Matrix wbar = adj * inputs[idx].transpose();
        Eigen::Index p = offsets[idx];
        for (Eigen::Index i = 0; i < wbar.rows(); ++i) {
            for (Eigen::Index j = 0; j < wbar.cols(); ++j) {
                out.gradient(p++) = wbar(i, j);
            }
        }
        out.gradient.segment(p, adj.rows()) = adj.col(0);
        if (l > 0) {
            adj = net.weights[idx].transpose() * adj;
        }
    }
    return out;
}

void require_loss_orders(const EdaModel& model, const TargetOperator& target, std::span<const Draw> batch, int k)
{
    if (k < 0) {
        throw DomainError("k_loss must be nonnegative");
    }
    if (k > model.max_order() || !target.supports_order(k)) {
        throw OrderError("loss order " + std::to_string(k) + " exceeds model or target capability");
    }
    require_dim(model.input_dim(), target.input_dim(), "loss (input)");
    require_dim(model.output_dim(), target.output_dim(), "loss (output)");
    if (batch.empty()) {
        throw DomainError("loss: empty batch");
    }
    for (const auto& d : batch) {
        if (static_cast<int>(d.dirs.size()) < k) {
            throw DomainError("loss: draws carry fewer than k_loss directions");
        }
    }
}

/// targets[s * (k + 1) + i] = D^i F(x_s)(h_s^1..h_s^i).
std::vector<Coeffs> target_values(const TargetOperator& target, std::span<const Draw> batch, int k)
{
    const auto stride = static_cast<std::size_t>(k) + 1;
    std::vector<Coeffs> out(batch.size() * stride);
    parallel_for(batch.size(), [&](std::size_t s) {
        const Draw& d = batch[s];
        for (int i = 0; i <= k; ++i) {
            out[s * stride + static_cast<std::size_t>(i)] = target.deriv(d.x, std::span(d.dirs).first(i));
        }
    });
    return out;
}

LossGradient evaluate(const EdaModel& model, std::span<const Draw> batch, std::span<const Coeffs> targets, int k,
                      bool want_gradient)
{
    const auto n = batch.size();
    const auto stride = static_cast<std::size_t>(k) + 1;
    const double scale = 1.0 / static_cast<double>(n);
    const Eigen::Index n_params = model.net().num_parameters();
    Matrix order_sq(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(stride));
    Matrix grads;
    if (want_gradient) {
        grads.resize(static_cast<Eigen::Index>(n), n_params);
    }
    parallel_for(n, [&](std::size_t s) {
        SamplePass pass = sample_pass(model, batch[s], targets.subspan(s * stride, stride), k, scale, want_gradient);
        const auto row = static_cast<Eigen::Index>(s);
        for (std::size_t i = 0; i < stride; ++i) {
            order_sq(row, static_cast<Eigen::Index>(i)) = pass.order_sq[i];
        }
        if (want_gradient) {
            grads.row(row) = pass.gradient.transpose();
        }
    });
    LossGradient out;
    for (std::size_t i = 0; i < stride; ++i) {
        const auto col = order_sq.col(static_cast<Eigen::Index>(i));
        const double mean = pairwise_sum(std::span<const double>(col.data(), n)) * scale;
        out.order_losses.push_back(mean);
        out.loss += mean;
    }
    if (want_gradient) {
        out.gradient.resize(n_params);
        for (Eigen::Index p = 0; p < n_params; ++p) {
            const auto col = grads.col(p);
            out.gradient(p) = pairwise_sum(std::span<const double>(col.data(), n));
        }
        if (!out.gradient.allFinite()) {
            throw NumericalError("loss gradient is not finite");
        }
    }
    return out;
}

} // namespace

void TrainConfig::validate() const
{
    if (k_loss < 0 || k_loss > kMaxJetOrder) {
        throw DomainError("TrainConfig: k_loss out of range");
    }
    if (p != 2.0) {
        throw DomainError("TrainConfig: gradient training requires p = 2");
    }
    if (n_train < 1 || n_dirs < 1 || n_heldout < 1) {
        throw DomainError("TrainConfig: n_train, n_dirs and n_heldout must be positive");
    }
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
        throw DomainError("TrainConfig: step_size must be positive");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw DomainError("TrainConfig: momentum must lie in [0, 1)");
    }
    if (iterations < 0) {
        throw DomainError("TrainConfig: iterations must be nonnegative");
    }
    if (!(divergence_threshold > 0.0)) {
        throw DomainError("TrainConfig: divergence_threshold must be positive");
    }
}

const char* to_string(TrainStatus status) noexcept
{
    return status == TrainStatus::completed ? "completed" : "diverged";
}

double sobolev_loss(const EdaModel& model, const TargetOperator& target, std::span<const Draw> batch, int k_loss,
                    double p)
{
    if (!(p >= 1.0)) {
        throw DomainError("sobolev_loss: p must be >= 1");
    }
    require_loss_orders(model, target, batch, k_loss);
    const std::vector<Coeffs> targets = target_values(target, batch, k_loss);
    const auto stride = static_cast<std::size_t>(k_loss) + 1;
    Matrix values(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(stride));
    parallel_for(batch.size(), [&](std::size_t s) {
        const SamplePass pass =
            sample_pass(model, batch[s], std::span(targets).subspan(s * stride, stride), k_loss, 0.0, false);
        for (std::size_t i = 0; i < stride; ++i) {
            values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = std::pow(pass.order_sq[i], p / 2.0);
        }
    });
    double loss = 0.0;
    for (std::size_t i = 0; i < stride; ++i) {
        const auto col = values.col(static_cast<Eigen::Index>(i));
        loss = std::max(loss, pairwise_sum(std::span<const double>(col.data(), batch.size())) /
                                  static_cast<double>(batch.size()));
    }
    return loss;
}

LossGradient loss_and_gradient(const EdaModel& model, const TargetOperator& target, std::span<const Draw> batch,
                               int k_loss)
{
    require_loss_orders(model, target, batch, k_loss);
    const std::vector<Coeffs> targets = target_values(target, batch, k_loss);
    return evaluate(model, batch, targets, k_loss, true);
}

Vector grad_theta(const EdaModel& model, const TargetOperator& target, std::span<const Draw> batch, int k_loss,
                  double p)
{
    if (p != 2.0) {
        throw DomainError("grad_theta: only p = 2 has a smooth loss");
    }
    return loss_and_gradient(model, target, batch, k_loss).gradient;
}

TrainResult train(const TrainConfig& cfg, const EdaModel& initial, const TargetOperator& target,
                  const MeasureSampler& mu, std::uint64_t seed)
{
    cfg.validate();
    if (cfg.k_loss > mu.k()) {
        throw DomainError("train: measure carries fewer than k_loss directions");
    }
    const auto start = std::chrono::steady_clock::now();
    const int k = cfg.k_loss;

    const MeasureSampler base = mu.marginal(0);
    const MeasureSampler dir_sampler = mu.marginal(k);
    const std::uint64_t input_seed = derive_seed(seed, 1);
    const std::uint64_t direction_seed = derive_seed(seed, 2);
    const std::uint64_t heldout_seed = derive_seed(seed, 3);
    std::vector<Coeffs> inputs(static_cast<std::size_t>(cfg.n_train));
    parallel_for(inputs.size(), [&](std::size_t s) { inputs[s] = base.draw_one(input_seed, s).x; });

    const auto batch_size = inputs.size() * static_cast<std::size_t>(cfg.n_dirs);
    auto make_batch = [&](int iteration) {
        std::vector<Draw> batch(batch_size);
        const std::uint64_t iter_seed = derive_seed(direction_seed, static_cast<std::uint64_t>(iteration));
        parallel_for(batch_size, [&](std::size_t b) {
            Draw d = dir_sampler.draw_one(iter_seed, b);
            d.x = inputs[b / static_cast<std::size_t>(cfg.n_dirs)];
            batch[b] = std::move(d);
        });
        return batch;
    };

    TrainReport report;
    report.seed = seed;
    Vector theta = initial.net().flatten();
    Vector best_theta = theta;
    Vector velocity = Vector::Zero(theta.size());
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= cfg.iterations; ++it) {
        const EdaModel current = initial.with_net(initial.net().with_parameters(theta));
        const std::vector<Draw> batch = make_batch(it);
        const std::vector<Coeffs> targets = target_values(target, batch, k);
        const bool step = it < cfg.iterations;
        LossGradient lg;
        bool finite = true;
        try {
            lg = evaluate(current, batch, targets, k, step);
        } catch (const NumericalError&) {
            finite = false;
        }
        const double loss = finite ? lg.loss : std::numeric_limits<double>::quiet_NaN();
        report.history.push_back(loss);
        if (std::isfinite(loss) && loss < best) {
            best = loss;
            best_theta = theta;
        }
        report.best_so_far.push_back(best);
        if (!std::isfinite(loss) || loss > cfg.divergence_threshold) {
            report.status = TrainStatus::diverged;
            break;
        }
        if (!step) {
            break;
        }
        if (cfg.optimizer == Optimizer::momentum_gd) {
            velocity = cfg.momentum * velocity + lg.gradient;
            theta -= cfg.step_size * velocity;
        } else {
            theta -= cfg.step_size * lg.gradient;
        }
    }
    report.best_loss = best;

    TrainResult result{initial.with_net(initial.net().with_parameters(best_theta)), std::move(report)};
    const int heldout_order = std::min({1, mu.k(), result.model.max_order()});
    const NormEstimate heldout = bastiani_sobolev_error(as_target(result.model), target, mu, heldout_order, cfg.p,
                                                        cfg.n_heldout, heldout_seed);
    for (const auto& t : heldout.terms) {
        const double v = std::pow(std::max(t.value, 0.0), 1.0 / cfg.p);
        result.report.heldout_errors.push_back(v);
        result.report.heldout_std_error.push_back(t.value > 0.0 ? t.std_error * v / (cfg.p * t.value) : 0.0);
    }
    result.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

TrainResult train(const TrainConfig& cfg, const EdaModel& initial, const TargetOperator& target,
                  const MeasureSampler& mu)
{
    return train(cfg, initial, target, mu, cfg.seeds.empty() ? 0 : cfg.seeds.front());
}

ComparisonReport compare_k0_k1(const TrainConfig& cfg, const TargetOperator& target, const MeasureSampler& mu,
                               const std::function<EdaModel(std::uint64_t)>& make_model)
{
    if (cfg.seeds.size() < 3) {
        throw DomainError("compare_k0_k1: need at least three seeds");
    }
    if (mu.k() < 1) {
        throw DomainError("compare_k0_k1: measure must carry at least one direction");
    }
    ComparisonReport report;
    for (const std::uint64_t seed : cfg.seeds) {
        const EdaModel initial = make_model(seed);
        double errors[2] = {0.0, 0.0};
        for (int k_loss = 0; k_loss <= 1; ++k_loss) {
            TrainConfig run = cfg;
            run.k_loss = k_loss;
            const TrainResult r = train(run, initial, target, mu, seed);
            ComparisonRow row;
            row.seed = seed;
            row.k_loss = k_loss;
            row.heldout_order0 = r.report.heldout_errors.at(0);
            row.heldout_order1 = r.report.heldout_errors.at(1);
            row.best_loss = r.report.best_loss;
            row.status = r.report.status;
            errors[k_loss] = row.heldout_order1;
            report.rows.push_back(row);
        }
        report.ratios.push_back(errors[0] > 0.0 ? errors[1] / errors[0] : 1.0);
    }
    std::vector<double> sorted = report.ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    report.median_ratio = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    return report;
}

} // namespace dilab
