// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "dilab/bump.hpp"
#include "dilab/eda.hpp"
#include "dilab/experiments.hpp"
#include "dilab/metrics.hpp"
#include "dilab/rng.hpp"
#include "dilab/training.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace dilab;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

Vector unit_normal(int dim, Rng& rng)
{
    return oracle::normal_vector(dim, rng).normalized();
}

Outcome jet_correctness()
{
    double worst_fd = 0.0;
    double worst_sym = 0.0;
    double worst_lin = 0.0;
    Rng rng(101);
    for (int t = 0; t < 100; ++t) {
        const NetParams net = NetParams::random({8, 16, 16, 4}, Activation::tanh, 1000 + t, 1.0, 3);
        const Vector x = oracle::normal_vector(8, rng);
        const oracle::Fn f = [&](const Vector& y) { return forward(net, y); };
        std::vector<Vector> dirs;
        for (int j = 0; j < 3; ++j) {
            dirs.push_back(unit_normal(8, rng));
        }
        for (int i = 1; i <= 3; ++i) {
            const std::span<const Vector> d(dirs.data(), static_cast<std::size_t>(i));
            const Vector exact = directional_derivative(net, x, d);
            // Third-order differences at smaller steps are dominated by roundoff.
            const Vector fd = oracle::mixed_derivative(f, x, d, 1e-2);
            worst_fd = std::max(worst_fd, oracle::rel_error(exact, fd, 1e-12));

            std::vector<int> order(static_cast<std::size_t>(i));
            std::iota(order.begin(), order.end(), 0);
            const double scale = std::max(exact.norm(), 1.0);
            while (std::next_permutation(order.begin(), order.end())) {
                std::vector<Vector> perm;
                for (int o : order) {
                    perm.push_back(d[static_cast<std::size_t>(o)]);
                }
                worst_sym = std::max(worst_sym, (directional_derivative(net, x, perm) - exact).norm() / scale);
            }

            const double a = 0.7;
            const double b = -1.3;
            const Vector extra = unit_normal(8, rng);
            std::vector<Vector> mixed(d.begin(), d.end());
            mixed[0] = a * d[0] + b * extra;
            std::vector<Vector> other(d.begin(), d.end());
            other[0] = extra;
            const Vector lhs = directional_derivative(net, x, mixed);
            const Vector rhs = a * exact + b * directional_derivative(net, x, other);
            worst_lin = std::max(worst_lin, (lhs - rhs).norm() / std::max(rhs.norm(), 1.0));
        }
    }
    return {worst_fd <= 1e-4 && worst_sym <= 1e-12 && worst_lin <= 1e-12,
            fmt("fd rel %.2e, symmetry %.2e, multilinearity %.2e", worst_fd, worst_sym, worst_lin)};
}

Outcome eda_chain_rule()
{
    constexpr int kDim = 32;
    double worst = 0.0;
    Rng rng(202);
    std::vector<double> sensors;
    for (int s = 0; s < 10; ++s) {
        sensors.push_back((s + 0.5) / 10.0);
    }
    for (int t = 0; t < 50; ++t) {
        Architecture arch;
        arch.hidden = {12, 12};
        arch.seed = 300 + t;
        arch.activation = t % 3 == 2 ? Activation::softplus : Activation::tanh;
        const EdaModel m = t % 2 == 0 ? hgno_new(kDim, 8, 6, arch) : deeponet_new(sensors, sensors, 0.15, kDim, arch);
        const oracle::Fn f = [&](const Vector& y) { return eda_eval(m, y); };
        const Coeffs x = oracle::normal_vector(kDim, rng) * 0.5;
        const std::vector<Coeffs> dirs{unit_normal(kDim, rng), unit_normal(kDim, rng)};
        for (int i = 1; i <= 2; ++i) {
            const std::span<const Coeffs> d(dirs.data(), static_cast<std::size_t>(i));
            const Vector exact = eda_derivative(m, x, d);
            const Vector fd = oracle::mixed_derivative(f, x, d, 1e-3);
            worst = std::max(worst, oracle::rel_error(exact, fd, 1e-12));
        }
    }
    return {worst <= 1e-4, fmt("worst rel error %.2e over 50 models", worst)};
}

Outcome gaussian_identity()
{
    const GaussianSpec gamma = GaussianSpec::power_law(64, 2.0);
    int within = 0;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Matrix l = random_low_rank(16, 64, 8, 400 + t);
        const double exact = oracle::hs_norm(l, gamma.eigenvalues);
        const double mc = gaussian_lp_norm_mc(l, gamma, 2.0, 200000, 500 + t).value;
        const double rel = std::abs(mc - exact) / exact;
        worst = std::max(worst, rel);
        within += rel <= 0.02 ? 1 : 0;
    }
    return {within >= 18, fmt("%.0f/20 maps within 2%%, worst %.2e", within, worst)};
}

Outcome dichotomy()
{
    constexpr int kDim = 64;
    const TargetOperator id = identity_target(kDim);
    const MeasureSampler mu = MeasureSampler::gaussian_product(GaussianSpec::power_law(kDim, 2.0), 1);
    const CompactSpec k_in = CompactSpec::hilbert_cube(kDim);
    const CompactSpec k_dirs = CompactSpec::hilbert_cube(kDim);
    bool ok = true;
    std::ostringstream detail;
    for (const int rank : {8, 16, 32}) {
        const TargetOperator model = as_target(projection_model(kDim, rank));
        const auto op = opnorm_samples(id, model, mu, 1, 256, 600 + rank);
        const double lo = *std::min_element(op.begin(), op.end());
        const CompactOpenResult co = compact_open_seminorm(id, model, k_in, k_dirs, 1, 256, 700 + rank);
        const double tail = oracle::tail_sum_j4(rank, kDim);
        const bool row = lo >= 1.0 - 1e-9 && co.exact && std::abs(*co.exact - tail) <= 1e-10;
        ok = ok && row;
        detail << "N'=" << rank << ": opnorm min " << fmt("%.6f", lo) << ", compact-open "
               << fmt("%.4e", co.exact.value_or(-1.0)) << " vs tail " << fmt("%.4e", tail) << "; ";
    }
    return {ok, detail.str()};
}

Outcome cylindrical_convergence()
{
    constexpr int kDim = 64;
    const TargetOperator f = benchmark_quadratic(kDim, 8, 0);
    const MeasureSampler mu = MeasureSampler::gaussian_product(GaussianSpec::power_law(kDim, 2.0), 1);
    std::vector<NormEstimate> errors;
    for (const int d : {4, 8, 16, 32, 64}) {
        errors.push_back(bastiani_sobolev_error(f, cylindrical_approximation(f, d, d), mu, 1, 2.0, 2000, 800));
    }
    bool ok = errors.back().value <= 1e-12;
    std::ostringstream detail;
    for (std::size_t l = 0; l < errors.size(); ++l) {
        if (l > 0) {
            ok = ok && errors[l].value <= errors[l - 1].value + 2.0 * joint_std_error(errors[l], errors[l - 1]);
        }
        detail << fmt("%.3e ", errors[l].value);
    }
    return {ok, "errors at d=m=4..64: " + detail.str()};
}

Outcome norm_domination()
{
    constexpr int kDim = 16;
    const MeasureSampler mu = MeasureSampler::gaussian_product(GaussianSpec::power_law(kDim, 2.0), 2);
    const TargetOperator zero = zero_target(kDim);
    const double c = domination_constant(mu, 2, 2.0, 20000, 900);
    double worst_op = -1e300;
    double worst_tilde = -1e300;
    bool ok = true;
    for (int t = 0; t < 20; ++t) {
        std::optional<TargetOperator> f;
        if (t % 2 == 0) {
            f = as_target(EdaModel(Encoder::projection(kDim, kDim),
                                   NetParams::affine(random_low_rank(kDim, kDim, 4, 1000 + t), Vector::Zero(kDim), 3),
                                   Decoder::projection(kDim, kDim)));
        } else {
            f = benchmark_quadratic(kDim, 6, 1000 + t);
        }
        const NormEstimate b = bastiani_sobolev_error(*f, zero, mu, 2, 2.0, 4000, 1100 + t);
        const NormEstimate op = opnorm_sobolev_error(*f, zero, mu, 2, 2.0, 4000, 1200 + t);
        const NormEstimate ti = tilde_sobolev_error(*f, zero, mu, 2, 2.0, 4000, 1300 + t);
        const double gap_op = b.value - (c * op.value + 3.0 * std::hypot(b.std_error, c * op.std_error));
        const double gap_tilde = b.value - (ti.value + 3.0 * joint_std_error(b, ti));
        worst_op = std::max(worst_op, gap_op);
        worst_tilde = std::max(worst_tilde, gap_tilde);
        ok = ok && gap_op <= 0.0 && gap_tilde <= 0.0;
    }
    return {ok, fmt("C = %.4f; max slack used: opnorm %.3e, tilde %.3e (must be <= 0)", c, worst_op, worst_tilde)};
}

Outcome bump_bounds()
{
    double cs[4] = {0.0, 0.0, 0.0, 0.0};
    for (int i = 1; i <= 3; ++i) {
        cs[i] = calibrate_bump_constant(i);
    }
    Rng rng(1400);
    bool ok = true;
    double worst = 0.0;
    int plateau = 0;
    int support = 0;
    for (const double eta : {1.0, 0.5, 0.25}) {
        const BumpSpec spec{eta, 2.0, 3};
        std::uniform_real_distribution<double> radius(0.0, 1.6 / eta);
        for (int t = 0; t < 1000; ++t) {
            const Coeffs x = unit_normal(8, rng) * radius(rng);
            const std::vector<Coeffs> dirs{unit_normal(8, rng), unit_normal(8, rng), unit_normal(8, rng)};
            const double r = x.norm();
            const bool flat = r <= 1.0 / eta;
            const bool outside = r >= std::sqrt(2.0) / eta;
            if (flat) {
                ok = ok && bump_eval(spec, x) == 1.0;
                ++plateau;
            }
            if (outside) {
                ok = ok && bump_eval(spec, x) == 0.0;
                ++support;
            }
            for (int i = 1; i <= 3; ++i) {
                const double v = bump_derivative(spec, x, std::span<const Coeffs>(dirs.data(), static_cast<std::size_t>(i)));
                const double normalized = std::abs(v) / (cs[i] * std::pow(eta, i));
                worst = std::max(worst, normalized);
                ok = ok && normalized <= 1.0 + 1e-9;
                if (flat || outside) {
                    ok = ok && v == 0.0;
                }
            }
        }
    }
    return {ok, fmt("max |D^i b| / (C eta^i) = %.4f; %.0f plateau and %.0f outside points exact", worst, plateau,
                    support)};
}

Outcome partition_of_unity()
{
    std::vector<double> sensors;
    for (int s = 0; s < 16; ++s) {
        sensors.push_back((s + 0.5) / 16.0);
    }
    const PartitionOfUnity pou(sensors, 1.5 / 16.0);
    const Vector ones = Vector::Ones(16) * 2.5;
    double sum_err = 0.0;
    double rec_err = 0.0;
    for (int g = 0; g <= 1000; ++g) {
        const double y = g / 1000.0;
        sum_err = std::max(sum_err, std::abs(pou.weights(y).sum() - 1.0));
        rec_err = std::max(rec_err, std::abs(pou.reconstruct(ones, y) - 2.5));
    }
    return {sum_err <= 1e-12 && rec_err <= 1e-10,
            fmt("sum error %.2e, constant reconstruction error %.2e", sum_err, rec_err)};
}

Outcome teacher_student()
{
    constexpr int kDim = 64;
    Architecture arch;
    arch.hidden = {16};
    arch.seed = 1500;
    const EdaModel teacher = hgno_new(kDim, 8, 8, arch);
    const EdaModel student = perturbed_copy(teacher, 0.05, 1501);
    const TargetOperator f = as_target(teacher);
    const MeasureSampler mu = MeasureSampler::gaussian_product(GaussianSpec::power_law(kDim, 2.0), 1);
    TrainConfig cfg;
    cfg.k_loss = 1;
    cfg.n_train = 64;
    cfg.n_heldout = 256;
    cfg.iterations = 10000;
    cfg.step_size = 0.2;
    cfg.momentum = 0.9;
    const TrainResult a = train(cfg, student, f, mu, 1502);
    const TrainResult b = train(cfg, student, f, mu, 1502);
    const bool deterministic =
        a.report.history == b.report.history && a.model.net().flatten() == b.model.net().flatten();
    return {a.report.best_loss <= 1e-6 && deterministic && a.report.status == TrainStatus::completed,
            fmt("initial loss %.3e, best loss %.3e, deterministic %.0f", a.report.history.front(), a.report.best_loss,
                deterministic ? 1.0 : 0.0)};
}

Outcome derivative_advantage()
{
    constexpr int kDim = 64;
    const TargetOperator f = benchmark_quadratic(kDim, 8, 0);
    const MeasureSampler mu = MeasureSampler::gaussian_product(GaussianSpec::power_law(kDim, 2.0), 1);
    TrainConfig cfg;
    cfg.n_train = 256;
    cfg.n_heldout = 1024;
    cfg.iterations = 1000;
    cfg.step_size = 0.01;
    cfg.seeds = {1, 2, 3};
    const ComparisonReport r = compare_k0_k1(cfg, f, mu, [](std::uint64_t seed) {
        Architecture arch;
        arch.hidden = {32, 32};
        arch.seed = seed;
        return hgno_new(kDim, 16, 16, arch);
    });
    std::printf("      seed  k_loss  heldout_order0  heldout_order1  best_loss\n");
    for (const auto& row : r.rows) {
        std::printf("      %4llu  %6d  %14.4e  %14.4e  %9.3e\n", static_cast<unsigned long long>(row.seed), row.k_loss,
                    row.heldout_order0, row.heldout_order1, row.best_loss);
    }
    std::ostringstream ratios;
    for (double v : r.ratios) {
        ratios << fmt("%.3f ", v);
    }
    return {r.median_ratio < 1.0, "per-seed ratios " + ratios.str() + fmt("median %.3f", r.median_ratio)};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "jet correctness", 30, jet_correctness},
        {2, "encoder-decoder chain rule", 30, eda_chain_rule},
        {3, "Gaussian Hilbert-Schmidt identity", 60, gaussian_identity},
        {4, "operator-norm / compact-open dichotomy", 20, dichotomy},
        {5, "cylindrical convergence", 60, cylindrical_convergence},
        {6, "norm domination", 60, norm_domination},
        {7, "bump derivative bounds", 30, bump_bounds},
        {8, "DeepONet partition of unity", 5, partition_of_unity},
        {9, "teacher-student training", 300, teacher_student},
        {10, "derivative-informed advantage", 900, derivative_advantage},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds <= c.budget_seconds;
        const bool passed = o.passed && in_time;
        failures += passed ? 0 : 1;
        std::printf("%s  [%2d] %-40s %7.2fs (budget %.0fs)  %s%s\n", passed ? "PASS" : "FAIL", c.id, c.name, seconds,
                    c.budget_seconds, o.detail.c_str(), in_time ? "" : "  [over budget]");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
