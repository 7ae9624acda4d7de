#include "dilab/experiments.hpp"
#include "dilab/metrics.hpp"
#include "dilab/training.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dilab;

namespace {

constexpr int kDim = 16;

Architecture arch(std::vector<int> hidden, std::uint64_t seed, Activation act = Activation::tanh)
{
    Architecture a;
    a.hidden = std::move(hidden);
    a.seed = seed;
    a.activation = act;
    return a;
}

MeasureSampler gaussian(int k) { return MeasureSampler::gaussian_product(GaussianSpec::power_law(kDim, 2.0), k); }

/// Central differences of the softened loss over every parameter.
Vector fd_gradient(const EdaModel& m, const TargetOperator& f, std::span<const Draw> batch, int k_loss, double step)
{
    const Vector theta = m.net().flatten();
    Vector g(theta.size());
    auto loss_at = [&](const Vector& t) {
        return loss_and_gradient(m.with_net(m.net().with_parameters(t)), f, batch, k_loss).loss;
    };
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Vector plus = theta;
        Vector minus = theta;
        plus(i) += step;
        minus(i) -= step;
        g(i) = (loss_at(plus) - loss_at(minus)) / (2.0 * step);
    }
    return g;
}

} // namespace

TEST_CASE("sobolev loss on fixed batches")
{
    const TargetOperator f = benchmark_quadratic(kDim, 4, 2);
    const EdaModel m = hgno_new(kDim, 5, 5, arch({8}, 3));
    const auto batch = gaussian(2).draw(64, 4);
    for (int k = 0; k <= 2; ++k) {
        const double loss = sobolev_loss(m, f, batch, k, 2.0);
        const double est = bastiani_on_batch(f, as_target(m), batch, k, 2.0).value;
        CHECK(std::abs(loss - est * est) <= 1e-12 * std::max(1.0, loss));
    }
    const double l3 = sobolev_loss(m, f, batch, 1, 3.0);
    CHECK(std::abs(l3 - std::pow(bastiani_on_batch(f, as_target(m), batch, 1, 3.0).value, 3.0)) <= 1e-12 * l3);

    double l0 = 0.0;
    for (const Draw& d : batch) {
        l0 += (f.eval(d.x) - eda_eval(m, d.x)).squaredNorm();
    }
    l0 /= static_cast<double>(batch.size());
    CHECK(sobolev_loss(m, f, batch, 0, 2.0) == doctest::Approx(l0).epsilon(1e-13));

    CHECK(sobolev_loss(m, as_target(m), batch, 2, 2.0) == 0.0);
}

TEST_CASE("gradient matches finite differences in theta")
{
    const TargetOperator f = benchmark_quadratic(kDim, 4, 5);
    // 6 -> 12 -> 8 -> 5: 84 + 104 + 45 = 233 parameters.
    for (const Activation act : {Activation::tanh, Activation::softplus}) {
        const EdaModel m = hgno_new(kDim, 6, 5, arch({12, 8}, 6, act));
        CHECK(m.net().num_parameters() == 233);
        const auto batch = gaussian(2).draw(8, 7);
        for (int k = 0; k <= 2; ++k) {
            const LossGradient lg = loss_and_gradient(m, f, batch, k);
            const Vector fd = fd_gradient(m, f, batch, k, 1e-5);
            CHECK(oracle::rel_error(lg.gradient, fd) <= 1e-4);
            CHECK(lg.order_losses.size() == static_cast<std::size_t>(k + 1));
            double sum = 0.0;
            for (double v : lg.order_losses) {
                sum += v;
            }
            CHECK(lg.loss == doctest::Approx(sum).epsilon(1e-14));
        }
    }
}

TEST_CASE("gradient vanishes at a planted minimum and is mean-invariant")
{
    const EdaModel teacher = hgno_new(kDim, 4, 4, arch({6}, 8));
    const TargetOperator f = as_target(teacher);
    const auto batch = gaussian(1).draw(16, 9);
    CHECK(grad_theta(teacher, f, batch, 1, 2.0).norm() <= 1e-10);

    const EdaModel student = perturbed_copy(teacher, 0.1, 10);
    std::vector<Draw> doubled(batch.begin(), batch.end());
    doubled.insert(doubled.end(), batch.begin(), batch.end());
    const Vector g1 = grad_theta(student, f, batch, 1, 2.0);
    const Vector g2 = grad_theta(student, f, doubled, 1, 2.0);
    CHECK(oracle::rel_error(g2, g1) <= 1e-13);
    CHECK_THROWS_AS(grad_theta(student, f, batch, 1, 3.0), DomainError);
}

TEST_CASE("training runs")
{
    const EdaModel teacher = hgno_new(kDim, 4, 4, arch({6}, 11));
    const EdaModel student = perturbed_copy(teacher, 0.05, 12);
    const TargetOperator f = as_target(teacher);
    const MeasureSampler mu = gaussian(1);

    TrainConfig cfg;
    cfg.n_train = 32;
    cfg.n_heldout = 64;
    cfg.iterations = 0;
    const TrainResult none = train(cfg, student, f, mu, 1);
    CHECK(none.model.net().flatten() == student.net().flatten());
    CHECK(none.report.history.size() == 1);

    cfg.iterations = 300;
    cfg.step_size = 0.05;
    const TrainResult a = train(cfg, student, f, mu, 1);
    const TrainResult b = train(cfg, student, f, mu, 1);
    CHECK(a.report.history == b.report.history);
    CHECK(a.model.net().flatten() == b.model.net().flatten());
    CHECK(a.report.heldout_errors == b.report.heldout_errors);
    CHECK(a.report.history.size() == 301);
    CHECK(a.report.status == TrainStatus::completed);
    for (std::size_t i = 1; i < a.report.best_so_far.size(); ++i) {
        CHECK(a.report.best_so_far[i] <= a.report.best_so_far[i - 1]);
    }
    CHECK(a.report.best_loss == a.report.best_so_far.back());
    CHECK(a.report.best_loss < 1e-2 * a.report.history.front());
    CHECK(a.report.heldout_errors.size() == 2);

    TrainConfig wild = cfg;
    wild.optimizer = Optimizer::gd;
    wild.step_size = 1e3;
    wild.iterations = 50;
    const TrainResult d = train(wild, hgno_new(kDim, 4, 4, arch({6}, 1)), benchmark_quadratic(kDim, 3, 1), mu, 2);
    CHECK(d.report.status == TrainStatus::diverged);
    CHECK(d.report.history.size() <= 51);

    TrainConfig bad = cfg;
    bad.step_size = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = cfg;
    bad.n_train = 0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("k0 versus k1 comparison schema")
{
    TrainConfig cfg;
    cfg.n_train = 16;
    cfg.n_heldout = 32;
    cfg.iterations = 20;
    cfg.seeds = {1, 2, 3};
    const auto make = [](std::uint64_t seed) { return hgno_new(kDim, 4, 4, arch({5}, seed)); };
    const ComparisonReport r = compare_k0_k1(cfg, benchmark_quadratic(kDim, 3, 4), gaussian(1), make);
    REQUIRE(r.rows.size() == 6);
    CHECK(r.ratios.size() == 3);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(r.rows[2 * s].seed == cfg.seeds[s]);
        CHECK(r.rows[2 * s].k_loss == 0);
        CHECK(r.rows[2 * s + 1].k_loss == 1);
        CHECK(r.ratios[s] == doctest::Approx(r.rows[2 * s + 1].heldout_order1 / r.rows[2 * s].heldout_order1));
    }
    std::vector<double> sorted = r.ratios;
    std::sort(sorted.begin(), sorted.end());
    CHECK(r.median_ratio == sorted[1]);

    cfg.seeds = {1, 2};
    CHECK_THROWS_AS(compare_k0_k1(cfg, benchmark_quadratic(kDim, 3, 4), gaussian(1), make), DomainError);
}
