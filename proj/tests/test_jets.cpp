#include "dilab/jets.hpp"
#include "dilab/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace dilab;

namespace {

std::vector<Vector> random_dirs(int count, int dim, Rng& rng)
{
    std::vector<Vector> d;
    for (int j = 0; j < count; ++j) {
        d.push_back(oracle::normal_vector(dim, rng));
    }
    return d;
}

Vector dd(const NetParams& net, const Vector& x, const std::vector<Vector>& dirs)
{
    return directional_derivative(net, x, dirs);
}

} // namespace

TEST_CASE("lift layout")
{
    const Vector x{{1.0, 2.0}};
    const MultiJet j0 = lift(x, {});
    CHECK(j0.num_terms() == 1);
    CHECK(j0.primal() == x);

    const std::vector<Vector> dirs{Vector{{3.0, 4.0}}, Vector{{5.0, 6.0}}};
    const MultiJet j2 = lift(x, dirs);
    CHECK(j2.order() == 2);
    CHECK(j2.num_terms() == 4);
    CHECK(Vector(j2.coeff(1)) == dirs[0]);
    CHECK(Vector(j2.coeff(2)) == dirs[1]);
    CHECK(j2.coeff(3).isZero(0.0));

    // Identity map: the order-one coefficient is the direction itself.
    const std::vector<Vector> one{dirs[0]};
    CHECK(Vector(lift(x, one).coeff(1)) == dirs[0]);

    const std::vector<Vector> bad{Vector{{1.0}}};
    CHECK_THROWS_AS(lift(x, bad), DimensionError);
}

TEST_CASE("jet algebra products are square-free")
{
    // (1 + e1)(1 + e2) = 1 + e1 + e2 + e1 e2 ; (e1)(e1) = 0.
    const std::vector<double> a{1, 1, 0, 0};
    const std::vector<double> b{1, 0, 1, 0};
    std::vector<double> out(4);
    jet_algebra::multiply(a, b, out);
    CHECK(out == std::vector<double>{1, 1, 1, 1});
    const std::vector<double> e1{0, 1, 0, 0};
    jet_algebra::multiply(e1, e1, out);
    CHECK(out == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("scalar derivative tables")
{
    const auto t = scalar_derivatives(ScalarMap::tanh, 0.3, 5);
    const double th = std::tanh(0.3);
    CHECK(t[0] == doctest::Approx(th));
    CHECK(t[1] == doctest::Approx(1 - th * th));
    CHECK(t[2] == doctest::Approx(-2 * th * (1 - th * th)));
    const auto s = scalar_derivatives(ScalarMap::softplus, -0.7, 3);
    const double sig = 1.0 / (1.0 + std::exp(0.7));
    CHECK(s[0] == doctest::Approx(std::log1p(std::exp(-0.7))));
    CHECK(s[1] == doctest::Approx(sig));
    CHECK(s[2] == doctest::Approx(sig * (1 - sig)));
    CHECK(s[3] == doctest::Approx(sig * (1 - sig) * (1 - 2 * sig)));
}

TEST_CASE("propagate on simple nets")
{
    Rng rng(4);
    Matrix a(3, 2);
    a << 1, 2, 3, 4, 5, 6;
    const Vector b{{0.5, -1.0, 2.0}};
    const NetParams lin = NetParams::affine(a, b);
    const Vector x{{0.2, -0.4}};
    const Vector h{{1.0, -3.0}};
    const std::vector<Vector> dirs{h};
    CHECK(dd(lin, x, dirs) == a * h);
    CHECK(dd(lin, x, {}) == a * x + b);
    const std::vector<Vector> two{h, h};
    CHECK(dd(lin, x, two).isZero(0.0));

    // f(x) = tanh(x): identity -> tanh -> identity.
    NetParams t;
    t.layer_dims = {1, 1, 1};
    t.weights = {Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
    t.biases = {Vector::Zero(1), Vector::Zero(1)};
    const std::vector<Vector> unit{Vector::Ones(1)};
    CHECK(dd(t, Vector::Zero(1), unit)(0) == 1.0);

    NetParams low = NetParams::random({2, 3, 1}, Activation::tanh, 1, 1.0, 1);
    const std::vector<Vector> second{h, h};
    CHECK_THROWS_AS(directional_derivative(low, x, second), OrderError);
    CHECK_THROWS_AS(NetParams::random({2, 3, 1}, Activation::tanh, 1, 1.0, 5).validate(), DomainError);
}

TEST_CASE("first order matches the explicit jacobian product")
{
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const NetParams net = NetParams::random({5, 7, 6, 3}, Activation::tanh, 100 + trial);
        const Vector x = oracle::normal_vector(5, rng);
        const Matrix jac = oracle::tanh_net_jacobian(net.weights, net.biases, x);
        for (int c = 0; c < 5; ++c) {
            const std::vector<Vector> e{Vector::Unit(5, c)};
            CHECK(oracle::rel_error(dd(net, x, e), jac.col(c), 1e-12) <= 1e-13);
        }
    }
}

TEST_CASE("orders 1-3 match finite differences on random 8-16-16-4 nets")
{
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const Activation act = trial % 2 == 0 ? Activation::tanh : Activation::softplus;
        const NetParams net = NetParams::random({8, 16, 16, 4}, act, 500 + trial);
        const Vector x = oracle::normal_vector(8, rng);
        const auto dirs = random_dirs(3, 8, rng);
        const oracle::Fn f = [&](const Vector& y) { return forward(net, y); };
        for (int i = 1; i <= 3; ++i) {
            const std::span<const Vector> d(dirs.data(), static_cast<std::size_t>(i));
            const Vector want = oracle::mixed_derivative(f, x, d, 1e-2);
            worst = std::max(worst, oracle::rel_error(directional_derivative(net, x, d), want, 1e-3));
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("symmetry and multilinearity")
{
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const NetParams net = NetParams::random({6, 10, 4}, Activation::tanh, 900 + trial);
        const Vector x = oracle::normal_vector(6, rng);
        auto dirs = random_dirs(3, 6, rng);
        const Vector base = dd(net, x, dirs);
        std::vector<int> perm{0, 1, 2};
        while (std::next_permutation(perm.begin(), perm.end())) {
            std::vector<Vector> p{dirs[perm[0]], dirs[perm[1]], dirs[perm[2]]};
            CHECK(oracle::rel_error(dd(net, x, p), base, 1e-12) <= 1e-13);
        }
        const Vector g = oracle::normal_vector(6, rng);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        const double alpha = u(rng);
        const double beta = u(rng);
        auto mixed = dirs;
        mixed[1] = alpha * dirs[1] + beta * g;
        auto with_g = dirs;
        with_g[1] = g;
        const Vector want = alpha * base + beta * dd(net, x, with_g);
        CHECK(oracle::rel_error(dd(net, x, mixed), want, 1e-12) <= 1e-12);
        auto doubled = dirs;
        doubled[2] *= 2.0;
        CHECK(oracle::rel_error(dd(net, x, doubled), 2.0 * base, 1e-12) <= 1e-13);
    }
}

TEST_CASE("zero direction contributes exactly nothing")
{
    const NetParams net = NetParams::random({4, 8, 2}, Activation::softplus, 3);
    Rng rng(1);
    auto dirs = random_dirs(3, 4, rng);
    dirs[1].setZero();
    CHECK(dd(net, oracle::normal_vector(4, rng), dirs).isZero(0.0));
}

TEST_CASE("finite-difference oracle")
{
    Matrix a(2, 3);
    a << 1, -2, 0.5, 3, 0, 1;
    const VectorFunction lin = [&](const Vector& y) { return Vector(a * y); };
    const Vector h{{0.3, 0.1, -1.0}};
    const std::vector<Vector> one{h};
    for (double step : {1e-1, 1.0, 10.0}) {
        CHECK(oracle::rel_error(fd_oracle(lin, Vector::Zero(3), one, step), a * h) <= 1e-12);
    }
    const VectorFunction sq = [](const Vector& y) { return Vector::Constant(1, y(0) * y(0)); };
    const std::vector<Vector> unit{Vector::Ones(1)};
    CHECK(std::abs(fd_oracle(sq, Vector::Ones(1), unit, 1e-4)(0) - 2.0) <= 1e-7);

    Matrix q(3, 3);
    q << 2, 1, 0, 1, 3, -1, 0, -1, 1;
    const VectorFunction form = [&](const Vector& y) { return Vector::Constant(1, y.dot(q * y)); };
    const Vector g{{1.0, 2.0, -0.5}};
    const std::vector<Vector> two{h, g};
    CHECK(std::abs(fd_oracle(form, Vector::Zero(3), two, 1e-3)(0) - 2.0 * h.dot(q * g)) <= 1e-6);
}

TEST_CASE("parameter flattening round trip")
{
    const NetParams net = NetParams::random({3, 5, 2}, Activation::tanh, 7);
    const Vector theta = net.flatten();
    CHECK(theta.size() == net.num_parameters());
    CHECK(theta.size() == 3 * 5 + 5 + 5 * 2 + 2);
    CHECK(theta(1) == net.weights[0](0, 1)); // row-major
    const NetParams back = net.with_parameters(theta);
    for (int l = 0; l < net.num_layers(); ++l) {
        CHECK(back.weights[l] == net.weights[l]);
        CHECK(back.biases[l] == net.biases[l]);
    }
    CHECK_THROWS_AS(net.with_parameters(Vector::Zero(3)), DimensionError);
}
