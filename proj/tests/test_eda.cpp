#include "dilab/eda.hpp"
#include "dilab/metrics.hpp"
#include "dilab/rng.hpp"
#include "dilab/targets.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dilab;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng)
{
    std::normal_distribution<double> n;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = n(rng);
    }
    return m;
}

Architecture arch(std::vector<int> hidden, std::uint64_t seed)
{
    Architecture a;
    a.hidden = std::move(hidden);
    a.seed = seed;
    return a;
}

} // namespace

TEST_CASE("projection model is the truncation")
{
    const EdaModel m = projection_model(32, 5);
    Rng rng(1);
    const Coeffs x = oracle::normal_vector(32, rng);
    CHECK(eda_eval(m, x) == truncate(x, 5));
    const std::vector<Coeffs> dirs{x};
    CHECK(eda_derivative(m, oracle::normal_vector(32, rng), dirs) == truncate(x, 5));
}

TEST_CASE("constant network gives a constant model")
{
    const Vector c{{1.5, -2.0, 0.25}};
    const EdaModel m(Encoder::projection(4, 16), NetParams::affine(Matrix::Zero(3, 4), c), Decoder::projection(3, 16));
    Rng rng(2);
    const Coeffs want = decode(m.decoder(), c);
    for (int t = 0; t < 5; ++t) {
        CHECK(eda_eval(m, oracle::normal_vector(16, rng)) == want);
    }
}

TEST_CASE("evaluation matches the composition of the three maps")
{
    Rng rng(3);
    const int d = 24;
    const Matrix e = random_matrix(6, d, rng);
    const Matrix dec = random_matrix(d, 4, rng);
    const EdaModel m = son_new(e, dec, arch({9}, 5));
    for (int t = 0; t < 10; ++t) {
        const Coeffs x = oracle::normal_vector(d, rng);
        // Independent forward pass of the two-layer network.
        const NetParams& net = m.net();
        const Vector hidden = (net.weights[0] * (e * x) + net.biases[0]).array().tanh().matrix();
        const Vector want = dec * (net.weights[1] * hidden + net.biases[1]);
        CHECK(oracle::rel_error(eda_eval(m, x), want, 1e-12) <= 1e-13);
    }
}

TEST_CASE("derivatives of linear and affine models")
{
    Rng rng(4);
    const int d = 20;
    const Matrix a = random_matrix(3, 5, rng);
    const EdaModel m(Encoder::projection(5, d), NetParams::affine(a, Vector::Zero(3)), Decoder::projection(3, d));
    const Matrix full = m.decoder().elements() * a * m.encoder().functionals();
    const Coeffs x = oracle::normal_vector(d, rng);
    const Coeffs h = oracle::normal_vector(d, rng);
    const std::vector<Coeffs> one{h};
    CHECK(oracle::rel_error(eda_derivative(m, x, one), full * h) <= 1e-14);
    const std::vector<Coeffs> two{h, oracle::normal_vector(d, rng)};
    CHECK(eda_derivative(m, x, two).isZero(0.0));

    Architecture low = arch({4}, 1);
    low.k_max = 1;
    const EdaModel m1 = hgno_new(d, 3, 3, low);
    CHECK_THROWS_AS(eda_derivative(m1, x, two), OrderError);
}

TEST_CASE("chain rule against ambient finite differences")
{
    Rng rng(5);
    const int d = 32;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const EdaModel m = hgno_new(d, 6, 5, arch({12, 12}, 40 + t));
        const Coeffs x = oracle::normal_vector(d, rng);
        const std::vector<Coeffs> dirs{oracle::normal_vector(d, rng), oracle::normal_vector(d, rng)};
        const oracle::Fn f = [&](const Vector& y) { return eda_eval(m, y); };
        for (int i = 1; i <= 2; ++i) {
            const std::span<const Coeffs> dd(dirs.data(), static_cast<std::size_t>(i));
            worst = std::max(worst, oracle::rel_error(eda_derivative(m, x, dd), oracle::mixed_derivative(f, x, dd, 1e-2),
                                                      1e-3));
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("jacobian rank is bounded by the latent dimensions")
{
    Rng rng(6);
    const int d = 40;
    const std::vector<std::pair<int, int>> shapes{{3, 7}, {8, 2}, {5, 5}};
    for (const auto& [n_in, n_out] : shapes) {
        const Matrix e = random_matrix(n_in, d, rng);
        const Matrix dec = random_matrix(d, n_out, rng);
        const EdaModel m = son_new(e, dec, arch({10}, 7));
        const Matrix j = eda_jacobian(m, oracle::normal_vector(d, rng));
        CHECK(j.rows() == d);
        CHECK(j.cols() == d);
        Eigen::JacobiSVD<Matrix> svd(j);
        const Vector& s = svd.singularValues();
        const int bound = std::min(n_in, n_out);
        CHECK(s(bound - 1) > 1e-10 * s(0));
        CHECK(s(bound) <= 1e-10 * s(0));
    }
}

TEST_CASE("model families")
{
    const EdaModel h = hgno_new(64, 4, 3, arch({8}, 1));
    CHECK(h.encoder().tag() == EncoderTag::projection);
    CHECK(h.encoder().functionals() == Encoder::projection(4, 64).functionals());
    CHECK(h.net().layer_dims == std::vector<int>{4, 8, 3});

    const std::vector<double> in{0.25, 0.75};
    const std::vector<double> out{0.0, 0.5, 1.0};
    const EdaModel don = deeponet_new(in, out, 0.6, 64, arch({8}, 2));
    CHECK(don.encoder().tag() == EncoderTag::deeponet);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 64; ++j) {
            CHECK(don.encoder().functionals()(i, j) == doctest::Approx(sine_basis(j + 1, in[i])).epsilon(1e-14));
        }
    }
    CHECK(don.decoder().rank() == 3);

    Rng rng(9);
    std::vector<Coeffs> samples;
    for (int k = 0; k < 12; ++k) {
        Coeffs x = Coeffs::Zero(16);
        x.head(2) = oracle::normal_vector(2, rng);
        samples.push_back(x);
    }
    const EdaModel pca = pcanet_new(samples, 2, samples, 2, arch({6}, 3));
    CHECK(pca.encoder().tag() == EncoderTag::pca);
    const Matrix& rows = pca.encoder().functionals();
    CHECK(rows.rightCols(14).norm() <= 1e-12);
    CHECK((rows * rows.transpose() - Matrix::Identity(2, 2)).norm() <= 1e-10);

    CHECK_THROWS_AS(EdaModel(Encoder::projection(4, 16), NetParams::random({3, 2}, Activation::tanh, 1),
                             Decoder::projection(2, 16)),
                    DimensionError);
}

TEST_CASE("cylindrical norm inequality")
{
    // F = D f E with projection pairs; the pushforward of a diagonal Gaussian under P_n is the
    // Gaussian of the leading eigenvalues, sampled with identical streams.
    const int d = 32;
    const int n = 6;
    const EdaModel m = hgno_new(d, n, 4, arch({10}, 11));
    const GaussianSpec gamma = GaussianSpec::power_law(d, 2.0);
    GaussianSpec pushed;
    pushed.eigenvalues = gamma.eigenvalues.head(n);
    const EdaModel latent(Encoder::projection(n, n), m.net(), Decoder::projection(4, 4));
    const auto mu = MeasureSampler::gaussian_product(gamma, 1);
    const auto nu = MeasureSampler::gaussian_product(pushed, 1);
    const NormEstimate full = opnorm_sobolev_error(as_target(m), zero_target(d), mu, 1, 2.0, 400, 5);
    const EdaModel zero(Encoder::projection(n, n), NetParams::affine(Matrix::Zero(4, n), Vector::Zero(4)),
                        Decoder::projection(4, 4));
    const NormEstimate reduced = opnorm_sobolev_error(as_target(latent), as_target(zero), nu, 1, 2.0, 400, 5);
    const double c = operator_norm(m.decoder().elements()) * std::max(1.0, operator_norm(m.encoder().functionals()));
    CHECK(c == doctest::Approx(1.0));
    CHECK(full.value <= c * reduced.value + 3.0 * joint_std_error(full, reduced));
    CHECK(full.value == doctest::Approx(reduced.value).epsilon(1e-10));
}
