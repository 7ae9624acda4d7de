#include "dilab/jets.hpp"

#include "dilab/rng.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <string>

namespace dilab {
namespace {

std::atomic<double> g_derivative_fault{0.0};

constexpr int kMaxTerms = 1 << kMaxJetOrder;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

} // namespace

namespace jets_testing {
void set_derivative_fault(double relative) { g_derivative_fault.store(relative); }
} // namespace jets_testing

ScalarMap to_scalar_map(Activation activation) noexcept
{
    return activation == Activation::tanh ? ScalarMap::tanh : ScalarMap::softplus;
}

DerivativeTable scalar_derivatives(ScalarMap f, double x, int order)
{
    if (order < 0 || order > kDerivativeTableOrder) {
        throw OrderError("scalar_derivatives: order " + std::to_string(order) + " not tabulated");
    }
    DerivativeTable d{};
    switch (f) {
    case ScalarMap::identity:
        d[0] = x;
        d[1] = 1.0;
        return d;
    case ScalarMap::tanh: {
        const double t = std::tanh(x);
        const double t2 = t * t;
        const double u = 1.0 - t2;
        d[0] = t;
        d[1] = u;
        d[2] = -2.0 * t * u;
        d[3] = u * (6.0 * t2 - 2.0);
        d[4] = t * u * (16.0 - 24.0 * t2);
        d[5] = u * (16.0 - 120.0 * t2 + 120.0 * t2 * t2);
        break;
    }
    case ScalarMap::softplus: {
        const double s = 1.0 / (1.0 + std::exp(-x));
        const double v = s * (1.0 - s);
        d[0] = softplus(x);
        d[1] = s;
        d[2] = v;
        d[3] = v * (1.0 - 2.0 * s);
        d[4] = v * (1.0 - 6.0 * s + 6.0 * s * s);
        d[5] = v * (1.0 - 14.0 * s + 36.0 * s * s - 24.0 * s * s * s);
        break;
    }
    }
    if (const double fault = g_derivative_fault.load(); fault != 0.0) {
        for (int t = 1; t <= kDerivativeTableOrder; ++t) {
            d[static_cast<std::size_t>(t)] *= 1.0 + fault;
        }
    }
    for (int t = order + 1; t <= kDerivativeTableOrder; ++t) {
        d[static_cast<std::size_t>(t)] = 0.0;
    }
    return d;
}

MultiJet::MultiJet(int order, int width) : order_(order)
{
    if (order < 0 || order > kMaxJetOrder) {
        throw OrderError("MultiJet: order must lie in [0, " + std::to_string(kMaxJetOrder) + "]");
    }
    if (width < 1) {
        throw DimensionError("MultiJet: width must be >= 1");
    }
    coeffs_ = Matrix::Zero(width, Eigen::Index{1} << order);
}

MultiJet lift(const Vector& x, std::span<const Vector> dirs)
{
    MultiJet jet(static_cast<int>(dirs.size()), static_cast<int>(x.size()));
    jet.coeff(0) = x;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
        require_dim(dirs[j].size(), x.size(), "lift");
        jet.coeff(1u << j) = dirs[j];
    }
    return jet;
}

namespace jet_algebra {

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out)
{
    const std::size_t n = a.size();
    for (unsigned s = 0; s < n; ++s) {
        double acc = 0.0;
        for (unsigned t = s;; t = (t - 1) & s) {
            acc += a[t] * b[s ^ t];
            if (t == 0) {
                break;
            }
        }
        out[s] = acc;
    }
}

void compose(std::span<const double> derivs, std::span<const double> z, std::span<double> out)
{
    const std::size_t n = z.size();
    int order = 0;
    while ((std::size_t{1} << order) < n) {
        ++order;
    }
    std::array<double, kMaxTerms> delta{};
    std::array<double, kMaxTerms> acc{};
    std::array<double, kMaxTerms> tmp{};
    for (std::size_t s = 1; s < n; ++s) {
        delta[s] = z[s];
    }
    // Horner: c_order + delta (c_{order-1} + delta (...)), c_t = f^{(t)} / t!.
    double factorial = 1.0;
    for (int t = 2; t <= order; ++t) {
        factorial *= t;
    }
    acc[0] = derivs[static_cast<std::size_t>(order)] / factorial;
    for (int t = order - 1; t >= 0; --t) {
        multiply(std::span(acc.data(), n), std::span(delta.data(), n), std::span(tmp.data(), n));
        factorial /= std::max(t + 1, 1);
        tmp[0] += derivs[static_cast<std::size_t>(t)] / factorial;
        acc = tmp;
    }
    for (std::size_t s = 0; s < n; ++s) {
        out[s] = acc[s];
    }
}

} // namespace jet_algebra

MultiJet apply_pointwise(ScalarMap f, const MultiJet& jet)
{
    MultiJet out(jet.order(), jet.width());
    const int n = jet.num_terms();
    std::array<double, kMaxTerms> in{};
    std::array<double, kMaxTerms> res{};
    for (int r = 0; r < jet.width(); ++r) {
        for (int s = 0; s < n; ++s) {
            in[static_cast<std::size_t>(s)] = jet.coeffs()(r, s);
        }
        const DerivativeTable d = scalar_derivatives(f, in[0], jet.order());
        jet_algebra::compose(std::span(d.data(), d.size()), std::span(in.data(), static_cast<std::size_t>(n)),
                             std::span(res.data(), static_cast<std::size_t>(n)));
        for (int s = 0; s < n; ++s) {
            out.coeffs()(r, s) = res[static_cast<std::size_t>(s)];
        }
    }
    return out;
}

void NetParams::validate() const
{
    if (layer_dims.size() < 2) {
        throw DomainError("NetParams: need at least input and output dimensions");
    }
    if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
        throw DomainError("NetParams: layer count does not match layer_dims");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (layer_dims[l] < 1 || layer_dims[l + 1] < 1) {
            throw DomainError("NetParams: layer dimensions must be positive");
        }
        if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
            biases[l].size() != layer_dims[l + 1]) {
            throw DimensionError("NetParams: layer " + std::to_string(l) + " has incompatible shapes");
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw DomainError("NetParams: parameters must be finite");
        }
    }
    if (k_max < 0 || k_max > kMaxJetOrder) {
        throw DomainError("NetParams: k_max must lie in [0, " + std::to_string(kMaxJetOrder) + "]");
    }
}

Eigen::Index NetParams::num_parameters() const
{
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += weights[l].size() + biases[l].size();
    }
    return n;
}

Vector NetParams::flatten() const
{
    Vector theta(num_parameters());
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto& w = weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                theta(pos++) = w(i, j);
            }
        }
        theta.segment(pos, biases[l].size()) = biases[l];
        pos += biases[l].size();
    }
    return theta;
}

NetParams NetParams::with_parameters(const Vector& theta) const
{
    require_dim(theta.size(), num_parameters(), "NetParams::with_parameters");
    NetParams out = *this;
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < out.weights.size(); ++l) {
        auto& w = out.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = theta(pos++);
            }
        }
        out.biases[l] = theta.segment(pos, out.biases[l].size());
        pos += out.biases[l].size();
    }
    return out;
}

NetParams NetParams::random(std::vector<int> dims, Activation activation, std::uint64_t seed, double gain, int k_max)
{
    NetParams net;
    net.layer_dims = std::move(dims);
    net.activation = activation;
    net.k_max = k_max;
    if (net.layer_dims.size() < 2) {
        throw DomainError("NetParams::random: need at least two layer dimensions");
    }
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
        const int fan_in = net.layer_dims[l];
        const int fan_out = net.layer_dims[l + 1];
        if (fan_in < 1 || fan_out < 1) {
            throw DomainError("NetParams::random: layer dimensions must be positive");
        }
        const double scale = gain / std::sqrt(static_cast<double>(fan_in));
        Matrix w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = scale * normal(rng);
            }
        }
        Vector b(fan_out);
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            b(i) = 0.1 * gain * normal(rng);
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    net.validate();
    return net;
}

NetParams NetParams::affine(Matrix a, Vector b, int k_max)
{
    NetParams net;
    net.layer_dims = {static_cast<int>(a.cols()), static_cast<int>(a.rows())};
    net.weights.push_back(std::move(a));
    net.biases.push_back(std::move(b));
    net.k_max = k_max;
    net.validate();
    return net;
}

Vector forward(const NetParams& net, const Vector& x)
{
    require_dim(x.size(), net.input_dim(), "forward");
    Vector cur = x;
    const ScalarMap act = to_scalar_map(net.activation);
    for (int l = 0; l < net.num_layers(); ++l) {
        Vector z = net.weights[static_cast<std::size_t>(l)] * cur + net.biases[static_cast<std::size_t>(l)];
        if (l + 1 < net.num_layers()) {
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                z(i) = scalar_derivatives(act, z(i), 0)[0];
            }
        }
        cur = std::move(z);
    }
    return cur;
}

MultiJet propagate(const NetParams& net, const MultiJet& jet)
{
    require_dim(jet.width(), net.input_dim(), "propagate");
    if (jet.order() > net.k_max) {
        throw OrderError("propagate: jet order " + std::to_string(jet.order()) + " exceeds network k_max " +
                         std::to_string(net.k_max));
    }
    const ScalarMap act = to_scalar_map(net.activation);
    MultiJet cur = jet;
    for (int l = 0; l < net.num_layers(); ++l) {
        const auto idx = static_cast<std::size_t>(l);
        MultiJet next(jet.order(), static_cast<int>(net.weights[idx].rows()));
        next.coeffs().noalias() = net.weights[idx] * cur.coeffs();
        next.coeff(0) += net.biases[idx];
        cur = (l + 1 < net.num_layers()) ? apply_pointwise(act, next) : std::move(next);
    }
    return cur;
}

Vector directional_derivative(const NetParams& net, const Vector& x, std::span<const Vector> dirs)
{
    return propagate(net, lift(x, dirs)).top();
}

Vector fd_oracle(const VectorFunction& f, const Vector& x, std::span<const Vector> dirs, double step)
{
    if (!(step > 0.0)) {
        throw DomainError("fd_oracle: step must be positive");
    }
    if (dirs.size() > 3) {
        throw OrderError("fd_oracle: supports at most three directions");
    }
    const int order = static_cast<int>(dirs.size());
    Vector acc;
    for (unsigned signs = 0; signs < (1u << order); ++signs) {
        Vector point = x;
        double sign = 1.0;
        for (int j = 0; j < order; ++j) {
            const bool negative = (signs >> j) & 1u;
            point += (negative ? -step : step) * dirs[static_cast<std::size_t>(j)];
            if (negative) {
                sign = -sign;
            }
        }
        Vector value = f(point);
        if (acc.size() == 0) {
            acc = Vector::Zero(value.size());
        }
        acc += sign * value;
    }
    return acc / std::pow(2.0 * step, order);
}

} // namespace dilab
