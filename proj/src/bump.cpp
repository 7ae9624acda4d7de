#include "dilab/bump.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dilab {
namespace {

constexpr int kSeriesTerms = kDerivativeTableOrder + 1;
using Series = std::array<double, kSeriesTerms>;

// Coefficients of P_n, lowest degree first; degree <= 3n.
std::array<double, 3 * kDerivativeTableOrder + 1> chi_polynomial(int order)
{
    std::array<double, 3 * kDerivativeTableOrder + 1> p{};
    p[0] = 1.0;
    for (int n = 0; n < order; ++n) {
        std::array<double, 3 * kDerivativeTableOrder + 1> next{};
        for (std::size_t d = 0; d + 3 < p.size(); ++d) {
            // -s^2 P' contributes -d p_d s^{d+1}; +2 s^3 P contributes 2 p_d s^{d+3}.
            if (d >= 1) {
                next[d + 1] -= static_cast<double>(d) * p[d];
            }
            next[d + 3] += 2.0 * p[d];
        }
        p = next;
    }
    return p;
}

/// Taylor coefficients (f^{(m)}(y0) / m!) of psi around y0 in (1, 2).
Series psi_series(double y0, int order)
{
    Series num{};
    Series den{};
    double factorial = 1.0;
    for (int m = 0; m <= order; ++m) {
        if (m > 0) {
            factorial *= m;
        }
        const double a = chi_deriv(2.0 - y0, m) * ((m % 2) ? -1.0 : 1.0) / factorial;
        const double b = chi_deriv(y0 - 1.0, m) / factorial;
        num[static_cast<std::size_t>(m)] = a;
        den[static_cast<std::size_t>(m)] = a + b;
    }
    Series q{};
    for (int m = 0; m <= order; ++m) {
        double v = num[static_cast<std::size_t>(m)];
        for (int j = 1; j <= m; ++j) {
            v -= den[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(m - j)];
        }
        q[static_cast<std::size_t>(m)] = v / den[0];
    }
    return q;
}

void require_order(int order)
{
    if (order < 0 || order > kDerivativeTableOrder) {
        throw OrderError("psi derivatives are tabulated up to order " + std::to_string(kDerivativeTableOrder));
    }
}

/// d^i/dt^i psi(rho^2 + 2 t rho c + t^2) at t = 0 via univariate Taylor composition.
double radial_directional(double rho, double c, int order)
{
    const double y0 = rho * rho;
    Series g{};
    g[1] = 2.0 * rho * c;
    g[2] = 1.0;
    DerivativeTable table{};
    for (int t = 0; t <= order; ++t) {
        table[static_cast<std::size_t>(t)] = psi_deriv(y0, t);
    }
    // Horner in the increment g - g0, truncated at degree `order`.
    Series acc{};
    double factorial = 1.0;
    for (int t = 2; t <= order; ++t) {
        factorial *= t;
    }
    acc[0] = table[static_cast<std::size_t>(order)] / factorial;
    for (int t = order - 1; t >= 0; --t) {
        Series next{};
        for (int a = 0; a <= order; ++a) {
            for (int b = 1; a + b <= order; ++b) {
                next[static_cast<std::size_t>(a + b)] += acc[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(b)];
            }
        }
        factorial /= std::max(t + 1, 1);
        next[0] += table[static_cast<std::size_t>(t)] / factorial;
        acc = next;
    }
    double full_factorial = 1.0;
    for (int t = 2; t <= order; ++t) {
        full_factorial *= t;
    }
    return acc[static_cast<std::size_t>(order)] * full_factorial;
}

} // namespace

double chi(double t) { return t > 0.0 ? std::exp(-1.0 / (t * t)) : 0.0; }

double chi_deriv(double t, int order)
{
    require_order(order);
    const double e = chi(t);
    if (e == 0.0) {
        return 0.0;
    }
    const auto poly = chi_polynomial(order);
    const double s = 1.0 / t;
    double value = 0.0;
    for (std::size_t d = poly.size(); d-- > 0;) {
        value = value * s + poly[d];
    }
    return value * e;
}

double psi(double y) { return psi_deriv(y, 0); }

double psi_deriv(double y, int order)
{
    require_order(order);
    const double a = std::abs(y);
    if (a <= 1.0) {
        return order == 0 ? 1.0 : 0.0;
    }
    if (a >= 2.0) {
        return 0.0;
    }
    const Series q = psi_series(a, order);
    double factorial = 1.0;
    for (int t = 2; t <= order; ++t) {
        factorial *= t;
    }
    const double value = q[static_cast<std::size_t>(order)] * factorial;
    // psi is even: psi^{(n)}(-y) = (-1)^n psi^{(n)}(y).
    return (y < 0.0 && order % 2 == 1) ? -value : value;
}

void BumpSpec::validate() const
{
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw DomainError("BumpSpec: eta must be positive");
    }
    if (!(r >= 1.0)) {
        throw DomainError("BumpSpec: r must be >= 1");
    }
    if (max_order < 0 || max_order > kMaxJetOrder) {
        throw DomainError("BumpSpec: max_order out of range");
    }
}

namespace {
void require_hilbert(const BumpSpec& spec)
{
    spec.validate();
    if (spec.r != 2.0) {
        throw DomainError("bump: only r = 2 has closed-form derivatives");
    }
}
} // namespace

double bump_eval(const BumpSpec& spec, const Coeffs& x)
{
    require_hilbert(spec);
    return psi(spec.eta * spec.eta * x.squaredNorm());
}

double bump_derivative(const BumpSpec& spec, const Coeffs& x, std::span<const Coeffs> dirs)
{
    require_hilbert(spec);
    const int order = static_cast<int>(dirs.size());
    if (order > spec.max_order) {
        throw OrderError("bump_derivative: order exceeds max_order");
    }
    for (const auto& h : dirs) {
        require_dim(h.size(), x.size(), "bump_derivative");
    }
    if (order == 0) {
        return bump_eval(spec, x);
    }
    const double e2 = spec.eta * spec.eta;
    const std::size_t n_terms = std::size_t{1} << order;
    std::vector<double> g(n_terms, 0.0);
    g[0] = e2 * x.squaredNorm();
    for (int j = 0; j < order; ++j) {
        g[std::size_t{1} << j] = 2.0 * e2 * x.dot(dirs[static_cast<std::size_t>(j)]);
        for (int l = j + 1; l < order; ++l) {
            g[(std::size_t{1} << j) | (std::size_t{1} << l)] =
                2.0 * e2 * dirs[static_cast<std::size_t>(j)].dot(dirs[static_cast<std::size_t>(l)]);
        }
    }
    DerivativeTable table{};
    for (int t = 0; t <= order; ++t) {
        table[static_cast<std::size_t>(t)] = psi_deriv(g[0], t);
    }
    std::vector<double> out(n_terms);
    jet_algebra::compose(std::span<const double>(table.data(), static_cast<std::size_t>(order) + 1), g, out);
    return out.back();
}

double calibrate_bump_constant(int order, int n_rho, int n_cos)
{
    if (order < 0 || order > kMaxJetOrder) {
        throw OrderError("calibrate_bump_constant: order out of range");
    }
    if (n_rho < 2 || n_cos < 2) {
        throw DomainError("calibrate_bump_constant: grid too small");
    }
    const double lo = 1.0;
    const double hi = std::sqrt(2.0);
    const double d_rho = (hi - lo) / (n_rho - 1);
    const double d_cos = 2.0 / (n_cos - 1);
    double best = 0.0;
    double best_rho = lo;
    double best_c = 1.0;
    for (int a = 0; a < n_rho; ++a) {
        const double rho = lo + a * d_rho;
        for (int b = 0; b < n_cos; ++b) {
            const double c = -1.0 + b * d_cos;
            const double v = std::abs(radial_directional(rho, c, order));
            if (v > best) {
                best = v;
                best_rho = rho;
                best_c = c;
            }
        }
    }
    // Refine on a fine grid over the neighbouring cells of the coarse maximizer.
    constexpr int kFine = 101;
    for (int a = 0; a < kFine; ++a) {
        const double rho = std::clamp(best_rho + (2.0 * a / (kFine - 1) - 1.0) * d_rho, lo, hi);
        for (int b = 0; b < kFine; ++b) {
            const double c = std::clamp(best_c + (2.0 * b / (kFine - 1) - 1.0) * d_cos, -1.0, 1.0);
            best = std::max(best, std::abs(radial_directional(rho, c, order)));
        }
    }
    return best;
}

} // namespace dilab
