#pragma once

// Reference computations used by the tests. None of them calls into the code under test
// beyond plain evaluation, so disagreements point at the implementation, not the oracle.

#include "dilab/common.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using dilab::Matrix;
using dilab::Vector;
using Fn = std::function<Vector(const Vector&)>;

/// Mixed directional derivative by nested central differences along dirs (last direction outermost).
inline Vector nested_difference(const Fn& f, const Vector& x, std::span<const Vector> dirs, double step)
{
    if (dirs.empty()) {
        return f(x);
    }
    const Vector& h = dirs.back();
    const auto rest = dirs.first(dirs.size() - 1);
    return (nested_difference(f, x + step * h, rest, step) - nested_difference(f, x - step * h, rest, step)) /
           (2.0 * step);
}

/// Richardson extrapolation of nested_difference: error O(step^4).
inline Vector mixed_derivative(const Fn& f, const Vector& x, std::span<const Vector> dirs, double step)
{
    const Vector coarse = nested_difference(f, x, dirs, step);
    const Vector fine = nested_difference(f, x, dirs, step / 2.0);
    return (4.0 * fine - coarse) / 3.0;
}

/// Relative distance |a - b| / max(|b|, floor).
inline double rel_error(const Vector& a, const Vector& b, double floor = 1e-300)
{
    return (a - b).norm() / std::max(b.norm(), floor);
}

/// sqrt(sum_{j = n+1}^{dim} j^-4), summed from the small end in long double.
inline double tail_sum_j4(int n, int dim)
{
    long double s = 0.0L;
    for (int j = dim; j > n; --j) {
        const long double jj = j;
        s += 1.0L / (jj * jj * jj * jj);
    }
    return static_cast<double>(std::sqrt(s));
}

/// sum_{j=1}^{dim} j^-s.
inline double power_sum(int dim, double s)
{
    long double acc = 0.0L;
    for (int j = dim; j >= 1; --j) {
        acc += std::pow(static_cast<long double>(j), -static_cast<long double>(s));
    }
    return static_cast<double>(acc);
}

/// ||L diag(sqrt(lambda))||_F by explicit double loop.
inline double hs_norm(const Matrix& l, const Vector& lambda)
{
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        for (Eigen::Index j = 0; j < l.cols(); ++j) {
            s += static_cast<long double>(l(i, j)) * l(i, j) * lambda(j);
        }
    }
    return static_cast<double>(std::sqrt(s));
}

/// Jacobian of a tanh/identity-output network x -> W_L s(... s(W_1 x + b_1) ...) + b_L by the
/// explicit product W_L diag(s'(z_{L-1})) W_{L-1} ... diag(s'(z_1)) W_1.
inline Matrix tanh_net_jacobian(const std::vector<Matrix>& w, const std::vector<Vector>& b, const Vector& x)
{
    Vector a = x;
    Matrix jac = Matrix::Identity(x.size(), x.size());
    for (std::size_t l = 0; l < w.size(); ++l) {
        const Vector z = w[l] * a + b[l];
        jac = w[l] * jac;
        if (l + 1 < w.size()) {
            Vector d(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                const double t = std::tanh(z(i));
                d(i) = 1.0 - t * t;
            }
            jac = d.asDiagonal() * jac;
            a = z.array().tanh().matrix();
        } else {
            a = z;
        }
    }
    return jac;
}

/// Standard normal vector with the given per-coordinate scales.
inline Vector normal_vector(const Vector& scales, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    Vector v(scales.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = scales(i) * n(rng);
    }
    return v;
}

inline Vector normal_vector(int dim, std::mt19937_64& rng) { return normal_vector(Vector::Ones(dim), rng); }

} // namespace oracle
