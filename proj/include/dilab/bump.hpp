#pragma once

// Smooth cutoffs: psi equal to 1 on [-1, 1] and 0 outside (-2, 2), and the rescaled radial bump
// b_eta(x) = psi(eta^2 |x|^2).

#include "dilab/jets.hpp"

namespace dilab {

/// chi(t) = exp(-1 / t^2) for t > 0, else 0.
double chi(double t);

/// chi^{(n)}(t) = P_n(1/t) exp(-1/t^2) with P_0 = 1, P_{n+1}(s) = -s^2 (P_n'(s) - 2 s P_n(s)).
double chi_deriv(double t, int order);

/// psi(y) = chi(2 - |y|) / (chi(|y| - 1) + chi(2 - |y|)).
double psi(double y);

/// psi^{(order)}(y) for order <= kDerivativeTableOrder; exactly zero outside 1 < |y| < 2.
double psi_deriv(double y, int order);

struct BumpSpec {
    double eta = 1.0;
    double r = 2.0;
    int max_order = kDefaultMaxOrder;

    /// Throws DomainError for eta <= 0, r < 1 or max_order outside [0, kMaxJetOrder].
    void validate() const;
};

/// psi(eta^2 |x|^2). Throws DomainError unless r = 2.
double bump_eval(const BumpSpec& spec, const Coeffs& x);

/// D^i b_eta(x)(h^1..h^i): the jet of g(x) = eta^2 |x|^2 (quadratic, so its third-order
/// coefficients vanish) composed with the derivative table of psi.
double bump_derivative(const BumpSpec& spec, const Coeffs& x, std::span<const Coeffs> dirs);

/// C_i = sup_{rho, c} |d^i/dt^i psi(rho^2 + 2 t rho c + t^2)| at t = 0, over rho in [1, sqrt 2]
/// and c = cos(angle) in [-1, 1]: the norm of D^i b_1 (radial function, and symmetric forms on a
/// Hilbert space attain their norm on the diagonal). Dense grid followed by a local refinement.
double calibrate_bump_constant(int order, int n_rho = 801, int n_cos = 201);

} // namespace dilab
