#pragma once

// Benchmark operators F: X -> Y with closed-form derivatives, and their cylindrical
// approximations F_{d,m} = P_m o F o P_d.

#include "dilab/eda.hpp"

#include <functional>
#include <optional>
#include <string>

namespace dilab {

/// ||D^i F(x)|| <= constants[i] * (1 + |x|^exponents[i]); the exponent is q/p of the growth class.
struct GrowthCertificate {
    std::vector<double> exponents;
    std::vector<double> constants;

    bool empty() const noexcept { return constants.empty(); }
};

class TargetOperator {
public:
    using EvalFn = std::function<Coeffs(const Coeffs&)>;
    /// Called with 1 <= dirs.size() <= max_order.
    using DerivFn = std::function<Coeffs(const Coeffs&, std::span<const Coeffs>)>;

    struct Traits {
        std::string name;
        int input_dim = 0;
        int output_dim = 0;
        std::optional<int> max_order; ///< nullopt: every order available
        GrowthCertificate growth;
        bool affine = false; ///< DF is independent of x and higher derivatives vanish
    };

    TargetOperator(Traits traits, EvalFn eval, DerivFn deriv);

    Coeffs eval(const Coeffs& x) const;
    /// D^i F(x)(h^1..h^i), i = dirs.size(); i = 0 is eval. Throws OrderError past max_order.
    Coeffs deriv(const Coeffs& x, std::span<const Coeffs> dirs) const;

    bool supports_order(int order) const noexcept { return !traits_.max_order || order <= *traits_.max_order; }
    const Traits& traits() const noexcept { return traits_; }
    const std::string& name() const noexcept { return traits_.name; }
    int input_dim() const noexcept { return traits_.input_dim; }
    int output_dim() const noexcept { return traits_.output_dim; }
    bool affine() const noexcept { return traits_.affine; }

private:
    Traits traits_;
    EvalFn eval_;
    DerivFn deriv_;
};

/// F(x) = x.
TargetOperator identity_target(int ambient_dim);

/// F(x) = 0.
TargetOperator zero_target(int ambient_dim);

/// (Lx)_i = w_i x_i.
TargetOperator diagonal_target(Vector weights);

/// One term of B(x, y) = sum_j beta_j <x, w_j> <y, v_j> e_j; term j writes to coordinate j.
struct BilinearTerm {
    double beta = 0.0;
    Vector w;
    Vector v;
};

/// F(x) = Lx + B(x, x) with diagonal L. D^3 F = 0.
TargetOperator quadratic_target(Vector weights, std::vector<BilinearTerm> terms);

/// Quadratic target with w_i = 1/i, beta_j = 1/j and unit vectors w_j, v_j whose coefficients
/// decay like 1/i, drawn from the seed.
TargetOperator benchmark_quadratic(int ambient_dim, int n_terms, std::uint64_t seed);

/// F = A^+ o phi o A, A the synthesis onto a midpoint grid of quad_points nodes of (0,1) and
/// A^+ its least-squares inverse. Throws NumericalError when cond(A) > 1e8.
TargetOperator nemytskii_target(ScalarMap phi, int quad_points, int ambient_dim);

/// F_{d,m}(x) = P_m F(P_d x), D^i F_{d,m}(x)(h..) = P_m D^i F(P_d x)(P_d h..).
TargetOperator cylindrical_approximation(const TargetOperator& target, int d, int m);

/// View of an encoder-decoder model as an operator.
TargetOperator as_target(const EdaModel& model);

/// DF(x) assembled on the basis directions.
Matrix assemble_jacobian(const TargetOperator& op, const Coeffs& x);

/// D^2 F(x) as output-component slices: slices[r](a, b) = <D^2 F(x)(e_a, e_b), e_r>.
std::vector<Matrix> assemble_hessian(const TargetOperator& op, const Coeffs& x);

} // namespace dilab
