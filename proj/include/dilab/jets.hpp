#pragma once

// Exact mixed directional derivatives D^i f(x)(h^1, ..., h^i) of smooth finite-dimensional
// maps, computed in the truncated algebra R[e_1, ..., e_i] / (e_j^2). A jet of order i
// stores one coefficient vector per subset S of {1..i}, indexed by the bitmask of S; the
// coefficient of prod_{j in S} e_j is the mixed derivative along the directions in S.

#include "dilab/common.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dilab {

/// Largest k_max a network may declare.
inline constexpr int kMaxJetOrder = 4;
inline constexpr int kDefaultMaxOrder = 3;
/// Closed-form scalar derivatives are tabulated one order past kMaxJetOrder for reverse sweeps.
inline constexpr int kDerivativeTableOrder = kMaxJetOrder + 1;

enum class Activation { tanh, softplus };
enum class ScalarMap { identity, tanh, softplus };

ScalarMap to_scalar_map(Activation activation) noexcept;

using DerivativeTable = std::array<double, kDerivativeTableOrder + 1>;

/// f^{(t)}(x) for t = 0..order.
DerivativeTable scalar_derivatives(ScalarMap f, double x, int order);

namespace jets_testing {
/// Multiplies every tabulated derivative of order >= 1 by (1 + relative). 0 restores exact tables.
void set_derivative_fault(double relative);
} // namespace jets_testing

class MultiJet {
public:
    MultiJet(int order, int width);

    int order() const noexcept { return order_; }
    int width() const noexcept { return static_cast<int>(coeffs_.rows()); }
    int num_terms() const noexcept { return static_cast<int>(coeffs_.cols()); }

    /// width x 2^order; column S holds the coefficient of prod_{j in S} e_j.
    Matrix& coeffs() noexcept { return coeffs_; }
    const Matrix& coeffs() const noexcept { return coeffs_; }

    auto coeff(unsigned mask) { return coeffs_.col(mask); }
    auto coeff(unsigned mask) const { return coeffs_.col(mask); }

    Vector primal() const { return coeffs_.col(0); }
    /// Coefficient of e_1 ... e_i.
    Vector top() const { return coeffs_.col(num_terms() - 1); }

private:
    int order_;
    Matrix coeffs_;
};

/// coeffs[{}] = x, coeffs[{j}] = dirs_j, all higher subsets zero.
MultiJet lift(const Vector& x, std::span<const Vector> dirs);

namespace jet_algebra {
/// Square-free product: out[S] = sum_{T subset S} a[T] b[S \ T]. All spans have 2^order entries.
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// f(z) = sum_t f^{(t)}(z[{}]) / t! (z - z[{}])^t, with derivs[t] = f^{(t)}(z[{}]).
void compose(std::span<const double> derivs, std::span<const double> z, std::span<double> out);
} // namespace jet_algebra

/// Componentwise f applied to every row of the jet.
MultiJet apply_pointwise(ScalarMap f, const MultiJet& jet);

/// Fully connected network: affine layers with the activation after every hidden layer.
/// The output layer is affine.
struct NetParams {
    std::vector<int> layer_dims;  ///< d_0, ..., d_{L+1}
    std::vector<Matrix> weights;  ///< weights[l] is d_{l+1} x d_l
    std::vector<Vector> biases;   ///< biases[l] has d_{l+1} entries
    Activation activation = Activation::tanh;
    int k_max = kDefaultMaxOrder; ///< highest derivative order this network serves

    void validate() const;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
    bool is_affine() const { return weights.size() == 1; }
    Eigen::Index num_parameters() const;

    /// Layer by layer: W row-major, then b.
    Vector flatten() const;
    NetParams with_parameters(const Vector& theta) const;

    /// Gaussian weights with standard deviation gain / sqrt(fan_in); biases with 0.1 * gain.
    static NetParams random(std::vector<int> dims, Activation activation, std::uint64_t seed, double gain = 1.0,
                            int k_max = kDefaultMaxOrder);
    /// Single affine layer y = A x + b.
    static NetParams affine(Matrix a, Vector b, int k_max = kDefaultMaxOrder);
};

Vector forward(const NetParams& net, const Vector& x);

/// Pushes a jet through the network. Throws OrderError when jet.order() > net.k_max.
MultiJet propagate(const NetParams& net, const MultiJet& jet);

/// D^i f(x)(h^1, ..., h^i) with i = dirs.size(); i = 0 is the forward pass.
Vector directional_derivative(const NetParams& net, const Vector& x, std::span<const Vector> dirs);

using VectorFunction = std::function<Vector(const Vector&)>;

/// Iterated central differences along dirs (i <= 3):
/// sum_{s in {+-1}^i} (prod s) f(x + step sum_j s_j h^j) / (2 step)^i, accurate to O(step^2).
Vector fd_oracle(const VectorFunction& f, const Vector& x, std::span<const Vector> dirs, double step);

} // namespace dilab
