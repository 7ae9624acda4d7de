#pragma once

// Finite measures on X and X x X^k, represented operationally as seeded samplers.

#include "dilab/estimate.hpp"
#include "dilab/space.hpp"

#include <variant>

namespace dilab {

/// Centered Gaussian on the truncation with covariance diag(eigenvalues) in the basis.
struct GaussianSpec {
    Vector eigenvalues;

    /// lambda_i = scale * i^-exponent.
    static GaussianSpec power_law(int ambient_dim, double exponent, double scale = 1.0);

    int ambient_dim() const noexcept { return static_cast<int>(eigenvalues.size()); }
    /// Throws DomainError on negative or non-finite eigenvalues.
    void validate() const;
};

/// Uniform draw from a finite list of points (a point mass when the list has one entry).
struct EmpiricalSpec {
    std::vector<Coeffs> points;
};

using BaseMeasure = std::variant<GaussianSpec, CompactSpec, EmpiricalSpec>;

int ambient_dim(const BaseMeasure& base);

/// Karhunen-Loeve draws x_i = sqrt(lambda_i) xi_i.
std::vector<Coeffs> sample_gaussian(const GaussianSpec& spec, int n, std::uint64_t seed);

/// How directions relate to the base point.
enum class Coupling {
    product,  ///< mu = mu^0 (x) eta, eta = direction^(x k)
    diagonal, ///< every direction equals the base point: a non-product measure
};

struct Draw {
    Coeffs x;
    std::vector<Coeffs> dirs; ///< h^1..h^k
};

/// Seeded sampler of (x, h^1..h^k) ~ mu / mass. Draw s uses streams derived from (seed, s) and
/// direction j its own sub-stream, so marginals and prefixes of a draw set are consistent:
/// draw(n, seed) is a prefix of draw(n + m, seed) and marginal(i) reproduces h^1..h^i.
class MeasureSampler {
public:
    MeasureSampler(BaseMeasure input, BaseMeasure direction, int k, double total_mass = 1.0,
                   Coupling coupling = Coupling::product);

    /// mu^0 = gamma scaled by mass, eta = gamma^(x k).
    static MeasureSampler gaussian_product(const GaussianSpec& spec, int k, double total_mass = 1.0);

    const BaseMeasure& input() const noexcept { return input_; }
    const BaseMeasure& direction() const noexcept { return direction_; }
    int k() const noexcept { return k_; }
    double total_mass() const noexcept { return mass_; }
    Coupling coupling() const noexcept { return coupling_; }
    int ambient_dim() const noexcept;

    /// mu^{0:i}: same streams, first i directions.
    MeasureSampler marginal(int i) const;

    Draw draw_one(std::uint64_t seed, std::uint64_t index) const;
    std::vector<Draw> draw(int n, std::uint64_t seed) const;

private:
    BaseMeasure input_;
    BaseMeasure direction_;
    int k_;
    double mass_;
    Coupling coupling_;
};

/// ||mu||_{k,q,p} = int (1 + |x|^q) prod_{j<=k} (1 + |h_j|^p) dmu^{0:k}.
NormEstimate moment(const MeasureSampler& mu, int k, double q, double p, int n, std::uint64_t seed);

/// Finite-dimensional pushforward nu^E of mu^0 under an encoder.
class PushforwardSampler {
public:
    PushforwardSampler(Encoder encoder, MeasureSampler mu);

    const Encoder& encoder() const noexcept { return encoder_; }
    std::vector<Vector> draw(int n, std::uint64_t seed) const;

private:
    Encoder encoder_;
    MeasureSampler mu_;
};

PushforwardSampler pushforward(const Encoder& encoder, const MeasureSampler& mu);

/// E Q E^T for a Gaussian input.
Matrix pushforward_covariance(const Encoder& encoder, const GaussianSpec& spec);

/// Second moment E[x x^T] of a base measure, exact for Gaussians and empirical lists.
Matrix second_moment(const BaseMeasure& base);

/// Product case: the density d mu-bar^{0:i} / d mu^0 is the constant int prod_{r<=i} |h^r|^p d eta^{1:i}.
/// Throws DomainError for non-product couplings.
NormEstimate rn_bound(const MeasureSampler& mu, double p, int i, int n, std::uint64_t seed);

} // namespace dilab
