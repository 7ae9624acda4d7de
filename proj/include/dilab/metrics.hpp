#pragma once

// Error functionals between two operators F and G: compact-open seminorms, the operator-norm
// Sobolev norm, Bastiani, tilde and mixed (p, r) Sobolev norms, and Gaussian Hilbert-Schmidt norms.
// Every integral is taken against a MeasureSampler; its total mass multiplies each order term.

#include "dilab/measures.hpp"
#include "dilab/targets.hpp"

#include <iosfwd>
#include <optional>

namespace dilab {

/// Largest singular value.
double operator_norm(const Matrix& m);

/// sup_{|h| = |g| = 1} |B(h, g)| of a symmetric vector-valued bilinear form given as slices
/// B(h, g)_r = h^T slices[r] g. Alternating maximization over the output direction y and the
/// top eigenvector of sum_r y_r slices[r]; at most 200 sweeps, relative tolerance 1e-8, restarted
/// from the dominant slice-Gram direction and the three heaviest slices.
/// Throws NumericalError when the iteration does not settle.
double bilinear_operator_norm(const std::vector<Matrix>& slices);

/// sup_{h in K'} |M h| when it can be computed exactly: ellipsoids (largest singular value of
/// M diag(c)), boxes whose weighted columns are orthogonal (Frobenius norm) or have few nonzero
/// columns (vertex enumeration). nullopt otherwise.
std::optional<double> weighted_operator_norm(const Matrix& m, const CompactSpec& directions);

struct CompactOpenResult {
    NormEstimate sampled;        ///< kind sampled_sup: a lower bound of the seminorm
    std::optional<double> exact; ///< order 1 with affine F and G, when weighted_operator_norm applies
};

/// p^{i,1}_{K,K'}(F - G) = sup_{x in K, h^j in K'} |D^i F(x)(h..) - D^i G(x)(h..)| sampled over n draws.
CompactOpenResult compact_open_seminorm(const TargetOperator& f, const TargetOperator& g, const CompactSpec& k_in,
                                        const CompactSpec& k_dirs, int order, int n, std::uint64_t seed);

/// ||D^i F(x) - D^i G(x)||_op at the base points of n draws of mu (orders 0, 1, 2).
std::vector<double> opnorm_samples(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu,
                                   int order, int n, std::uint64_t seed);

/// (max_{i<=k} int ||D^i (F - G)(x)||_op^p dmu^0)^(1/p). Orders above 2 are unsupported.
NormEstimate opnorm_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu,
                                  int k, double p, int n, std::uint64_t seed);

/// (max_{i<=k} int |D^i (F - G)(x)(h^1..h^i)|^p dmu^{0:i})^(1/p).
NormEstimate bastiani_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu,
                                    int k, double p, int n, std::uint64_t seed);

/// The same functional on a fixed batch of draws (order i uses the first i directions).
NormEstimate bastiani_on_batch(const TargetOperator& f, const TargetOperator& g, std::span<const Draw> batch,
                               int k, double p, double total_mass = 1.0);

/// (max_i int (int |D^i (F - G)(x)(h..)|^r deta^{1:i})^{p/r} dmu^0)^(1/p), the inner integral
/// estimated with n_inner direction draws per base point. Requires a product measure.
NormEstimate mixed_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu, int k,
                                 double p, double r, int n, int n_inner, std::uint64_t seed);

/// (max_i max_{J subset {1..i}} int |D^{|J|}(F - G)(x)(h_J)|^p prod_{t not in J} |h^t|^p dmu^{0:i})^(1/p).
/// terms[i] holds the largest subset integral of order i.
NormEstimate tilde_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu, int k,
                                 double p, int n, std::uint64_t seed);

/// max(1, max_{1<=i<=k} rn_i)^(1/p): constant C with bastiani <= C * opnorm for product measures.
double domination_constant(const MeasureSampler& mu, int k, double p, int n, std::uint64_t seed);

/// ||L Q^{1/2}||_HS for a linear map (kind exact).
NormEstimate gaussian_hs_norm(const Matrix& l, const GaussianSpec& gaussian);

/// Hilbert-Schmidt norm of (h, g) -> B(Q^{1/2} h, Q^{1/2} g) for bilinear slices.
NormEstimate gaussian_hs_norm(const std::vector<Matrix>& slices, const GaussianSpec& gaussian);

/// (int |L h|^p dgamma(h))^(1/p) by Monte Carlo.
NormEstimate gaussian_lp_norm_mc(const Matrix& l, const GaussianSpec& gaussian, double p, int n, std::uint64_t seed);

/// One CSV row: experiment_id,norm_kind,k,p,r,value,std_error,n.
struct MetricRecord {
    std::string experiment_id;
    std::string norm_kind;
    int k = 0;
    double p = 2.0;
    double r = 2.0;
    NormEstimate estimate;
};

void write_metric_csv_header(std::ostream& out);
void write_metric_csv_row(std::ostream& out, const MetricRecord& record);

} // namespace dilab
