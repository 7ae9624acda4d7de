#pragma once

// Monte-Carlo estimates of norms and seminorms with standard errors.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dilab {

enum class EstimateKind { mc_mean_power, sampled_sup, exact };

const char* to_string(EstimateKind kind) noexcept;

/// One order of a Sobolev-type norm, before the p-th root: value estimates the integral of |.|^p.
struct OrderTerm {
    int order = 0;
    double value = 0.0;
    double std_error = 0.0;
};

struct NormEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    EstimateKind kind = EstimateKind::exact;
    std::vector<OrderTerm> terms; ///< per-order integrals (Sobolev estimators only)

    static NormEstimate exact_value(double value);
};

struct SampleMean {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean with the standard error sqrt(s^2 / n), s^2 the unbiased variance.
/// Pairwise summation keeps the result independent of how the samples were produced.
SampleMean sample_mean(std::span<const double> samples);

/// (max_i terms[i].value)^(1/p), with the delta-method error (1/p) m^(1/p - 1) se(m) of the
/// maximizing term. Throws NumericalError on non-finite terms.
NormEstimate root_of_max(std::vector<OrderTerm> terms, double p, std::int64_t n_samples);

/// Standard error of a difference of two estimates computed from independent streams or,
/// conservatively, the same stream: sqrt(se_a^2 + se_b^2).
double joint_std_error(const NormEstimate& a, const NormEstimate& b) noexcept;

} // namespace dilab
