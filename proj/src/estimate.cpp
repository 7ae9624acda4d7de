#include "dilab/estimate.hpp"

#include "dilab/common.hpp"
#include "dilab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace dilab {

const char* to_string(EstimateKind kind) noexcept
{
    switch (kind) {
    case EstimateKind::mc_mean_power:
        return "mc_mean_power";
    case EstimateKind::sampled_sup:
        return "sampled_sup";
    case EstimateKind::exact:
        return "exact";
    }
    return "unknown";
}

NormEstimate NormEstimate::exact_value(double value)
{
    NormEstimate est;
    est.value = value;
    est.kind = EstimateKind::exact;
    return est;
}

SampleMean sample_mean(std::span<const double> samples)
{
    if (samples.empty()) {
        throw DomainError("sample_mean: no samples");
    }
    const double n = static_cast<double>(samples.size());
    const double mean = pairwise_sum(samples) / n;
    if (samples.size() == 1) {
        return {mean, 0.0};
    }
    std::vector<double> sq(samples.size());
    std::transform(samples.begin(), samples.end(), sq.begin(), [mean](double v) { return (v - mean) * (v - mean); });
    const double variance = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(variance / n)};
}

NormEstimate root_of_max(std::vector<OrderTerm> terms, double p, std::int64_t n_samples)
{
    if (terms.empty()) {
        throw DomainError("root_of_max: no terms");
    }
    const OrderTerm* best = &terms.front();
    for (const auto& t : terms) {
        if (!std::isfinite(t.value) || !std::isfinite(t.std_error)) {
            throw NumericalError("non-finite Monte-Carlo statistic at order " + std::to_string(t.order));
        }
        if (t.value > best->value) {
            best = &t;
        }
    }
    NormEstimate est;
    est.kind = EstimateKind::mc_mean_power;
    est.n_samples = n_samples;
    const double m = std::max(best->value, 0.0);
    est.value = std::pow(m, 1.0 / p);
    est.std_error = m > 0.0 ? best->std_error * est.value / (p * m) : 0.0;
    est.terms = std::move(terms);
    return est;
}

double joint_std_error(const NormEstimate& a, const NormEstimate& b) noexcept
{
    return std::hypot(a.std_error, b.std_error);
}

} // namespace dilab
