#include "dilab/measures.hpp"

#include "dilab/parallel.hpp"
#include "dilab/rng.hpp"

#include <cmath>
#include <random>

namespace dilab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Coeffs sample_base(const BaseMeasure& base, Rng& rng)
{
    return std::visit(
        overloaded{
            [&](const GaussianSpec& g) -> Coeffs {
                std::normal_distribution<double> normal;
                Coeffs x(g.ambient_dim());
                for (Eigen::Index i = 0; i < x.size(); ++i) {
                    x(i) = std::sqrt(g.eigenvalues(i)) * normal(rng);
                }
                return x;
            },
            [&](const CompactSpec& k) -> Coeffs {
                const auto& c = k.radii();
                const int dim = k.ambient_dim();
                Coeffs x(dim);
                if (k.shape() == CompactShape::box) {
                    std::uniform_real_distribution<double> unit(-1.0, 1.0);
                    for (int i = 0; i < dim; ++i) {
                        x(i) = c[static_cast<std::size_t>(i)] * unit(rng);
                    }
                    return x;
                }
                std::normal_distribution<double> normal;
                for (int i = 0; i < dim; ++i) {
                    x(i) = normal(rng);
                }
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                x *= std::pow(unit(rng), 1.0 / dim) / x.norm();
                for (int i = 0; i < dim; ++i) {
                    x(i) *= c[static_cast<std::size_t>(i)];
                }
                return x;
            },
            [&](const EmpiricalSpec& e) -> Coeffs {
                std::uniform_int_distribution<std::size_t> pick(0, e.points.size() - 1);
                return e.points[pick(rng)];
            },
        },
        base);
}

void validate_base(const BaseMeasure& base)
{
    std::visit(overloaded{
                   [](const GaussianSpec& g) { g.validate(); },
                   [](const CompactSpec&) {},
                   [](const EmpiricalSpec& e) {
                       if (e.points.empty()) {
                           throw DomainError("empirical measure needs at least one point");
                       }
                       for (const auto& p : e.points) {
                           require_dim(p.size(), e.points.front().size(), "empirical measure");
                       }
                   },
               },
               base);
}

template <class T, class Fn>
std::vector<T> generate(int n, Fn&& fn)
{
    if (n < 1) {
        throw DomainError("sample count must be positive");
    }
    std::vector<T> out(static_cast<std::size_t>(n));
    parallel_for(out.size(), [&](std::size_t s) { out[s] = fn(s); });
    return out;
}

double pow_norm(const Coeffs& v, double p) { return std::pow(v.norm(), p); }

} // namespace

GaussianSpec GaussianSpec::power_law(int ambient_dim, double exponent, double scale)
{
    if (ambient_dim < 1) {
        throw DomainError("power_law: ambient_dim must be positive");
    }
    GaussianSpec spec;
    spec.eigenvalues.resize(ambient_dim);
    for (int i = 0; i < ambient_dim; ++i) {
        spec.eigenvalues(i) = scale * std::pow(static_cast<double>(i + 1), -exponent);
    }
    spec.validate();
    return spec;
}

void GaussianSpec::validate() const
{
    if (eigenvalues.size() < 1) {
        throw DomainError("GaussianSpec: no eigenvalues");
    }
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (!std::isfinite(eigenvalues(i)) || eigenvalues(i) < 0.0) {
            throw DomainError("GaussianSpec: eigenvalue " + std::to_string(i + 1) + " is negative or non-finite");
        }
    }
}

int ambient_dim(const BaseMeasure& base)
{
    return std::visit(overloaded{
                          [](const GaussianSpec& g) { return g.ambient_dim(); },
                          [](const CompactSpec& k) { return k.ambient_dim(); },
                          [](const EmpiricalSpec& e) {
                              return e.points.empty() ? 0 : static_cast<int>(e.points.front().size());
                          },
                      },
                      base);
}

std::vector<Coeffs> sample_gaussian(const GaussianSpec& spec, int n, std::uint64_t seed)
{
    spec.validate();
    const BaseMeasure base = spec;
    return generate<Coeffs>(n, [&](std::size_t s) {
        Rng rng = make_rng(seed, s);
        return sample_base(base, rng);
    });
}

MeasureSampler::MeasureSampler(BaseMeasure input, BaseMeasure direction, int k, double total_mass, Coupling coupling)
    : input_(std::move(input)), direction_(std::move(direction)), k_(k), mass_(total_mass), coupling_(coupling)
{
    validate_base(input_);
    validate_base(direction_);
    if (k_ < 0) {
        throw DomainError("MeasureSampler: k must be nonnegative");
    }
    if (!(mass_ > 0.0) || !std::isfinite(mass_)) {
        throw DomainError("MeasureSampler: total mass must be positive and finite");
    }
    require_dim(dilab::ambient_dim(direction_), dilab::ambient_dim(input_), "MeasureSampler directions");
}

MeasureSampler MeasureSampler::gaussian_product(const GaussianSpec& spec, int k, double total_mass)
{
    return MeasureSampler(spec, spec, k, total_mass, Coupling::product);
}

int MeasureSampler::ambient_dim() const noexcept { return dilab::ambient_dim(input_); }

MeasureSampler MeasureSampler::marginal(int i) const
{
    if (i < 0 || i > k_) {
        throw DomainError("marginal: need 0 <= i <= k");
    }
    MeasureSampler out = *this;
    out.k_ = i;
    return out;
}

Draw MeasureSampler::draw_one(std::uint64_t seed, std::uint64_t index) const
{
    const std::uint64_t draw_seed = derive_seed(seed, index);
    Draw d;
    Rng x_rng = make_rng(draw_seed, 0);
    d.x = sample_base(input_, x_rng);
    d.dirs.reserve(static_cast<std::size_t>(k_));
    for (int j = 0; j < k_; ++j) {
        if (coupling_ == Coupling::diagonal) {
            d.dirs.push_back(d.x);
        } else {
            Rng h_rng = make_rng(draw_seed, static_cast<std::uint64_t>(j) + 1);
            d.dirs.push_back(sample_base(direction_, h_rng));
        }
    }
    return d;
}

std::vector<Draw> MeasureSampler::draw(int n, std::uint64_t seed) const
{
    return generate<Draw>(n, [&](std::size_t s) { return draw_one(seed, s); });
}

NormEstimate moment(const MeasureSampler& mu, int k, double q, double p, int n, std::uint64_t seed)
{
    if (q < 0.0 || p < 0.0) {
        throw DomainError("moment: exponents must be nonnegative");
    }
    const MeasureSampler marg = mu.marginal(k);
    const std::vector<double> values = generate<double>(n, [&](std::size_t s) {
        const Draw d = marg.draw_one(seed, s);
        double v = 1.0 + pow_norm(d.x, q);
        for (const auto& h : d.dirs) {
            v *= 1.0 + pow_norm(h, p);
        }
        return v;
    });
    const SampleMean m = sample_mean(values);
    if (!std::isfinite(m.mean) || !std::isfinite(m.std_error)) {
        throw NumericalError("moment: non-finite sample statistic");
    }
    NormEstimate est;
    est.kind = EstimateKind::mc_mean_power;
    est.value = mu.total_mass() * m.mean;
    est.std_error = mu.total_mass() * m.std_error;
    est.n_samples = n;
    return est;
}

PushforwardSampler::PushforwardSampler(Encoder encoder, MeasureSampler mu)
    : encoder_(std::move(encoder)), mu_(std::move(mu))
{
    require_dim(encoder_.ambient_dim(), mu_.ambient_dim(), "pushforward");
}

std::vector<Vector> PushforwardSampler::draw(int n, std::uint64_t seed) const
{
    const MeasureSampler base = mu_.marginal(0);
    return generate<Vector>(n, [&](std::size_t s) { return encode(encoder_, base.draw_one(seed, s).x); });
}

PushforwardSampler pushforward(const Encoder& encoder, const MeasureSampler& mu)
{
    return PushforwardSampler(encoder, mu);
}

Matrix pushforward_covariance(const Encoder& encoder, const GaussianSpec& spec)
{
    require_dim(encoder.ambient_dim(), spec.ambient_dim(), "pushforward_covariance");
    const Matrix& e = encoder.functionals();
    return e * spec.eigenvalues.asDiagonal() * e.transpose();
}

Matrix second_moment(const BaseMeasure& base)
{
    return std::visit(overloaded{
                          [](const GaussianSpec& g) -> Matrix { return g.eigenvalues.asDiagonal(); },
                          [](const CompactSpec& k) -> Matrix {
                              const int dim = k.ambient_dim();
                              // Box: Var U[-c, c] = c^2 / 3. Ellipsoid: E r^2 / D = 1 / (D + 2).
                              const double factor =
                                  k.shape() == CompactShape::box ? 1.0 / 3.0 : 1.0 / (dim + 2.0);
                              Vector diag(dim);
                              for (int i = 0; i < dim; ++i) {
                                  const double c = k.radii()[static_cast<std::size_t>(i)];
                                  diag(i) = factor * c * c;
                              }
                              return diag.asDiagonal();
                          },
                          [](const EmpiricalSpec& e) -> Matrix {
                              const auto dim = e.points.front().size();
                              Matrix m = Matrix::Zero(dim, dim);
                              for (const auto& x : e.points) {
                                  m += x * x.transpose();
                              }
                              return m / static_cast<double>(e.points.size());
                          },
                      },
                      base);
}

NormEstimate rn_bound(const MeasureSampler& mu, double p, int i, int n, std::uint64_t seed)
{
    if (mu.coupling() != Coupling::product) {
        throw DomainError("rn_bound: only product measures mu^0 (x) eta are supported");
    }
    if (i == 0) {
        return NormEstimate::exact_value(1.0);
    }
    const MeasureSampler marg = mu.marginal(i);
    const std::vector<double> values = generate<double>(n, [&](std::size_t s) {
        const Draw d = marg.draw_one(seed, s);
        double v = 1.0;
        for (const auto& h : d.dirs) {
            v *= pow_norm(h, p);
        }
        return v;
    });
    const SampleMean m = sample_mean(values);
    if (!std::isfinite(m.mean)) {
        throw NumericalError("rn_bound: non-finite sample statistic");
    }
    NormEstimate est;
    est.kind = EstimateKind::mc_mean_power;
    est.value = m.mean;
    est.std_error = m.std_error;
    est.n_samples = n;
    return est;
}

} // namespace dilab
