#include "dilab/metrics.hpp"

#include "dilab/parallel.hpp"
#include "dilab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

namespace dilab {
namespace {

constexpr int kPowerIterations = 200;
constexpr double kPowerTolerance = 1e-8;

void require_orders(const TargetOperator& f, const TargetOperator& g, int k)
{
    if (k < 0) {
        throw DomainError("derivative order must be nonnegative");
    }
    if (!f.supports_order(k) || !g.supports_order(k)) {
        throw OrderError("order " + std::to_string(k) + " unsupported by " + f.name() + " or " + g.name());
    }
    require_dim(f.input_dim(), g.input_dim(), "metric operands (input)");
    require_dim(f.output_dim(), g.output_dim(), "metric operands (output)");
}

void require_p(double p)
{
    if (!(p >= 1.0)) {
        throw DomainError("exponent p must be >= 1");
    }
}

Coeffs deriv_difference(const TargetOperator& f, const TargetOperator& g, const Coeffs& x,
                        std::span<const Coeffs> dirs)
{
    return f.deriv(x, dirs) - g.deriv(x, dirs);
}

/// Runs kernel(s, row) for s < n, where row has n_terms slots, and returns mass-scaled means.
template <class Kernel>
std::vector<OrderTerm> mc_terms(int n, int n_terms, double mass, Kernel&& kernel)
{
    if (n < 1) {
        throw DomainError("sample count must be positive");
    }
    Matrix values(n_terms, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t s) {
        auto col = values.col(static_cast<Eigen::Index>(s));
        kernel(s, col);
    });
    std::vector<OrderTerm> terms;
    terms.reserve(static_cast<std::size_t>(n_terms));
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int t = 0; t < n_terms; ++t) {
        for (int s = 0; s < n; ++s) {
            row[static_cast<std::size_t>(s)] = values(t, s);
        }
        const SampleMean m = sample_mean(row);
        terms.push_back(OrderTerm{t, mass * m.mean, mass * m.std_error});
    }
    return terms;
}

double opnorm_at(const TargetOperator& f, const TargetOperator& g, const Coeffs& x, int order)
{
    switch (order) {
    case 0:
        return (f.eval(x) - g.eval(x)).norm();
    case 1:
        return operator_norm(assemble_jacobian(f, x) - assemble_jacobian(g, x));
    case 2: {
        std::vector<Matrix> hf = assemble_hessian(f, x);
        const std::vector<Matrix> hg = assemble_hessian(g, x);
        for (std::size_t r = 0; r < hf.size(); ++r) {
            hf[r] -= hg[r];
        }
        return bilinear_operator_norm(hf);
    }
    default:
        throw OrderError("operator norms of order >= 3 are unsupported");
    }
}

double box_vertex_sup(const Matrix& a)
{
    // |A u| is convex in u, so its maximum over the cube sits at a vertex; u and -u agree.
    const auto m = static_cast<int>(a.cols());
    double best = 0.0;
    const std::uint64_t count = std::uint64_t{1} << (m - 1);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        Vector v = a.col(m - 1);
        for (int j = 0; j + 1 < m; ++j) {
            v += ((mask >> j) & 1U ? 1.0 : -1.0) * a.col(j);
        }
        best = std::max(best, v.norm());
    }
    return best;
}

} // namespace

double operator_norm(const Matrix& m)
{
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double bilinear_operator_norm(const std::vector<Matrix>& slices)
{
    if (slices.empty()) {
        return 0.0;
    }
    const auto n_out = static_cast<Eigen::Index>(slices.size());
    const Eigen::Index dim = slices.front().rows();
    // Gram matrix of the slices under the Frobenius pairing.
    Matrix gram(n_out, n_out);
    for (Eigen::Index r = 0; r < n_out; ++r) {
        for (Eigen::Index t = 0; t <= r; ++t) {
            gram(r, t) = gram(t, r) =
                slices[static_cast<std::size_t>(r)].cwiseProduct(slices[static_cast<std::size_t>(t)]).sum();
        }
    }
    if (gram.diagonal().maxCoeff() == 0.0) {
        return 0.0;
    }
    auto apply = [&](const Vector& h) {
        Vector out(n_out);
        for (Eigen::Index r = 0; r < n_out; ++r) {
            out(r) = h.dot(slices[static_cast<std::size_t>(r)] * h);
        }
        return out;
    };
    auto climb = [&](Vector y) {
        double previous = -1.0;
        for (int iter = 0; iter < kPowerIterations; ++iter) {
            Matrix s = Matrix::Zero(dim, dim);
            for (Eigen::Index r = 0; r < n_out; ++r) {
                if (y(r) != 0.0) {
                    s += y(r) * slices[static_cast<std::size_t>(r)];
                }
            }
            Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
            const Vector& lambda = eig.eigenvalues();
            const Eigen::Index top = std::abs(lambda(0)) > std::abs(lambda(dim - 1)) ? 0 : dim - 1;
            const Vector b = apply(eig.eigenvectors().col(top));
            const double value = b.norm();
            if (value == 0.0 || std::abs(value - previous) <= kPowerTolerance * value) {
                return value;
            }
            previous = value;
            y = b / value;
        }
        throw NumericalError("bilinear_operator_norm: no convergence within 200 iterations");
    };
    // The iteration is monotone but only finds a local maximum; start from the dominant
    // direction of the slice Gram matrix and from the few heaviest single slices.
    Eigen::SelfAdjointEigenSolver<Matrix> dominant(gram);
    double best = climb(dominant.eigenvectors().col(n_out - 1));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_out));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return gram(a, a) > gram(b, b); });
    for (std::size_t s = 0; s < std::min<std::size_t>(order.size(), 3); ++s) {
        if (gram(order[s], order[s]) > 0.0) {
            best = std::max(best, climb(Vector::Unit(n_out, order[s])));
        }
    }
    return best;
}

std::optional<double> weighted_operator_norm(const Matrix& m, const CompactSpec& directions)
{
    require_dim(m.cols(), directions.ambient_dim(), "weighted_operator_norm");
    Vector c(directions.ambient_dim());
    for (int i = 0; i < c.size(); ++i) {
        c(i) = directions.radii()[static_cast<std::size_t>(i)];
    }
    const Matrix a = m * c.asDiagonal();
    if (directions.shape() == CompactShape::ellipsoid) {
        return operator_norm(a);
    }
    std::vector<Eigen::Index> nonzero;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (a.col(j).squaredNorm() > 0.0) {
            nonzero.push_back(j);
        }
    }
    if (nonzero.empty()) {
        return 0.0;
    }
    bool orthogonal = true;
    for (std::size_t s = 0; s < nonzero.size() && orthogonal; ++s) {
        for (std::size_t t = s + 1; t < nonzero.size(); ++t) {
            const auto cs = a.col(nonzero[s]);
            const auto ct = a.col(nonzero[t]);
            if (std::abs(cs.dot(ct)) > 1e-14 * cs.norm() * ct.norm()) {
                orthogonal = false;
                break;
            }
        }
    }
    if (orthogonal) {
        return a.norm();
    }
    constexpr std::size_t kMaxVertexColumns = 20;
    if (nonzero.size() <= kMaxVertexColumns) {
        Matrix reduced(a.rows(), static_cast<Eigen::Index>(nonzero.size()));
        for (std::size_t s = 0; s < nonzero.size(); ++s) {
            reduced.col(static_cast<Eigen::Index>(s)) = a.col(nonzero[s]);
        }
        return box_vertex_sup(reduced);
    }
    return std::nullopt;
}

CompactOpenResult compact_open_seminorm(const TargetOperator& f, const TargetOperator& g, const CompactSpec& k_in,
                                        const CompactSpec& k_dirs, int order, int n, std::uint64_t seed)
{
    require_orders(f, g, order);
    require_dim(k_in.ambient_dim(), f.input_dim(), "compact_open_seminorm (K)");
    require_dim(k_dirs.ambient_dim(), f.input_dim(), "compact_open_seminorm (K')");
    if (n < 1) {
        throw DomainError("sample count must be positive");
    }
    const MeasureSampler sampler(k_in, k_dirs, order);
    std::vector<double> values(static_cast<std::size_t>(n));
    parallel_for(values.size(), [&](std::size_t s) {
        const Draw d = sampler.draw_one(seed, s);
        values[s] = deriv_difference(f, g, d.x, d.dirs).norm();
    });
    CompactOpenResult result;
    result.sampled.kind = EstimateKind::sampled_sup;
    result.sampled.n_samples = n;
    result.sampled.value = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(result.sampled.value)) {
        throw NumericalError("compact_open_seminorm: non-finite value");
    }
    if (order == 1 && f.affine() && g.affine()) {
        const Coeffs origin = Coeffs::Zero(f.input_dim());
        result.exact = weighted_operator_norm(assemble_jacobian(f, origin) - assemble_jacobian(g, origin), k_dirs);
    }
    return result;
}

std::vector<double> opnorm_samples(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu,
                                   int order, int n, std::uint64_t seed)
{
    require_orders(f, g, order);
    if (n < 1) {
        throw DomainError("sample count must be positive");
    }
    const MeasureSampler base = mu.marginal(0);
    std::vector<double> out(static_cast<std::size_t>(n));
    parallel_for(out.size(), [&](std::size_t s) { out[s] = opnorm_at(f, g, base.draw_one(seed, s).x, order); });
    return out;
}

NormEstimate opnorm_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu,
                                  int k, double p, int n, std::uint64_t seed)
{
    require_orders(f, g, k);
    require_p(p);
    if (k > 2) {
        throw OrderError("operator norms of order >= 3 are unsupported");
    }
    const MeasureSampler base = mu.marginal(0);
    auto terms = mc_terms(n, k + 1, mu.total_mass(), [&](std::size_t s, auto out) {
        const Coeffs x = base.draw_one(seed, s).x;
        for (int i = 0; i <= k; ++i) {
            out(i) = std::pow(opnorm_at(f, g, x, i), p);
        }
    });
    return root_of_max(std::move(terms), p, n);
}

NormEstimate bastiani_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu,
                                    int k, double p, int n, std::uint64_t seed)
{
    require_orders(f, g, k);
    require_p(p);
    const MeasureSampler marg = mu.marginal(k);
    auto terms = mc_terms(n, k + 1, mu.total_mass(), [&](std::size_t s, auto out) {
        const Draw d = marg.draw_one(seed, s);
        for (int i = 0; i <= k; ++i) {
            out(i) = std::pow(deriv_difference(f, g, d.x, std::span(d.dirs).first(i)).norm(), p);
        }
    });
    return root_of_max(std::move(terms), p, n);
}

NormEstimate bastiani_on_batch(const TargetOperator& f, const TargetOperator& g, std::span<const Draw> batch,
                               int k, double p, double total_mass)
{
    require_orders(f, g, k);
    require_p(p);
    for (const auto& d : batch) {
        if (static_cast<int>(d.dirs.size()) < k) {
            throw DomainError("bastiani_on_batch: draws carry fewer than k directions");
        }
    }
    auto terms = mc_terms(static_cast<int>(batch.size()), k + 1, total_mass, [&](std::size_t s, auto out) {
        const Draw& d = batch[s];
        for (int i = 0; i <= k; ++i) {
            out(i) = std::pow(deriv_difference(f, g, d.x, std::span(d.dirs).first(i)).norm(), p);
        }
    });
    return root_of_max(std::move(terms), p, static_cast<std::int64_t>(batch.size()));
}

NormEstimate mixed_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu, int k,
                                 double p, double r, int n, int n_inner, std::uint64_t seed)
{
    require_orders(f, g, k);
    require_p(p);
    require_p(r);
    if (mu.coupling() != Coupling::product) {
        throw DomainError("mixed_sobolev_error: requires a product measure");
    }
    if (n_inner < 1) {
        throw DomainError("mixed_sobolev_error: n_inner must be positive");
    }
    const MeasureSampler marg = mu.marginal(k);
    auto terms = mc_terms(n, k + 1, mu.total_mass(), [&](std::size_t s, auto out) {
        const Coeffs x = marg.draw_one(seed, s).x;
        out(0) = std::pow((f.eval(x) - g.eval(x)).norm(), p);
        if (k == 0) {
            return;
        }
        const std::uint64_t inner_seed = derive_seed(seed, 0x1000000ULL + s);
        Matrix inner(k, n_inner);
        for (int t = 0; t < n_inner; ++t) {
            const Draw d = marg.draw_one(inner_seed, static_cast<std::uint64_t>(t));
            for (int i = 1; i <= k; ++i) {
                inner(i - 1, t) = std::pow(deriv_difference(f, g, x, std::span(d.dirs).first(i)).norm(), r);
            }
        }
        std::vector<double> row(static_cast<std::size_t>(n_inner));
        for (int i = 1; i <= k; ++i) {
            for (int t = 0; t < n_inner; ++t) {
                row[static_cast<std::size_t>(t)] = inner(i - 1, t);
            }
            out(i) = std::pow(pairwise_sum(row) / n_inner, p / r);
        }
    });
    return root_of_max(std::move(terms), p, n);
}

NormEstimate tilde_sobolev_error(const TargetOperator& f, const TargetOperator& g, const MeasureSampler& mu, int k,
                                 double p, int n, std::uint64_t seed)
{
    require_orders(f, g, k);
    require_p(p);
    const MeasureSampler marg = mu.marginal(k);
    // Slot (i, J) for J a subset of {1..i}: offset 2^i - 1 + mask.
    const int n_slots = (1 << (k + 1)) - 1;
    auto slots = mc_terms(n, n_slots, mu.total_mass(), [&](std::size_t s, auto out) {
        const Draw d = marg.draw_one(seed, s);
        std::vector<double> dir_pow(d.dirs.size());
        for (std::size_t t = 0; t < d.dirs.size(); ++t) {
            dir_pow[t] = std::pow(d.dirs[t].norm(), p);
        }
        std::vector<double> sub(static_cast<std::size_t>(1) << k);
        std::vector<Coeffs> chosen;
        for (unsigned mask = 0; mask < sub.size(); ++mask) {
            chosen.clear();
            for (int t = 0; t < k; ++t) {
                if ((mask >> t) & 1U) {
                    chosen.push_back(d.dirs[static_cast<std::size_t>(t)]);
                }
            }
            sub[mask] = std::pow(deriv_difference(f, g, d.x, chosen).norm(), p);
        }
        for (int i = 0; i <= k; ++i) {
            for (unsigned mask = 0; mask < (1U << i); ++mask) {
                double v = sub[mask];
                for (int t = 0; t < i; ++t) {
                    if (!((mask >> t) & 1U)) {
                        v *= dir_pow[static_cast<std::size_t>(t)];
                    }
                }
                out((1 << i) - 1 + static_cast<int>(mask)) = v;
            }
        }
    });
    std::vector<OrderTerm> terms;
    for (int i = 0; i <= k; ++i) {
        OrderTerm best{i, -1.0, 0.0};
        for (int mask = 0; mask < (1 << i); ++mask) {
            const OrderTerm& t = slots[static_cast<std::size_t>((1 << i) - 1 + mask)];
            if (t.value > best.value) {
                best = OrderTerm{i, t.value, t.std_error};
            }
        }
        terms.push_back(best);
    }
    return root_of_max(std::move(terms), p, n);
}

double domination_constant(const MeasureSampler& mu, int k, double p, int n, std::uint64_t seed)
{
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = std::max(c, rn_bound(mu, p, i, n, seed).value);
    }
    return std::pow(c, 1.0 / p);
}

NormEstimate gaussian_hs_norm(const Matrix& l, const GaussianSpec& gaussian)
{
    gaussian.validate();
    require_dim(l.cols(), gaussian.ambient_dim(), "gaussian_hs_norm");
    return NormEstimate::exact_value((l * gaussian.eigenvalues.cwiseSqrt().asDiagonal()).norm());
}

NormEstimate gaussian_hs_norm(const std::vector<Matrix>& slices, const GaussianSpec& gaussian)
{
    gaussian.validate();
    const Vector root = gaussian.eigenvalues.cwiseSqrt();
    double total = 0.0;
    for (const auto& h : slices) {
        require_dim(h.rows(), gaussian.ambient_dim(), "gaussian_hs_norm");
        require_dim(h.cols(), gaussian.ambient_dim(), "gaussian_hs_norm");
        total += (root.asDiagonal() * h * root.asDiagonal()).squaredNorm();
    }
    return NormEstimate::exact_value(std::sqrt(total));
}

NormEstimate gaussian_lp_norm_mc(const Matrix& l, const GaussianSpec& gaussian, double p, int n, std::uint64_t seed)
{
    require_p(p);
    gaussian.validate();
    require_dim(l.cols(), gaussian.ambient_dim(), "gaussian_lp_norm_mc");
    const Vector root = gaussian.eigenvalues.cwiseSqrt();
    auto terms = mc_terms(n, 1, 1.0, [&](std::size_t s, auto out) {
        Rng rng = make_rng(seed, s);
        std::normal_distribution<double> normal;
        Vector h(root.size());
        for (Eigen::Index i = 0; i < h.size(); ++i) {
            h(i) = root(i) * normal(rng);
        }
        out(0) = std::pow((l * h).norm(), p);
    });
    terms.front().order = 1;
    return root_of_max(std::move(terms), p, n);
}

void write_metric_csv_header(std::ostream& out) { out << "experiment_id,norm_kind,k,p,r,value,std_error,n\n"; }

void write_metric_csv_row(std::ostream& out, const MetricRecord& record)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%lld", record.k, record.p, record.r,
                  record.estimate.value, record.estimate.std_error,
                  static_cast<long long>(record.estimate.n_samples));
    out << record.experiment_id << ',' << record.norm_kind << ',' << buf << '\n';
}

} // namespace dilab
