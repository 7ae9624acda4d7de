#include "dilab/targets.hpp"

#include "dilab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace dilab {
namespace {

Coeffs zeros(int dim) { return Coeffs::Zero(dim); }

std::vector<Coeffs> truncate_all(std::span<const Coeffs> dirs, int n)
{
    std::vector<Coeffs> out;
    out.reserve(dirs.size());
    for (const auto& h : dirs) {
        out.push_back(truncate(h, n));
    }
    return out;
}

} // namespace

TargetOperator::TargetOperator(Traits traits, EvalFn eval, DerivFn deriv)
    : traits_(std::move(traits)), eval_(std::move(eval)), deriv_(std::move(deriv))
{
    if (traits_.input_dim < 1 || traits_.output_dim < 1) {
        throw DomainError("TargetOperator: dimensions must be positive");
    }
}

Coeffs TargetOperator::eval(const Coeffs& x) const
{
    require_dim(x.size(), traits_.input_dim, traits_.name.c_str());
    return eval_(x);
}

Coeffs TargetOperator::deriv(const Coeffs& x, std::span<const Coeffs> dirs) const
{
    if (dirs.empty()) {
        return eval(x);
    }
    const int order = static_cast<int>(dirs.size());
    if (!supports_order(order)) {
        throw OrderError(traits_.name + ": derivative order " + std::to_string(order) + " unavailable");
    }
    require_dim(x.size(), traits_.input_dim, traits_.name.c_str());
    for (const auto& h : dirs) {
        require_dim(h.size(), traits_.input_dim, traits_.name.c_str());
    }
    return deriv_(x, dirs);
}

TargetOperator identity_target(int ambient_dim)
{
    TargetOperator::Traits traits{"identity", ambient_dim, ambient_dim, std::nullopt,
                                  GrowthCertificate{{1.0, 0.0}, {1.0, 1.0}}, true};
    return TargetOperator(
        std::move(traits), [](const Coeffs& x) { return x; },
        [ambient_dim](const Coeffs&, std::span<const Coeffs> dirs) {
            return dirs.size() == 1 ? dirs[0] : zeros(ambient_dim);
        });
}

TargetOperator zero_target(int ambient_dim)
{
    TargetOperator::Traits traits{"zero", ambient_dim, ambient_dim, std::nullopt,
                                  GrowthCertificate{{0.0}, {0.0}}, true};
    return TargetOperator(
        std::move(traits), [ambient_dim](const Coeffs&) { return zeros(ambient_dim); },
        [ambient_dim](const Coeffs&, std::span<const Coeffs>) { return zeros(ambient_dim); });
}

TargetOperator diagonal_target(Vector weights)
{
    if (!weights.allFinite() || weights.size() < 1) {
        throw DomainError("diagonal_target: weights must be finite and nonempty");
    }
    const int dim = static_cast<int>(weights.size());
    const double norm = weights.cwiseAbs().maxCoeff();
    TargetOperator::Traits traits{"diagonal", dim, dim, std::nullopt, GrowthCertificate{{1.0, 0.0}, {norm, norm}},
                                  true};
    auto w = std::make_shared<const Vector>(std::move(weights));
    return TargetOperator(
        std::move(traits), [w](const Coeffs& x) -> Coeffs { return w->cwiseProduct(x); },
        [w, dim](const Coeffs&, std::span<const Coeffs> dirs) -> Coeffs {
            return dirs.size() == 1 ? Coeffs(w->cwiseProduct(dirs[0])) : zeros(dim);
        });
}

TargetOperator quadratic_target(Vector weights, std::vector<BilinearTerm> terms)
{
    const int dim = static_cast<int>(weights.size());
    if (dim < 1 || !weights.allFinite()) {
        throw DomainError("quadratic_target: weights must be finite and nonempty");
    }
    if (static_cast<int>(terms.size()) > dim) {
        throw DomainError("quadratic_target: more bilinear terms than output coordinates");
    }
    // Packed as matrices: B(x, y)_j = beta_j (W x)_j (V y)_j.
    Matrix w_rows(static_cast<Eigen::Index>(terms.size()), dim);
    Matrix v_rows(static_cast<Eigen::Index>(terms.size()), dim);
    Vector beta(static_cast<Eigen::Index>(terms.size()));
    double bilinear_bound = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        require_dim(terms[j].w.size(), dim, "quadratic_target");
        require_dim(terms[j].v.size(), dim, "quadratic_target");
        const auto r = static_cast<Eigen::Index>(j);
        w_rows.row(r) = terms[j].w.transpose();
        v_rows.row(r) = terms[j].v.transpose();
        beta(r) = terms[j].beta;
        bilinear_bound += std::abs(terms[j].beta) * terms[j].w.norm() * terms[j].v.norm();
    }
    const double linear_bound = weights.cwiseAbs().maxCoeff();

    struct Packed {
        Vector weights;
        Matrix w_rows;
        Matrix v_rows;
        Vector beta;
    };
    auto data = std::make_shared<const Packed>(Packed{std::move(weights), std::move(w_rows), std::move(v_rows),
                                                      std::move(beta)});
    auto bilinear = [data, dim](const Coeffs& a, const Coeffs& b) {
        Coeffs out = zeros(dim);
        const Eigen::Index n = data->beta.size();
        out.head(n) = data->beta.cwiseProduct((data->w_rows * a).cwiseProduct(data->v_rows * b));
        return out;
    };

    TargetOperator::Traits traits{
        "quadratic", dim, dim, std::nullopt,
        GrowthCertificate{{2.0, 1.0, 0.0},
                          {linear_bound + bilinear_bound, std::max(linear_bound, 2.0 * bilinear_bound),
                           2.0 * bilinear_bound}},
        false};
    return TargetOperator(
        std::move(traits),
        [data, bilinear](const Coeffs& x) -> Coeffs { return data->weights.cwiseProduct(x) + bilinear(x, x); },
        [data, bilinear, dim](const Coeffs& x, std::span<const Coeffs> dirs) -> Coeffs {
            switch (dirs.size()) {
            case 1:
                return data->weights.cwiseProduct(dirs[0]) + bilinear(x, dirs[0]) + bilinear(dirs[0], x);
            case 2:
                return bilinear(dirs[0], dirs[1]) + bilinear(dirs[1], dirs[0]);
            default:
                return zeros(dim);
            }
        });
}

TargetOperator benchmark_quadratic(int ambient_dim, int n_terms, std::uint64_t seed)
{
    if (n_terms < 0 || n_terms > ambient_dim) {
        throw DomainError("benchmark_quadratic: need 0 <= n_terms <= ambient_dim");
    }
    Vector weights(ambient_dim);
    for (int i = 0; i < ambient_dim; ++i) {
        weights(i) = 1.0 / (i + 1);
    }
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    auto decaying_unit = [&] {
        Vector u(ambient_dim);
        for (int i = 0; i < ambient_dim; ++i) {
            u(i) = normal(rng) / (i + 1);
        }
        return Vector(u / u.norm());
    };
    std::vector<BilinearTerm> terms;
    for (int j = 0; j < n_terms; ++j) {
        BilinearTerm t;
        t.beta = 1.0 / (j + 1);
        t.w = decaying_unit();
        t.v = decaying_unit();
        terms.push_back(std::move(t));
    }
    return quadratic_target(std::move(weights), std::move(terms));
}

TargetOperator nemytskii_target(ScalarMap phi, int quad_points, int ambient_dim)
{
    if (quad_points < 2 * ambient_dim) {
        throw DomainError("nemytskii_target: need quad_points >= 2 * ambient_dim");
    }
    Matrix synthesis(quad_points, ambient_dim);
    for (int q = 0; q < quad_points; ++q) {
        synthesis.row(q) = synthesis_row(ambient_dim, (q + 0.5) / quad_points);
    }
    Eigen::JacobiSVD<Matrix> svd(synthesis, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double condition = sv(0) / sv(sv.size() - 1);
    if (!(condition <= 1e8)) {
        throw NumericalError("nemytskii_target: synthesis is ill-conditioned (cond " + std::to_string(condition) +
                             ")");
    }
    Matrix analysis = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

    struct Maps {
        Matrix synthesis;
        Matrix analysis;
    };
    auto maps = std::make_shared<const Maps>(Maps{std::move(synthesis), std::move(analysis)});

    TargetOperator::Traits traits{"nemytskii", ambient_dim, ambient_dim, kMaxJetOrder, GrowthCertificate{},
                                  phi == ScalarMap::identity};
    return TargetOperator(
        std::move(traits),
        [maps, phi](const Coeffs& u) -> Coeffs {
            Vector values = maps->synthesis * u;
            for (Eigen::Index q = 0; q < values.size(); ++q) {
                values(q) = scalar_derivatives(phi, values(q), 0)[0];
            }
            return maps->analysis * values;
        },
        [maps, phi](const Coeffs& u, std::span<const Coeffs> dirs) -> Coeffs {
            std::vector<Vector> grid_dirs;
            grid_dirs.reserve(dirs.size());
            for (const auto& h : dirs) {
                grid_dirs.push_back(maps->synthesis * h);
            }
            const MultiJet jet = apply_pointwise(phi, lift(Vector(maps->synthesis * u), grid_dirs));
            return maps->analysis * jet.top();
        });
}

TargetOperator cylindrical_approximation(const TargetOperator& target, int d, int m)
{
    if (d < 1 || m < 1 || d > target.input_dim() || m > target.output_dim()) {
        throw DomainError("cylindrical_approximation: need 1 <= d <= D_in and 1 <= m <= D_out");
    }
    TargetOperator::Traits traits = target.traits();
    traits.name = target.name() + "_cyl_" + std::to_string(d) + "_" + std::to_string(m);
    return TargetOperator(
        std::move(traits), [target, d, m](const Coeffs& x) { return truncate(target.eval(truncate(x, d)), m); },
        [target, d, m](const Coeffs& x, std::span<const Coeffs> dirs) {
            const std::vector<Coeffs> projected = truncate_all(dirs, d);
            return truncate(target.deriv(truncate(x, d), projected), m);
        });
}

TargetOperator as_target(const EdaModel& model)
{
    auto shared = std::make_shared<const EdaModel>(model);
    TargetOperator::Traits traits{"eda", model.input_dim(), model.output_dim(), model.max_order(),
                                  GrowthCertificate{}, model.net().is_affine()};
    return TargetOperator(
        std::move(traits), [shared](const Coeffs& x) { return eda_eval(*shared, x); },
        [shared](const Coeffs& x, std::span<const Coeffs> dirs) { return eda_derivative(*shared, x, dirs); });
}

Matrix assemble_jacobian(const TargetOperator& op, const Coeffs& x)
{
    Matrix jac(op.output_dim(), op.input_dim());
    for (int j = 0; j < op.input_dim(); ++j) {
        const Coeffs e = Coeffs::Unit(op.input_dim(), j);
        jac.col(j) = op.deriv(x, std::span(&e, 1));
    }
    return jac;
}

std::vector<Matrix> assemble_hessian(const TargetOperator& op, const Coeffs& x)
{
    const int n = op.input_dim();
    std::vector<Matrix> slices(static_cast<std::size_t>(op.output_dim()), Matrix::Zero(n, n));
    std::array<Coeffs, 2> dirs;
    for (int a = 0; a < n; ++a) {
        dirs[0] = Coeffs::Unit(n, a);
        for (int b = a; b < n; ++b) {
            dirs[1] = Coeffs::Unit(n, b);
            const Coeffs value = op.deriv(x, dirs);
            for (int r = 0; r < op.output_dim(); ++r) {
                slices[static_cast<std::size_t>(r)](a, b) = value(r);
                slices[static_cast<std::size_t>(r)](b, a) = value(r);
            }
        }
    }
    return slices;
}

} // namespace dilab
