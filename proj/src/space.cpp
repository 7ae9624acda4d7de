#include "dilab/space.hpp"

#include "dilab/rng.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace dilab {
namespace {

constexpr int kGaussPoints = 20;

/// Nodes and weights of the composite 20-point Gauss-Legendre rule on [a, b].
void composite_gauss(double a, double b, int panels, std::vector<double>& nodes, std::vector<double>& weights)
{
    using Rule = boost::math::quadrature::gauss<double, kGaussPoints>;
    const auto& abscissa = Rule::abscissa();
    const auto& w = Rule::weights();
    nodes.clear();
    weights.clear();
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double half = 0.5 * h;
        for (std::size_t k = 0; k < abscissa.size(); ++k) {
            nodes.push_back(mid - half * abscissa[k]);
            weights.push_back(half * w[k]);
            nodes.push_back(mid + half * abscissa[k]);
            weights.push_back(half * w[k]);
        }
    }
}

bool is_standard_rows(const Matrix& rows)
{
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) {
            if (rows(i, j) != (i == j ? 1.0 : 0.0)) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

void BasisSpec::validate() const
{
    if (ambient_dim < 1) {
        throw DomainError("BasisSpec: ambient_dim must be >= 1");
    }
}

double sine_basis(int i, double s) { return std::numbers::sqrt2 * std::sin(i * std::numbers::pi * s); }

Eigen::RowVectorXd synthesis_row(int ambient_dim, double s)
{
    Eigen::RowVectorXd row(ambient_dim);
    for (int i = 0; i < ambient_dim; ++i) {
        row(i) = sine_basis(i + 1, s);
    }
    return row;
}

double synthesize(const Coeffs& x, double s) { return synthesis_row(static_cast<int>(x.size()), s).dot(x); }

double integrate(const std::function<double(double)>& f, double a, double b, int panels)
{
    std::vector<double> nodes, weights;
    composite_gauss(a, b, panels, nodes, weights);
    double total = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        total += weights[k] * f(nodes[k]);
    }
    return total;
}

Encoder::Encoder(Matrix functionals, EncoderTag tag) : rows_(std::move(functionals)), tag_(tag)
{
    if (rows_.rows() < 1 || rows_.cols() < 1) {
        throw DomainError("Encoder: need at least one functional on a nonempty space");
    }
    if (!rows_.allFinite()) {
        throw DomainError("Encoder: functionals must be finite");
    }
    if (tag_ == EncoderTag::projection && !is_standard_rows(rows_)) {
        throw DomainError("Encoder: projection encoders use the leading standard basis rows");
    }
}

Encoder Encoder::projection(int n, int ambient_dim)
{
    if (n < 1 || n > ambient_dim) {
        throw DomainError("Encoder::projection: need 1 <= n <= ambient_dim");
    }
    return Encoder(Matrix::Identity(n, ambient_dim), EncoderTag::projection);
}

Decoder::Decoder(Matrix elements) : cols_(std::move(elements))
{
    if (cols_.cols() < 1 || cols_.rows() < 1) {
        throw DomainError("Decoder: need at least one element");
    }
    if (!cols_.allFinite()) {
        throw DomainError("Decoder: elements must be finite");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(cols_);
    if (qr.rank() < cols_.cols()) {
        throw DomainError("Decoder: elements are linearly dependent");
    }
}

Decoder Decoder::projection(int n, int ambient_dim)
{
    if (n < 1 || n > ambient_dim) {
        throw DomainError("Decoder::projection: need 1 <= n <= ambient_dim");
    }
    return Decoder(Matrix::Identity(ambient_dim, n));
}

Vector encode(const Encoder& encoder, const Coeffs& x)
{
    require_dim(x.size(), encoder.ambient_dim(), "encode");
    return encoder.functionals() * x;
}

Coeffs decode(const Decoder& decoder, const Vector& y)
{
    require_dim(y.size(), decoder.rank(), "decode");
    return decoder.elements() * y;
}

Coeffs partial_sum(const Encoder& encoder, const Decoder& decoder, const Coeffs& x)
{
    if (encoder.rank() != decoder.rank()) {
        throw DimensionError("partial_sum: encoder and decoder ranks differ");
    }
    return decode(decoder, encode(encoder, x));
}

Matrix partial_sum_matrix(const Encoder& encoder, const Decoder& decoder)
{
    if (encoder.rank() != decoder.rank()) {
        throw DimensionError("partial_sum_matrix: encoder and decoder ranks differ");
    }
    return decoder.elements() * encoder.functionals();
}

Coeffs truncate(const Coeffs& x, int n)
{
    Coeffs out = x;
    if (n < out.size()) {
        out.tail(out.size() - std::max(n, 0)).setZero();
    }
    return out;
}

PartitionOfUnity::PartitionOfUnity(std::vector<double> sensors, double epsilon)
    : sensors_(std::move(sensors)), epsilon_(epsilon)
{
    if (sensors_.empty()) {
        throw DomainError("PartitionOfUnity: no sensors");
    }
    if (!(epsilon_ > 0.0)) {
        throw DomainError("PartitionOfUnity: epsilon must be positive");
    }
    std::vector<double> sorted = sensors_;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0.0 || sorted.back() > 1.0) {
        throw DomainError("PartitionOfUnity: sensors must lie in [0,1]");
    }
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DomainError("PartitionOfUnity: sensors must be pairwise distinct");
    }
    // Every y in [0,1] must be strictly closer than epsilon to some sensor.
    bool covered = sorted.front() < epsilon_ && 1.0 - sorted.back() < epsilon_;
    for (std::size_t i = 1; i < sorted.size() && covered; ++i) {
        covered = 0.5 * (sorted[i] - sorted[i - 1]) < epsilon_;
    }
    if (!covered) {
        throw DomainError("PartitionOfUnity: sensors do not form an epsilon-cover of [0,1]");
    }
}

Vector PartitionOfUnity::weights(double y) const
{
    const int n = size();
    Vector exponent = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    double largest = -std::numeric_limits<double>::infinity();
    const double eps2 = epsilon_ * epsilon_;
    for (int i = 0; i < n; ++i) {
        const double d = y - sensors_[i];
        const double gap = eps2 - d * d;
        if (std::abs(d) < epsilon_ && gap > 0.0) {
            exponent(i) = -1.0 / gap;
            largest = std::max(largest, exponent(i));
        }
    }
    if (!std::isfinite(largest)) {
        throw DomainError("PartitionOfUnity: point outside the cover");
    }
    Vector w(n);
    for (int i = 0; i < n; ++i) {
        w(i) = std::isfinite(exponent(i)) ? std::exp(exponent(i) - largest) : 0.0;
    }
    return w / w.sum();
}

double PartitionOfUnity::reconstruct(const Vector& values, double y) const
{
    require_dim(values.size(), size(), "PartitionOfUnity::reconstruct");
    return weights(y).dot(values);
}

DeepOnetPair deeponet_encoder(std::span<const double> sensors, double epsilon, int ambient_dim)
{
    PartitionOfUnity partition(std::vector<double>(sensors.begin(), sensors.end()), epsilon);
    const int n = partition.size();

    Matrix rows(n, ambient_dim);
    for (int i = 0; i < n; ++i) {
        rows.row(i) = synthesis_row(ambient_dim, partition.sensors()[i]);
    }

    // Decoder elements: c_ij = int_0^1 P_i(s) e_j(s) ds.
    std::vector<double> nodes, weights;
    const int panels = std::max(64, static_cast<int>(std::ceil(16.0 / epsilon)));
    composite_gauss(0.0, 1.0, panels, nodes, weights);
    Matrix elements = Matrix::Zero(ambient_dim, n);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const Vector p = partition.weights(nodes[q]);
        const Eigen::RowVectorXd e = synthesis_row(ambient_dim, nodes[q]);
        elements.noalias() += weights[q] * e.transpose() * p.transpose();
    }

    return DeepOnetPair{Encoder(std::move(rows), EncoderTag::deeponet), Decoder(std::move(elements)),
                        std::move(partition)};
}

PcaPair pca_encoder(std::span<const Coeffs> samples, int n_modes)
{
    if (samples.empty()) {
        throw DomainError("pca_encoder: no samples");
    }
    const auto dim = samples.front().size();
    if (n_modes < 1 || n_modes > dim) {
        throw DomainError("pca_encoder: need 1 <= N <= D_amb");
    }
    if (static_cast<Eigen::Index>(samples.size()) < n_modes) {
        throw DomainError("pca_encoder: fewer samples than requested modes");
    }
    Matrix data(static_cast<Eigen::Index>(samples.size()), dim);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        require_dim(samples[k].size(), dim, "pca_encoder");
        data.row(static_cast<Eigen::Index>(k)) = samples[k].transpose();
    }
    const Matrix covariance = data.transpose() * data / static_cast<double>(samples.size());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("pca_encoder: eigendecomposition failed");
    }
    const Vector eigenvalues = solver.eigenvalues().reverse();
    const Matrix vectors = solver.eigenvectors().rowwise().reverse();

    const double top = eigenvalues(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (top > 0.0 && eigenvalues(i) > 1e-12 * top) {
            ++rank;
        }
    }
    if (rank < n_modes) {
        throw DomainError("pca_encoder: degenerate covariance, rank " + std::to_string(rank) + " < " +
                          std::to_string(n_modes));
    }

    Matrix modes = vectors.leftCols(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        Eigen::Index pivot = 0;
        modes.col(j).cwiseAbs().maxCoeff(&pivot);
        if (modes(pivot, j) < 0.0) {
            modes.col(j) *= -1.0;
        }
    }
    return PcaPair{Encoder(modes.transpose(), EncoderTag::pca), Decoder(modes), eigenvalues};
}

CompactSpec::CompactSpec(std::vector<double> radii, CompactShape shape) : radii_(std::move(radii)), shape_(shape)
{
    if (radii_.empty()) {
        throw DomainError("CompactSpec: no radii");
    }
    for (std::size_t i = 0; i < radii_.size(); ++i) {
        if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i])) {
            throw DomainError("CompactSpec: radii must be positive and finite");
        }
        if (i > 0 && radii_[i] > radii_[i - 1]) {
            throw DomainError("CompactSpec: radii must be nonincreasing");
        }
    }
}

CompactSpec CompactSpec::hilbert_cube(int ambient_dim, double c0, CompactShape shape)
{
    if (ambient_dim < 1) {
        throw DomainError("CompactSpec::hilbert_cube: ambient_dim must be >= 1");
    }
    std::vector<double> radii(static_cast<std::size_t>(ambient_dim));
    for (int i = 1; i <= ambient_dim; ++i) {
        radii[static_cast<std::size_t>(i - 1)] = c0 / (static_cast<double>(i) * i);
    }
    return CompactSpec(std::move(radii), shape);
}

double CompactSpec::tail_radius(int n) const
{
    double s = 0.0;
    for (std::size_t i = static_cast<std::size_t>(std::max(n, 0)); i < radii_.size(); ++i) {
        s += radii_[i] * radii_[i];
    }
    return std::sqrt(s);
}

bool CompactSpec::contains(const Coeffs& x) const
{
    if (x.size() != ambient_dim()) {
        return false;
    }
    if (shape_ == CompactShape::box) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (std::abs(x(i)) > radii_[static_cast<std::size_t>(i)]) {
                return false;
            }
        }
        return true;
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double t = x(i) / radii_[static_cast<std::size_t>(i)];
        s += t * t;
    }
    return s <= 1.0 + 1e-12;
}

std::vector<Coeffs> sample_compact(const CompactSpec& compact, int n, std::uint64_t seed)
{
    if (n < 1) {
        throw DomainError("sample_compact: n must be >= 1");
    }
    Rng rng = make_rng(seed);
    const int dim = compact.ambient_dim();
    const auto& c = compact.radii();
    std::vector<Coeffs> out;
    out.reserve(static_cast<std::size_t>(n));
    if (compact.shape() == CompactShape::box) {
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int k = 0; k < n; ++k) {
            Coeffs x(dim);
            for (int i = 0; i < dim; ++i) {
                x(i) = c[static_cast<std::size_t>(i)] * unif(rng);
            }
            out.push_back(std::move(x));
        }
        return out;
    }
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < n; ++k) {
        Vector z(dim);
        for (int i = 0; i < dim; ++i) {
            z(i) = normal(rng);
        }
        const double radius = std::pow(unit(rng), 1.0 / dim) / z.norm();
        Coeffs x(dim);
        for (int i = 0; i < dim; ++i) {
            x(i) = c[static_cast<std::size_t>(i)] * radius * z(i);
        }
        out.push_back(std::move(x));
    }
    return out;
}

void write_points_csv(std::ostream& out, std::span<const Coeffs> points)
{
    const auto dim = points.empty() ? 0 : points.front().size();
    out << "index";
    for (Eigen::Index i = 1; i <= dim; ++i) {
        out << ",coeff_" << i;
    }
    out << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t k = 0; k < points.size(); ++k) {
        out << k;
        for (Eigen::Index i = 0; i < points[k].size(); ++i) {
            out << ',' << points[k](i);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

} // namespace dilab
