#pragma once

// Truncated function spaces: bases, linear encoders/decoders, partial sums and
// samplers for Hilbert-cube compacts.

#include "dilab/common.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace dilab {

inline constexpr int kDefaultAmbientDim = 64;

enum class BasisKind { sine_l2_unit_interval, abstract_coefficient };

struct BasisSpec {
    BasisKind kind = BasisKind::sine_l2_unit_interval;
    int ambient_dim = kDefaultAmbientDim;

    void validate() const;
};

/// e_i(s) = sqrt(2) sin(i pi s), i >= 1. Orthonormal in L2(0,1).
double sine_basis(int i, double s);

/// Row (e_1(s), ..., e_D(s)): the point-evaluation functional u -> u(s) in coefficients.
Eigen::RowVectorXd synthesis_row(int ambient_dim, double s);

/// u(s) = sum_i x_i e_i(s).
double synthesize(const Coeffs& x, double s);

/// Composite Gauss-Legendre rule on [a, b]; smooth integrands only.
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64);

enum class EncoderTag { projection, deeponet, pca, frame };

/// Finite family of linear functionals a_1..a_N, stored as the rows of an N x D matrix.
/// The pairing <a_i, x> is the coefficient dot product.
class Encoder {
public:
    Encoder(Matrix functionals, EncoderTag tag);

    /// First n standard-basis rows.
    static Encoder projection(int n, int ambient_dim);

    const Matrix& functionals() const noexcept { return rows_; }
    EncoderTag tag() const noexcept { return tag_; }
    int rank() const noexcept { return static_cast<int>(rows_.rows()); }
    int ambient_dim() const noexcept { return static_cast<int>(rows_.cols()); }

private:
    Matrix rows_;
    EncoderTag tag_;
};

/// Linearly independent elements e_1..e_N' of the ambient space, stored as columns (D x N').
class Decoder {
public:
    explicit Decoder(Matrix elements);

    static Decoder projection(int n, int ambient_dim);

    const Matrix& elements() const noexcept { return cols_; }
    int rank() const noexcept { return static_cast<int>(cols_.cols()); }
    int ambient_dim() const noexcept { return static_cast<int>(cols_.rows()); }

private:
    Matrix cols_;
};

Vector encode(const Encoder& encoder, const Coeffs& x);
Coeffs decode(const Decoder& decoder, const Vector& y);
Coeffs partial_sum(const Encoder& encoder, const Decoder& decoder, const Coeffs& x);

/// Matrix of D o E on the ambient coordinates.
Matrix partial_sum_matrix(const Encoder& encoder, const Decoder& decoder);

/// Coordinate truncation P_n: keeps the first n coefficients and zeroes the rest.
Coeffs truncate(const Coeffs& x, int n);

/// Normalized bump partition of unity on [0,1] subordinate to an epsilon-cover by sensors:
/// P_i(y) = P~_i(y) / sum_l P~_l(y), P~_i(y) = exp(-1 / (eps^2 - |y - y_i|^2)) inside the ball.
class PartitionOfUnity {
public:
    PartitionOfUnity(std::vector<double> sensors, double epsilon);

    const std::vector<double>& sensors() const noexcept { return sensors_; }
    double epsilon() const noexcept { return epsilon_; }
    int size() const noexcept { return static_cast<int>(sensors_.size()); }

    /// (P_1(y), ..., P_n(y)).
    Vector weights(double y) const;

    /// sum_i values_i P_i(y): the reconstruction of a function from its sensor values.
    double reconstruct(const Vector& values, double y) const;

private:
    std::vector<double> sensors_;
    double epsilon_;
};

struct DeepOnetPair {
    Encoder encoder;            ///< point evaluation at the sensors, via synthesis rows
    Decoder decoder;            ///< L2(0,1) sine coefficients of the partition functions
    PartitionOfUnity partition; ///< exact function-level partition
};

/// Throws DomainError when sensors repeat, epsilon <= 0 or [0,1] is not covered.
DeepOnetPair deeponet_encoder(std::span<const double> sensors, double epsilon, int ambient_dim);

struct PcaPair {
    Encoder encoder;
    Decoder decoder;
    Vector eigenvalues; ///< all eigenvalues of the uncentered covariance, nonincreasing
};

/// Top-n eigenvectors of (1/m) sum_k x_k x_k^T. Throws DomainError on rank < n.
PcaPair pca_encoder(std::span<const Coeffs> samples, int n_modes);

enum class CompactShape { box, ellipsoid };

/// Box {|x_i| <= c_i} or ellipsoid {sum (x_i / c_i)^2 <= 1} with nonincreasing radii.
class CompactSpec {
public:
    CompactSpec(std::vector<double> radii, CompactShape shape);

    /// Radii c_i = c0 / i^2.
    static CompactSpec hilbert_cube(int ambient_dim, double c0 = 1.0, CompactShape shape = CompactShape::box);

    const std::vector<double>& radii() const noexcept { return radii_; }
    CompactShape shape() const noexcept { return shape_; }
    int ambient_dim() const noexcept { return static_cast<int>(radii_.size()); }

    /// sqrt(sum_{i > n} c_i^2), the largest possible |x - P_n x| over the box.
    double tail_radius(int n) const;

    bool contains(const Coeffs& x) const;

private:
    std::vector<double> radii_;
    CompactShape shape_;
};

std::vector<Coeffs> sample_compact(const CompactSpec& compact, int n, std::uint64_t seed);

/// CSV with header "index,coeff_1,...,coeff_D".
void write_points_csv(std::ostream& out, std::span<const Coeffs> points);

} // namespace dilab
