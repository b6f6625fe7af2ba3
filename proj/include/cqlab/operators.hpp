#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "cqlab/errors.hpp"

namespace cqlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Dimension guard for tensor constructions. Exponential blow-up must fail loudly.
inline constexpr long kDefaultDimensionCap = 1L << 16;

// Construction tolerances, shared by the wrapper types below.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kProjectionTol = 1e-10;

// ------------- operator wrappers -------------

// Self-adjoint matrix. Construction rejects inputs whose skew part exceeds
// kHermitianTol and stores the exactly symmetrized matrix.
class HermitianOperator {
  public:
    explicit HermitianOperator(Matrix m);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    double trace() const { return m_.trace().real(); }

  private:
    Matrix m_;
};

// Unit-trace positive operator. Eigenvalues below kEigenvalueFloor or a trace
// off by more than kTraceTol are construction errors, not warnings.
class DensityOperator {
  public:
    explicit DensityOperator(HermitianOperator base);
    explicit DensityOperator(Matrix m) : DensityOperator(HermitianOperator(std::move(m))) {}

    int dim() const { return base_.dim(); }
    const Matrix& matrix() const { return base_.matrix(); }
    const HermitianOperator& base() const { return base_; }

  private:
    HermitianOperator base_;
};

// Orthogonal projection: P*P = P within kProjectionTol entrywise.
class ProjectionOperator {
  public:
    explicit ProjectionOperator(HermitianOperator base);
    explicit ProjectionOperator(Matrix m) : ProjectionOperator(HermitianOperator(std::move(m))) {}

    int dim() const { return base_.dim(); }
    const Matrix& matrix() const { return base_.matrix(); }
    const HermitianOperator& base() const { return base_; }
    // Rank recovered from the trace (eigenvalues are 0/1).
    int rank() const;

    static ProjectionOperator zero(int dim);
    static ProjectionOperator identity(int dim);
    // Projection onto the span of the given orthonormal columns.
    static ProjectionOperator from_isometry(const Matrix& columns);

  private:
    HermitianOperator base_;
};

// Eigensystem of a hermitian operator, eigenvalues sorted descending,
// eigenvectors as matching orthonormal columns.
struct Spectrum {
    RealVector eigenvalues;
    Matrix eigenvectors;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
};

// ------------- core operations -------------

HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b,
                                 long dimension_cap = kDefaultDimensionCap);

// Raw Kronecker product with the same cap check; building block for the typed overloads.
Matrix kron(const Matrix& a, const Matrix& b, long dimension_cap = kDefaultDimensionCap);

enum class TracedFactor { First, Second };

// Partial trace over one tensor factor of a d1*d2-dimensional operator.
DensityOperator partial_trace(const DensityOperator& d, int d1, int d2, TracedFactor traced);
Matrix partial_trace(const Matrix& m, int d1, int d2, TracedFactor traced);

Spectrum eigh(const HermitianOperator& a);
Spectrum eigh(const Matrix& hermitian);

// Shannon entropy (base 2) of a list of nonnegative weights; entries are
// clamped at 0 and the 0*log(0) = 0 convention applies. Weights need not sum
// to 1, which is what the pinched-entropy split relies on.
double entropy_of_weights(const RealVector& weights);

// Von Neumann entropy in bits, in [0, log2 dim].
double von_neumann_entropy(const DensityOperator& d);

// Projection onto the span of eigenvectors with eigenvalue > 1e-10 * lambda_max.
// The threshold is relative so the result is scale-free; the zero operator maps
// to the zero projection. Input must be positive up to kEigenvalueFloor.
ProjectionOperator range_projection(const HermitianOperator& a);

// Half the trace norm of the difference; equals the sup over 0 <= b <= 1 of
// |tr((d1 - d2) b)|. Value in [0, 1].
double variational_distance(const DensityOperator& d1, const DensityOperator& d2);

// ------------- gentle-measurement bounds -------------

struct GentleBoundsReport {
    double eps1 = 0.0;
    double eps2 = 0.0;
    // Part 1: tr(d q2 q1 q2) >= 1 - eps1 - 2 sqrt(eps2).
    double lhs_pinch = 0.0;
    double bound_pinch = 0.0;
    // Part 2, bipartite inputs only: tr(D (q1 x q2)) >= 1 - eps1 - sqrt(eps2).
    std::optional<double> lhs_tensor;
    std::optional<double> bound_tensor;
};

// Two call shapes, disambiguated by dimensions:
//   - q1.dim == q2.dim == d.dim: part 1 only, with eps_i = 1 - tr(d q_i).
//   - q1.dim * q2.dim == d.dim: d must be a density operator on the tensor
//     product; eps_i come from the partial traces, q_i are embedded as
//     q1 x 1 and 1 x q2, and both parts are reported.
// The inequalities are theorems; a violation beyond 1e-9 raises NumericError.
GentleBoundsReport gentle_bounds(const HermitianOperator& d, const ProjectionOperator& q1,
                                 const ProjectionOperator& q2);

}  // namespace cqlab
