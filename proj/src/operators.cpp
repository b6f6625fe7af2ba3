#include "cqlab/operators.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <string>

namespace cqlab {

namespace {

double log2_clamped(double x) { return std::log2(x); }

void check_square(const Matrix& m, const char* who) {
    if (m.rows() == 0 || m.rows() != m.cols())
        throw ArgumentError(std::string(who) + ": matrix must be square and nonempty");
}

}  // namespace

// ------------- wrapper types -------------

HermitianOperator::HermitianOperator(Matrix m) {
    check_square(m, "HermitianOperator");
    const double skew = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (skew > kHermitianTol)
        throw ArgumentError("HermitianOperator: skew part " + std::to_string(skew) +
                            " exceeds tolerance");
    m_ = 0.5 * (m + m.adjoint().eval());
}

DensityOperator::DensityOperator(HermitianOperator base) : base_(std::move(base)) {
    const double tr = base_.trace();
    if (std::abs(tr - 1.0) > kTraceTol)
        throw ArgumentError("DensityOperator: trace " + std::to_string(tr) + " is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(base_.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("DensityOperator: eigenvalue validation failed to converge");
    if (solver.eigenvalues().minCoeff() < kEigenvalueFloor)
        throw ArgumentError("DensityOperator: eigenvalue " +
                            std::to_string(solver.eigenvalues().minCoeff()) +
                            " below the allowed floor");
}

ProjectionOperator::ProjectionOperator(HermitianOperator base) : base_(std::move(base)) {
    const Matrix& p = base_.matrix();
    const double defect = (p * p - p).cwiseAbs().maxCoeff();
    if (defect > kProjectionTol)
        throw ArgumentError("ProjectionOperator: idempotency defect " + std::to_string(defect));
}

int ProjectionOperator::rank() const { return static_cast<int>(std::lround(base_.trace())); }

ProjectionOperator ProjectionOperator::zero(int dim) {
    return ProjectionOperator(HermitianOperator(Matrix::Zero(dim, dim)));
}

ProjectionOperator ProjectionOperator::identity(int dim) {
    return ProjectionOperator(HermitianOperator(Matrix::Identity(dim, dim)));
}

ProjectionOperator ProjectionOperator::from_isometry(const Matrix& columns) {
    if (columns.cols() == 0)
        return ProjectionOperator::zero(static_cast<int>(columns.rows()));
    return ProjectionOperator(HermitianOperator(columns * columns.adjoint()));
}

// ------------- core operations -------------

Matrix kron(const Matrix& a, const Matrix& b, long dimension_cap) {
    const long dim = static_cast<long>(a.rows()) * static_cast<long>(b.rows());
    if (dim > dimension_cap)
        throw ResourceError("kron: result dimension " + std::to_string(dim) +
                            " exceeds cap " + std::to_string(dimension_cap));
    return Eigen::kroneckerProduct(a, b);
}

HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b,
                                 long dimension_cap) {
    return HermitianOperator(kron(a.matrix(), b.matrix(), dimension_cap));
}

Matrix partial_trace(const Matrix& m, int d1, int d2, TracedFactor traced) {
    if (d1 <= 0 || d2 <= 0 || m.rows() != static_cast<long>(d1) * d2)
        throw ArgumentError("partial_trace: dimension does not factor as requested");
    if (traced == TracedFactor::Second) {
        Matrix out = Matrix::Zero(d1, d1);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j)
                for (int k = 0; k < d2; ++k) out(i, j) += m(i * d2 + k, j * d2 + k);
        return out;
    }
    Matrix out = Matrix::Zero(d2, d2);
    for (int i = 0; i < d2; ++i)
        for (int j = 0; j < d2; ++j)
            for (int k = 0; k < d1; ++k) out(i, j) += m(k * d2 + i, k * d2 + j);
    return out;
}

DensityOperator partial_trace(const DensityOperator& d, int d1, int d2, TracedFactor traced) {
    return DensityOperator(partial_trace(d.matrix(), d1, d2, traced));
}

Spectrum eigh(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigh: eigensolver failed to converge at dim " +
                           std::to_string(hermitian.rows()));
    // Eigen returns ascending order; flip to descending.
    const int n = static_cast<int>(hermitian.rows());
    Spectrum s;
    s.eigenvalues = solver.eigenvalues().reverse();
    s.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) s.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    return s;
}

Spectrum eigh(const HermitianOperator& a) { return eigh(a.matrix()); }

double entropy_of_weights(const RealVector& weights) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        const double w = std::min(std::max(weights[i], 0.0), 1.0);
        if (w > 0.0) h -= w * log2_clamped(w);
    }
    return h;
}

double von_neumann_entropy(const DensityOperator& d) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(d.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("von_neumann_entropy: eigensolver failed to converge");
    return entropy_of_weights(solver.eigenvalues());
}

ProjectionOperator range_projection(const HermitianOperator& a) {
    const Spectrum s = eigh(a);
    if (s.eigenvalues.minCoeff() < kEigenvalueFloor)
        throw ArgumentError("range_projection: input has eigenvalue " +
                            std::to_string(s.eigenvalues.minCoeff()) + ", not positive");
    const double lambda_max = s.eigenvalues[0];
    if (lambda_max <= 0.0) return ProjectionOperator::zero(s.dim());
    const double threshold = 1e-10 * lambda_max;
    int rank = 0;
    while (rank < s.dim() && s.eigenvalues[rank] > threshold) ++rank;
    return ProjectionOperator::from_isometry(s.eigenvectors.leftCols(rank));
}

double variational_distance(const DensityOperator& d1, const DensityOperator& d2) {
    if (d1.dim() != d2.dim())
        throw ArgumentError("variational_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(d1.matrix() - d2.matrix(),
                                                 Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("variational_distance: eigensolver failed to converge");
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

// ------------- gentle-measurement bounds -------------

namespace {

// Shared part-1 arithmetic: lhs = tr(d q2 q1 q2) against 1 - eps1 - 2 sqrt(eps2).
void fill_pinch_part(GentleBoundsReport& r, const Matrix& d, const Matrix& q1, const Matrix& q2) {
    r.lhs_pinch = (d * q2 * q1 * q2).trace().real();
    r.bound_pinch = 1.0 - r.eps1 - 2.0 * std::sqrt(std::max(r.eps2, 0.0));
    if (r.lhs_pinch < r.bound_pinch - 1e-9)
        throw NumericError("gentle_bounds: pinching inequality violated");
}

}  // namespace

GentleBoundsReport gentle_bounds(const HermitianOperator& d, const ProjectionOperator& q1,
                                 const ProjectionOperator& q2) {
    GentleBoundsReport r;
    const long bipartite_dim = static_cast<long>(q1.dim()) * q2.dim();
    if (q1.dim() == d.dim() && q2.dim() == d.dim() && bipartite_dim != d.dim()) {
        // Part 1 on a single space: 0 <= d <= 1, tr d <= 1.
        Eigen::SelfAdjointEigenSolver<Matrix> solver(d.matrix(), Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw NumericError("gentle_bounds: eigensolver failed to converge");
        if (solver.eigenvalues().minCoeff() < kEigenvalueFloor ||
            solver.eigenvalues().maxCoeff() > 1.0 + 1e-9)
            throw ArgumentError("gentle_bounds: operator is not between 0 and 1");
        if (d.trace() > 1.0 + kTraceTol)
            throw ArgumentError("gentle_bounds: trace exceeds 1");
        r.eps1 = 1.0 - (d.matrix() * q1.matrix()).trace().real();
        r.eps2 = 1.0 - (d.matrix() * q2.matrix()).trace().real();
        fill_pinch_part(r, d.matrix(), q1.matrix(), q2.matrix());
        return r;
    }
    if (bipartite_dim == d.dim()) {
        // Part 2 needs a genuine density operator on the product space; its
        // epsilons are read off the marginals. Part 1 is reported alongside via
        // the embeddings q1 x 1 and 1 x q2.
        const DensityOperator dd(d);
        const int n1 = q1.dim(), n2 = q2.dim();
        const Matrix m1 = partial_trace(d.matrix(), n1, n2, TracedFactor::Second);
        const Matrix m2 = partial_trace(d.matrix(), n1, n2, TracedFactor::First);
        r.eps1 = 1.0 - (m1 * q1.matrix()).trace().real();
        r.eps2 = 1.0 - (m2 * q2.matrix()).trace().real();
        const Matrix big_q1 = kron(q1.matrix(), Matrix::Identity(n2, n2));
        const Matrix big_q2 = kron(Matrix::Identity(n1, n1), q2.matrix());
        fill_pinch_part(r, d.matrix(), big_q1, big_q2);
        const double lhs2 = (d.matrix() * kron(q1.matrix(), q2.matrix())).trace().real();
        const double bound2 = 1.0 - r.eps1 - std::sqrt(std::max(r.eps2, 0.0));
        if (lhs2 < bound2 - 1e-9)
            throw NumericError("gentle_bounds: tensor inequality violated");
        r.lhs_tensor = lhs2;
        r.bound_tensor = bound2;
        return r;
    }
    throw ArgumentError("gentle_bounds: projection dims match neither d's space nor a factorization");
}

}  // namespace cqlab
