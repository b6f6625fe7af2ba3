#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cqlab/channels.hpp"
#include "cqlab/operators.hpp"

namespace testutil {

using cqlab::Complex;
using cqlab::Matrix;

inline Matrix random_ginibre(int rows, int cols, std::mt19937& gen) {
    std::normal_distribution<double> g;
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = Complex(g(gen), g(gen));
    return m;
}

inline Matrix random_unitary(int dim, std::mt19937& gen) {
    Eigen::HouseholderQR<Matrix> qr(random_ginibre(dim, dim, gen));
    return Matrix(qr.householderQ());
}

inline std::vector<double> random_simplex(int k, std::mt19937& gen) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(k);
    double sum = 0.0;
    for (double& v : p) {
        v = e(gen);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

inline cqlab::HermitianOperator random_hermitian(int dim, std::mt19937& gen) {
    Matrix g = random_ginibre(dim, dim, gen);
    return cqlab::HermitianOperator((g + g.adjoint()) / 2.0);
}

inline cqlab::DensityOperator random_density(int dim, std::mt19937& gen) {
    Matrix u = random_unitary(dim, gen);
    auto p = random_simplex(dim, gen);
    Matrix d = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) d += p[i] * u.col(i) * u.col(i).adjoint();
    return cqlab::DensityOperator(d);
}

inline cqlab::DensityOperator random_pure(int dim, std::mt19937& gen) {
    Matrix g = random_ginibre(dim, 1, gen);
    g /= g.norm();
    return cqlab::DensityOperator(Matrix(g * g.adjoint()));
}

inline cqlab::ProjectionOperator random_projection(int dim, int rank, std::mt19937& gen) {
    if (rank <= 0) return cqlab::ProjectionOperator::zero(dim);
    Matrix u = random_unitary(dim, gen);
    return cqlab::ProjectionOperator::from_isometry(u.leftCols(rank));
}

inline Eigen::MatrixXd random_stochastic(int rows, int cols, std::mt19937& gen) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        auto row = random_simplex(cols, gen);
        for (int c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

// Kraus operators cut from a random isometry, so the map is exactly trace
// preserving up to rounding.
inline cqlab::CPTPMap random_cptp(int dim, int kraus_count, std::mt19937& gen) {
    Eigen::HouseholderQR<Matrix> qr(random_ginibre(dim * kraus_count, dim, gen));
    Matrix thin = qr.householderQ() * Matrix::Identity(dim * kraus_count, dim);
    std::vector<Matrix> kraus;
    kraus.reserve(kraus_count);
    for (int j = 0; j < kraus_count; ++j) kraus.push_back(thin.middleRows(j * dim, dim));
    return cqlab::CPTPMap(std::move(kraus));
}

inline cqlab::CqBlockChannel random_memoryless(int letters, int dim, std::mt19937& gen) {
    std::vector<cqlab::DensityOperator> sig;
    sig.reserve(letters);
    for (int i = 0; i < letters; ++i) sig.push_back(random_density(dim, gen));
    return cqlab::CqBlockChannel::memoryless(cqlab::Alphabet::of_size(letters), std::move(sig));
}

inline double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

}  // namespace testutil
