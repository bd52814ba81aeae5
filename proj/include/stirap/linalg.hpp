// linalg.hpp: dense complex subspace utilities. Null spaces, complements,
// Gram matrices and their inverses, projectors.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "stirap/errors.hpp"

namespace stirap::linalg {

using complexd = std::complex<double>;

constexpr double tau_orth = 1e-10;        // pairwise orthonormality tolerance
constexpr double default_rank_tol = 1e-10; // relative singular-value cutoff

// Orthonormal basis of a subspace, stored as matrix columns.
// A zero-column matrix with positive ambient_dim() is the empty subspace.
struct SubspaceBasis {
    Eigen::MatrixXcd vectors; // ambient_dim x dim, orthonormal columns

    SubspaceBasis() = default;
    explicit SubspaceBasis(Eigen::MatrixXcd cols);

    Eigen::Index ambient_dim() const { return vectors.rows(); }
    Eigen::Index dim() const { return vectors.cols(); }

    // Orthogonal projector onto the subspace (ambient x ambient)
    Eigen::MatrixXcd projector() const { return vectors * vectors.adjoint(); }

    static SubspaceBasis empty(Eigen::Index ambient) {
        return SubspaceBasis(Eigen::MatrixXcd::Zero(ambient, 0));
    }
};

// Rotate the phase of each column so its largest-magnitude entry is real
// positive (first such entry wins ties); makes SVD-derived bases reproducible.
void normalize_column_phases(Eigen::MatrixXcd& cols);

// Orthonormal basis of {v : m v = 0}. A singular value sigma counts as zero
// iff sigma <= tol * sigma_max; a zero matrix returns the whole domain.
SubspaceBasis null_space(const Eigen::MatrixXcd& m, double tol = default_rank_tol);

// Orthogonal complement within the ambient space
SubspaceBasis complement(const SubspaceBasis& sub);

// Hermitian Gram matrix G(k,j) = <v_k|v_j> of the given columns;
// the upper triangle is computed and mirrored so G = G† exactly.
Eigen::MatrixXcd gram(const Eigen::MatrixXcd& vectors);

// Inverse of a Hermitian positive definite matrix via eigendecomposition.
// Throws conditioning_error when min eigenvalue <= 1e-12 * max eigenvalue.
Eigen::MatrixXcd invert_hermitian(const Eigen::MatrixXcd& g);

// Numerical rank under the same relative cutoff used by null_space
Eigen::Index matrix_rank(const Eigen::MatrixXcd& m, double tol = default_rank_tol);

// Gram-Schmidt in column order; returns Q with R upper triangular such that
// cols = Q R. Columns must be linearly independent.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> orthonormalize(const Eigen::MatrixXcd& cols);

// Max deviation of pairwise overlaps from delta_ij
double orthonormality_defect(const Eigen::MatrixXcd& cols);

} // namespace stirap::linalg
