#include "stirap/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace stirap::linalg {

namespace {

void require_finite(const Eigen::MatrixXcd& m, const char* who) {
    if (!m.allFinite()) {
        throw invalid_input_error(std::string(who) + ": matrix has NaN or Inf entries");
    }
}

} // namespace

SubspaceBasis::SubspaceBasis(Eigen::MatrixXcd cols) : vectors(std::move(cols)) {
    require_finite(vectors, "SubspaceBasis");
    if (vectors.rows() == 0) {
        throw invalid_input_error("SubspaceBasis: ambient dimension must be > 0");
    }
    if (orthonormality_defect(vectors) > tau_orth) {
        throw invalid_input_error("SubspaceBasis: columns are not orthonormal");
    }
}

double orthonormality_defect(const Eigen::MatrixXcd& cols) {
    if (cols.cols() == 0) return 0.0;
    Eigen::MatrixXcd g = cols.adjoint() * cols;
    g -= Eigen::MatrixXcd::Identity(cols.cols(), cols.cols());
    return g.cwiseAbs().maxCoeff();
}

void normalize_column_phases(Eigen::MatrixXcd& cols) {
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < cols.rows(); ++i) {
            double a = std::abs(cols(i, j));
            if (a > best * (1.0 + 1e-12)) {
                best = a;
                imax = i;
            }
        }
        if (best <= 0.0) continue;
        complexd pivot = cols(imax, j);
        cols.col(j) *= std::conj(pivot) / std::abs(pivot);
        cols(imax, j) = std::abs(cols(imax, j)); // kill residual imaginary dust
    }
}

SubspaceBasis null_space(const Eigen::MatrixXcd& m, double tol) {
    require_finite(m, "null_space");
    if (m.rows() == 0 || m.cols() == 0) {
        throw invalid_input_error("null_space: matrix must be nonempty");
    }
    if (!(tol > 0.0 && tol < 1.0)) {
        throw invalid_input_error("null_space: tol must lie in (0, 1)");
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;

    Eigen::Index rank = 0;
    if (sigma_max > 0.0) {
        for (Eigen::Index i = 0; i < sigma.size(); ++i) {
            if (sigma(i) > tol * sigma_max) ++rank;
        }
    }

    Eigen::MatrixXcd cols = svd.matrixV().rightCols(m.cols() - rank);
    normalize_column_phases(cols);
    return SubspaceBasis(std::move(cols));
}

SubspaceBasis complement(const SubspaceBasis& sub) {
    const Eigen::Index n = sub.ambient_dim();
    if (sub.dim() == 0) {
        return SubspaceBasis(Eigen::MatrixXcd::Identity(n, n));
    }
    if (sub.dim() == n) {
        return SubspaceBasis::empty(n);
    }
    // Null space of the adjoint of the basis matrix is exactly the complement
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub.vectors.adjoint(), Eigen::ComputeFullV);
    Eigen::MatrixXcd cols = svd.matrixV().rightCols(n - sub.dim());
    normalize_column_phases(cols);
    return SubspaceBasis(std::move(cols));
}

Eigen::MatrixXcd gram(const Eigen::MatrixXcd& vectors) {
    require_finite(vectors, "gram");
    const Eigen::Index n = vectors.cols();
    Eigen::MatrixXcd g(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        g(k, k) = complexd(vectors.col(k).squaredNorm(), 0.0);
        for (Eigen::Index j = k + 1; j < n; ++j) {
            complexd v = vectors.col(k).dot(vectors.col(j)); // <v_k|v_j>
            g(k, j) = v;
            g(j, k) = std::conj(v);
        }
    }
    return g;
}

Eigen::MatrixXcd invert_hermitian(const Eigen::MatrixXcd& g) {
    require_finite(g, "invert_hermitian");
    if (g.rows() != g.cols() || g.rows() == 0) {
        throw invalid_input_error("invert_hermitian: matrix must be square and nonempty");
    }
    if ((g - g.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + g.cwiseAbs().maxCoeff())) {
        throw invalid_input_error("invert_hermitian: matrix is not Hermitian");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("invert_hermitian: eigendecomposition failed");
    }
    const auto& w = es.eigenvalues();
    double wmin = w(0), wmax = w(w.size() - 1);
    if (wmin <= 1e-12 * std::max(wmax, 0.0)) {
        double ratio = wmax > 0.0 ? wmin / wmax : 0.0;
        throw conditioning_error("invert_hermitian: matrix is not safely positive definite", ratio);
    }
    return es.eigenvectors() * w.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::Index matrix_rank(const Eigen::MatrixXcd& m, double tol) {
    require_finite(m, "matrix_rank");
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& sigma = svd.singularValues();
    double sigma_max = sigma(0);
    if (sigma_max <= 0.0) return 0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > tol * sigma_max) ++rank;
    }
    return rank;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> orthonormalize(const Eigen::MatrixXcd& cols) {
    require_finite(cols, "orthonormalize");
    const Eigen::Index n = cols.cols();
    Eigen::MatrixXcd q = cols;
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) { // re-orthogonalize for stability
            for (Eigen::Index k = 0; k < j; ++k) {
                complexd c = q.col(k).dot(q.col(j));
                q.col(j) -= c * q.col(k);
                r(k, j) += c;
            }
        }
        double nrm = q.col(j).norm();
        if (nrm < 1e-12 * std::max(1.0, cols.col(j).norm())) {
            throw invalid_input_error("orthonormalize: columns are linearly dependent");
        }
        r(j, j) = nrm;
        q.col(j) /= nrm;
    }
    return {std::move(q), std::move(r)};
}

} // namespace stirap::linalg
