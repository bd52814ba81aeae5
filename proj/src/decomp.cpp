#include "stirap/decomp.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace stirap::decomp {

using linalg::SubspaceBasis;

namespace {

// Basis of sub restricted to coefficients over the orthonormal columns of
// frame, mapped back to the ambient space with reproducible phases
SubspaceBasis lift(const Eigen::MatrixXcd& frame, const Eigen::MatrixXcd& coeffs) {
    Eigen::MatrixXcd cols = frame * coeffs;
    linalg::normalize_column_phases(cols);
    return SubspaceBasis(std::move(cols));
}

void check_block_orthogonality(const Decomposition& d) {
    auto cross = [](const SubspaceBasis& x, const SubspaceBasis& y) {
        if (x.dim() == 0 || y.dim() == 0) return 0.0;
        return (x.vectors.adjoint() * y.vectors).cwiseAbs().maxCoeff();
    };
    double worst = std::max({cross(d.a_lambda, d.a_dark), cross(d.a_lambda, d.a_bright),
                             cross(d.a_dark, d.a_bright), cross(d.b_lambda, d.b_dark),
                             cross(d.b_lambda, d.b_bright), cross(d.b_dark, d.b_bright),
                             cross(d.e_dark, d.e_coupled)});
    if (worst > 1e-9) {
        throw consistency_error("decompose: subspace blocks are not mutually orthogonal");
    }
}

} // namespace

Decomposition decompose(const atom::LevelSystem& system, double tol) {
    const Eigen::Index da = system.dim_a();
    const Eigen::Index db = system.dim_b();
    const Eigen::Index de = system.dim_e();

    Decomposition d;
    d.a_dark = linalg::null_space(system.A_a.adjoint(), tol);
    d.b_dark = linalg::null_space(system.A_b.adjoint(), tol);
    d.e_dark = linalg::null_space(system.A_b, tol);

    SubspaceBasis a_perp = linalg::complement(d.a_dark);
    SubspaceBasis b_perp = linalg::complement(d.b_dark);
    d.e_coupled = linalg::complement(d.e_dark);

    // Transfer candidates: coupled a-states whose raising image avoids the
    // dark excited subspace
    if (a_perp.dim() == 0) {
        d.a_lambda = SubspaceBasis::empty(da);
        d.a_bright = SubspaceBasis::empty(da);
    } else if (d.e_dark.dim() == 0) {
        d.a_lambda = a_perp;
        d.a_bright = SubspaceBasis::empty(da);
    } else {
        Eigen::MatrixXcd blocked = d.e_dark.vectors.adjoint() * system.A_a.adjoint() * a_perp.vectors;
        SubspaceBasis coeffs = linalg::null_space(blocked, tol);
        d.a_lambda = coeffs.dim() > 0 ? lift(a_perp.vectors, coeffs.vectors)
                                      : SubspaceBasis::empty(da);
        SubspaceBasis rest = linalg::complement(coeffs);
        d.a_bright = rest.dim() > 0 ? lift(a_perp.vectors, rest.vectors)
                                    : SubspaceBasis::empty(da);
    }

    // M = R_b (R_b†R_b)^{-1} R_a† on the transfer subspace, zero elsewhere,
    // assembled in coordinates over the coupled bases
    d.M = Eigen::MatrixXcd::Zero(db, da);
    if (d.a_lambda.dim() > 0 && d.e_coupled.dim() > 0) {
        const Eigen::MatrixXcd& ec = d.e_coupled.vectors;
        Eigen::MatrixXcd r_b = b_perp.vectors.adjoint() * system.A_b * ec;
        Eigen::MatrixXcd r_at = ec.adjoint() * system.A_a.adjoint() * d.a_lambda.vectors;
        Eigen::MatrixXcd gram_b = r_b.adjoint() * r_b;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram_b);
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("decompose: eigendecomposition of R_b†R_b failed");
        }
        const auto& w = es.eigenvalues();
        double wmax = w(w.size() - 1);
        if (w(0) <= 1e-12 * std::max(wmax, 0.0)) {
            throw conditioning_error(
                "decompose: R_b†R_b is numerically singular on the coupled excited subspace",
                wmax > 0.0 ? w(0) / wmax : 0.0);
        }
        Eigen::MatrixXcd solved =
            es.eigenvectors() * w.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint() * r_at;
        Eigen::MatrixXcd m_coords = r_b * solved; // b_perp coords x a_lambda coords
        d.M = b_perp.vectors * m_coords * d.a_lambda.vectors.adjoint();
    }

    // Image of M and its complement within the coupled b subspace
    if (d.a_lambda.dim() > 0) {
        Eigen::MatrixXcd image = d.M * d.a_lambda.vectors;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(image, Eigen::ComputeThinU);
        const auto& sigma = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sigma.size(); ++i) {
            if (sigma(i) > tol * sigma(0)) ++rank;
        }
        if (rank != d.a_lambda.dim()) {
            throw consistency_error("decompose: mapping M is rank-deficient on its domain");
        }
        Eigen::MatrixXcd cols = svd.matrixU().leftCols(rank);
        linalg::normalize_column_phases(cols);
        d.b_lambda = SubspaceBasis(std::move(cols));
    } else {
        d.b_lambda = SubspaceBasis::empty(db);
    }

    if (b_perp.dim() == 0) {
        d.b_bright = SubspaceBasis::empty(db);
    } else {
        Eigen::MatrixXcd coeffs = b_perp.vectors.adjoint() * d.b_lambda.vectors;
        SubspaceBasis inside(coeffs.cols() > 0 ? coeffs : Eigen::MatrixXcd::Zero(b_perp.dim(), 0));
        SubspaceBasis rest = linalg::complement(inside);
        d.b_bright = rest.dim() > 0 ? lift(b_perp.vectors, rest.vectors)
                                    : SubspaceBasis::empty(db);
    }

    if (d.a_lambda.dim() + d.a_dark.dim() + d.a_bright.dim() != da ||
        d.b_lambda.dim() + d.b_dark.dim() + d.b_bright.dim() != db ||
        d.b_lambda.dim() != d.a_lambda.dim() || d.a_bright.dim() > d.e_dark.dim()) {
        throw consistency_error("decompose: subspace dimensions fail their sum rules");
    }
    check_block_orthogonality(d);
    return d;
}

LambdaBasis lambda_pairs(const Decomposition& decomposition, const atom::LevelSystem& system,
                         const std::optional<Eigen::MatrixXcd>& a_basis) {
    const Eigen::MatrixXcd& chosen =
        a_basis ? *a_basis : decomposition.a_lambda.vectors;
    if (chosen.rows() != system.dim_a()) {
        throw invalid_input_error("lambda_pairs: a_basis lives in the wrong space");
    }
    if (linalg::orthonormality_defect(chosen) > linalg::tau_orth) {
        throw invalid_input_error("lambda_pairs: a_basis columns must be orthonormal");
    }
    if (a_basis) {
        Eigen::MatrixXcd inside = decomposition.a_lambda.projector() * chosen;
        if ((chosen - inside).cwiseAbs().maxCoeff() > 1e-9) {
            throw invalid_input_error("lambda_pairs: a_basis leaves the transfer subspace");
        }
    }

    const Eigen::Index n = chosen.cols();
    LambdaBasis basis;
    basis.a_states = chosen;
    basis.b_states = Eigen::MatrixXcd(system.dim_b(), n);
    basis.lambdas = Eigen::VectorXd(n);
    basis.dim_e = system.dim_e();

    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXcd image = decomposition.M * chosen.col(j);
        double lam = image.norm();
        if (lam < 1e-12) {
            throw degenerate_pair_error(
                "lambda_pairs: state " + std::to_string(j) +
                " has vanishing coupling (effectively outside the transfer subspace)");
        }
        basis.lambdas(j) = lam;
        basis.b_states.col(j) = image / lam;

        Eigen::VectorXcd defect = lam * (system.A_b.adjoint() * basis.b_states.col(j)) -
                                  system.A_a.adjoint() * chosen.col(j);
        if (defect.norm() > 1e-9) {
            throw consistency_error("lambda_pairs: pair relation violated for state " +
                                    std::to_string(j));
        }
    }
    basis.b_gram = linalg::gram(basis.b_states);
    return basis;
}

Eigen::MatrixXcd bare_aligned_basis(const Decomposition& decomposition) {
    const Eigen::MatrixXcd& span = decomposition.a_lambda.vectors;
    const Eigen::Index dim = span.rows();
    const Eigen::Index want = span.cols();
    Eigen::MatrixXcd out(dim, want);
    Eigen::Index have = 0;
    for (Eigen::Index i = 0; i < dim && have < want; ++i) {
        Eigen::VectorXcd v = span * span.row(i).adjoint();
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < have; ++j) {
                v -= out.col(j) * out.col(j).dot(v);
            }
        }
        double nrm = v.norm();
        if (nrm > 1e-6) {
            out.col(have++) = v / nrm;
        }
    }
    if (have != want) {
        throw consistency_error(
            "bare_aligned_basis: bare projections fail to span the transfer subspace");
    }
    return out;
}

BrightReport verify_bright(const Decomposition& decomposition, const atom::LevelSystem& system,
                           double tol) {
    BrightReport report;

    for (Eigen::Index j = 0; j < decomposition.a_bright.dim(); ++j) {
        BrightWitness w;
        w.state = decomposition.a_bright.vectors.col(j);
        Eigen::VectorXcd raised = system.A_a.adjoint() * w.state;
        Eigen::VectorXcd dark_part = decomposition.e_dark.projector() * raised;
        w.overlap = dark_part.norm();
        if (w.overlap <= 1e-6) {
            throw consistency_error(
                "verify_bright: a-side state has no dark excited witness");
        }
        w.excited_witness = dark_part / w.overlap;
        report.a_witnesses.push_back(std::move(w));
    }

    // A partner for psi_b would require A_b† psi_b to lie in the image of A_a†
    // over the coupled a states; rank growth of the augmented matrix rules it out
    linalg::SubspaceBasis a_perp = linalg::complement(decomposition.a_dark);
    Eigen::MatrixXcd image = system.A_a.adjoint() * a_perp.vectors;
    for (Eigen::Index j = 0; j < decomposition.b_bright.dim(); ++j) {
        PairlessCertificate cert;
        cert.state = decomposition.b_bright.vectors.col(j);
        Eigen::MatrixXcd augmented(image.rows(), image.cols() + 1);
        augmented.leftCols(image.cols()) = image;
        augmented.col(image.cols()) = system.A_b.adjoint() * cert.state;
        cert.rank_image = linalg::matrix_rank(image, tol);
        cert.rank_augmented = linalg::matrix_rank(augmented, tol);
        if (cert.rank_augmented != cert.rank_image + 1) {
            throw consistency_error(
                "verify_bright: b-side state unexpectedly admits a partner");
        }
        report.b_certificates.push_back(std::move(cert));
    }
    return report;
}

} // namespace stirap::decomp
