// decomp.hpp: Splits each ground manifold into transfer, dark, and bright
// subspaces, builds the inter-manifold mapping M, and extracts the paired
// states with their coupling ratios.

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "stirap/atom.hpp"
#include "stirap/linalg.hpp"

namespace stirap::decomp {

// Subspace split of both ground manifolds and the excited manifold:
//   a = a_lambda + a_dark + a_bright, b = b_lambda + b_dark + b_bright,
//   e = e_dark + e_coupled.
// States in *_lambda transfer coherently, *_dark never couple to the field,
// *_bright acquire excited amplitude and are lost.
struct Decomposition {
    linalg::SubspaceBasis a_lambda, a_dark, a_bright;
    linalg::SubspaceBasis b_lambda, b_dark, b_bright;
    linalg::SubspaceBasis e_dark, e_coupled;
    Eigen::MatrixXcd M; // dim_b x dim_a, maps a_lambda onto b_lambda, zero elsewhere
};

// Paired states: orthonormal a-side states, their normalized (generally
// non-orthogonal) b-side partners, and the coupling ratios lambda_j defined by
// lambda_j A_b† psi_bj = A_a† psi_aj.
struct LambdaBasis {
    Eigen::MatrixXcd a_states; // dim_a x n, orthonormal columns
    Eigen::MatrixXcd b_states; // dim_b x n, unit-norm columns
    Eigen::VectorXd lambdas;   // positive couplings, one per pair
    Eigen::MatrixXcd b_gram;   // <psi_bk|psi_bj>
    Eigen::Index dim_e{0};     // excited dimension, kept for joint-space embeddings

    Eigen::Index n_pairs() const { return a_states.cols(); }
    Eigen::Index dim_a() const { return a_states.rows(); }
    Eigen::Index dim_b() const { return b_states.rows(); }
};

// Witness that an a-side bright state couples into the dark excited subspace
struct BrightWitness {
    Eigen::VectorXcd state;           // basis vector of a_bright
    Eigen::VectorXcd excited_witness; // unit vector in e_dark
    double overlap{0.0};              // |<witness|A_a†|state>|
};

// Rank certificate that a b-side bright state admits no partner anywhere in
// the coupled part of manifold a
struct PairlessCertificate {
    Eigen::VectorXcd state;        // basis vector of b_bright
    Eigen::Index rank_image{0};    // rank of A_a† restricted to coupled a states
    Eigen::Index rank_augmented{0}; // rank after adjoining A_b†·state
};

struct BrightReport {
    std::vector<BrightWitness> a_witnesses;
    std::vector<PairlessCertificate> b_certificates;
};

// Full subspace decomposition of a level system. tol is the relative
// singular-value cutoff for every rank decision.
Decomposition decompose(const atom::LevelSystem& system,
                        double tol = linalg::default_rank_tol);

// Pair states for the decomposition. When a_basis is given its orthonormal
// columns (inside a_lambda) replace the stored basis, so published pairings
// can be reproduced literally; throws degenerate_pair_error when a coupling
// ratio falls below 1e-12.
LambdaBasis lambda_pairs(const Decomposition& decomposition, const atom::LevelSystem& system,
                         const std::optional<Eigen::MatrixXcd>& a_basis = std::nullopt);

// Orthonormal basis of the transfer subspace aligned with the bare states:
// each bare basis vector of manifold a is projected into a_lambda and kept
// when it adds a new direction (Gram-Schmidt in label order). Couplings
// reported in this basis line up with the bare labels, which is how the
// built-in systems quote them.
Eigen::MatrixXcd bare_aligned_basis(const Decomposition& decomposition);

// Per-vector evidence that the bright subspaces really are bright; throws
// consistency_error if any witness or certificate fails.
BrightReport verify_bright(const Decomposition& decomposition, const atom::LevelSystem& system,
                           double tol = linalg::default_rank_tol);

} // namespace stirap::decomp
