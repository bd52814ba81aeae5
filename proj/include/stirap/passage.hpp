// passage.hpp: Dark-state construction, the coefficient equations of motion
// over the sweep angle, the resulting transfer map, and the closed-form
// two-level solutions.

#pragma once

#include <optional>

#include <Eigen/Dense>

#include "stirap/atom.hpp"
#include "stirap/decomp.hpp"
#include "stirap/linalg.hpp"

namespace stirap::passage {

enum class Direction { a_to_b, b_to_a };

// Snapshot of the dark-state family at one sweep angle theta: each pair j
// carries its own mixing angle phi_j with tan(phi_j) = lambda_j tan(theta)
struct DarkFrame {
    decomp::LambdaBasis basis;
    double theta{0.0};     // in [0, pi/2]
    Eigen::VectorXd phis;  // phi_j = atan2(lambda_j sin(theta), cos(theta))
};

DarkFrame dark_frame(const decomp::LambdaBasis& basis, double theta);

// Gram matrices of the dark family and its theta-derivative partners, plus
// the inverse needed by the equations of motion
struct EomMatrices {
    Eigen::MatrixXcd gram_dark;  // <Lambda_k|Lambda_j>
    Eigen::MatrixXcd gram_cross; // <Lambda_k|dLambda_j/dphi_j>
    Eigen::MatrixXcd inverse;    // gram_dark^{-1}
};

EomMatrices eom_matrices(const DarkFrame& frame);

// Dark state j embedded in the joint a+b+e space with zero excited component:
// cos(phi_j) psi_aj + sin(phi_j) psi_bj
Eigen::VectorXcd dark_state(const DarkFrame& frame, Eigen::Index j);

// ||H(theta) state|| / (Omega/2); vanishes for true dark states at every angle
double darkness_residual(const atom::LevelSystem& system, const DarkFrame& frame,
                         const Eigen::VectorXcd& state, double omega);

// Transfer map accumulated over a full sweep. Coefficient columns are indexed
// by input basis state; u_ortho re-expresses the same map between orthonormal
// bases of both ends, where unitarity is literal.
struct TransferMap {
    Direction direction{Direction::a_to_b};
    Eigen::MatrixXcd c_final;       // coefficients after the sweep, one column per input
    Eigen::MatrixXcd u_ortho;       // unitary between orthonormal end bases
    Eigen::MatrixXcd ortho_b_basis; // orthonormalized b-side states (columns)
    double unitarity_defect{0.0};   // max entry of |u_ortho†u_ortho - I|
};

// Integrate the coefficient equations of motion over theta: 0 to pi/2 for
// a_to_b, reversed otherwise. Adaptive embedded Runge-Kutta with relative and
// absolute tolerances in (0, 1e-2]; max step pi/200.
TransferMap integrate_transfer(const decomp::LambdaBasis& basis, Direction direction,
                               double rtol = 1e-10, double atol = 1e-10);

// Closed-form two-level transfer coefficients
struct TwoLevelTransfer {
    Eigen::Matrix2cd c_final;
    Eigen::Matrix2cd u_ortho;
    double alpha{0.0};
    double beta{0.0};
};

// Closed form exists when z = 0 (coefficients frozen) or lambda1 = lambda2
// with real overlap z; returns nullopt otherwise. |z| >= 1 is unphysical.
std::optional<TwoLevelTransfer> analytic_two_level(double lambda1, double lambda2, double z);

// Bare-state populations along the sweep, evaluated on an ascending grid of
// angles in [0, pi/2]; integration always starts at theta = 0
struct Trajectory {
    Eigen::VectorXd thetas;
    Eigen::MatrixXcd coefficients; // n_pairs x n_points
    Eigen::MatrixXd pop_a;         // dim_a x n_points
    Eigen::MatrixXd pop_b;         // dim_b x n_points
};

Trajectory trajectory(const decomp::LambdaBasis& basis, const Eigen::VectorXcd& initial_c,
                      const Eigen::VectorXd& theta_grid, double rtol = 1e-10,
                      double atol = 1e-10);

} // namespace stirap::passage
