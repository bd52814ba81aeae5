// oracle.hpp: Full Schrödinger-equation verification of the adiabatic
// predictions: sweep the joint Hamiltonian in time and measure transfer
// fidelity, excited-state excursion, and norm drift.

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "stirap/atom.hpp"
#include "stirap/decomp.hpp"
#include "stirap/passage.hpp"

namespace stirap::oracle {

enum class ProfileShape { linear, sine_squared };

// Monotone sweep of theta over [0, pi/2] in the requested direction
struct SweepProfile {
    ProfileShape shape{ProfileShape::sine_squared};
    double duration{1000.0}; // in 1/Omega units when omega = 1
    passage::Direction direction{passage::Direction::a_to_b};

    double theta_at(double t) const;
};

struct StepControl {
    double max_omega_dt{0.05}; // per-step phase budget Omega*dt
    bool halving_check{false}; // re-run at dt/2 and record the difference
};

struct SweepResult {
    Eigen::VectorXcd final_state;       // over the joint a+b+e space
    double norm_drift{0.0};             // max | ||psi|| - 1 | over the sweep
    double max_excited_population{0.0}; // max excited-manifold population
    double max_leakage{0.0};            // max population outside the initial state
    std::optional<double> fidelity_vs_prediction;
    std::optional<double> halving_defect; // ||psi_dt - psi_dt/2|| when checked
};

// H = (Omega/2) cos(theta) (A_b + A_b†) - (Omega/2) sin(theta) (A_a + A_a†)
// over the joint space, Hermitian by construction
Eigen::MatrixXcd hamiltonian(const atom::LevelSystem& system, double theta, double omega);

// Propagate i dpsi/dt = H(theta(t)) psi with a per-step eigenbasis exponential
// of the midpoint Hamiltonian; step count set by control.max_omega_dt. When a
// predicted final state is supplied the overlap fidelity is recorded.
SweepResult evolve(const atom::LevelSystem& system, const SweepProfile& profile, double omega,
                   const Eigen::VectorXcd& initial, const StepControl& control = {},
                   const Eigen::VectorXcd* predicted = nullptr);

// Adiabatic-theory final state for an initial state confined to the transfer
// and dark subspaces of the source manifold; throws invalid_input_error when
// the initial state touches the bright subspace
Eigen::VectorXcd predict_final(const atom::LevelSystem& system,
                               const decomp::Decomposition& decomposition,
                               const decomp::LambdaBasis& basis, passage::Direction direction,
                               const Eigen::VectorXcd& initial, double rtol = 1e-10,
                               double atol = 1e-10);

struct ConvergencePoint {
    double omega_t{0.0};
    double infidelity{0.0};
};

struct ConvergenceResult {
    std::vector<ConvergencePoint> points;
    double trend_slope{0.0}; // least-squares slope of log(infidelity) vs log(Omega T)
};

// Infidelity against the adiabatic prediction over an increasing list of
// sweep lengths; sweeps run concurrently when OpenMP is available
ConvergenceResult convergence_study(const atom::LevelSystem& system,
                                    const Eigen::VectorXcd& initial,
                                    const std::vector<double>& omega_t_list,
                                    ProfileShape shape = ProfileShape::sine_squared,
                                    passage::Direction direction = passage::Direction::a_to_b,
                                    double rank_tol = linalg::default_rank_tol,
                                    double rtol = 1e-10, double atol = 1e-10);

} // namespace stirap::oracle
