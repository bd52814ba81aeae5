#include "stirap/oracle.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "stirap/parallel.hpp"

namespace stirap::oracle {

namespace {

constexpr double half_pi = 1.57079632679489661923;

struct SweepTrace {
    Eigen::VectorXcd psi;
    double norm_drift{0.0};
    double max_excited{0.0};
    double max_leakage{0.0};
};

SweepTrace propagate(const atom::LevelSystem& system, const SweepProfile& profile,
                     double omega, const Eigen::VectorXcd& initial, double max_omega_dt) {
    const Eigen::Index de = system.dim_e();
    const long steps =
        std::max(1L, static_cast<long>(std::ceil(omega * profile.duration / max_omega_dt)));
    const double dt = profile.duration / double(steps);
    const std::complex<double> minus_i(0.0, -1.0);

    SweepTrace trace;
    trace.psi = initial;
    trace.max_excited = initial.tail(de).squaredNorm();

    for (long k = 0; k < steps; ++k) {
        double theta = profile.theta_at((double(k) + 0.5) * dt);
        Eigen::MatrixXcd h = hamiltonian(system, theta, omega);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        if (es.info() != Eigen::Success) {
            throw propagation_error("evolve: eigendecomposition of the sweep Hamiltonian failed");
        }
        Eigen::VectorXcd phases =
            (minus_i * dt * es.eigenvalues().cast<std::complex<double>>().array()).exp();
        trace.psi = es.eigenvectors() *
                    phases.cwiseProduct(es.eigenvectors().adjoint() * trace.psi);

        trace.norm_drift = std::max(trace.norm_drift, std::abs(trace.psi.norm() - 1.0));
        trace.max_excited = std::max(trace.max_excited, trace.psi.tail(de).squaredNorm());
        double overlap = std::norm(initial.dot(trace.psi));
        trace.max_leakage = std::max(trace.max_leakage, 1.0 - overlap);
    }
    return trace;
}

} // namespace

double SweepProfile::theta_at(double t) const {
    if (!(duration > 0.0)) {
        throw invalid_input_error("SweepProfile: duration must be positive");
    }
    double x = std::clamp(t / duration, 0.0, 1.0);
    double forward = 0.0;
    switch (shape) {
        case ProfileShape::linear:
            forward = half_pi * x;
            break;
        case ProfileShape::sine_squared: {
            double s = std::sin(half_pi * x);
            forward = half_pi * s * s;
            break;
        }
    }
    return direction == passage::Direction::a_to_b ? forward : half_pi - forward;
}

Eigen::MatrixXcd hamiltonian(const atom::LevelSystem& system, double theta, double omega) {
    if (!(omega > 0.0)) {
        throw invalid_input_error("hamiltonian: omega must be positive");
    }
    const Eigen::Index da = system.dim_a(), db = system.dim_b(), de = system.dim_e();
    Eigen::MatrixXcd upper = Eigen::MatrixXcd::Zero(da + db + de, da + db + de);
    upper.block(0, da + db, da, de) = (-0.5 * omega * std::sin(theta)) * system.A_a;
    upper.block(da, da + db, db, de) = (0.5 * omega * std::cos(theta)) * system.A_b;
    return upper + Eigen::MatrixXcd(upper.adjoint());
}

SweepResult evolve(const atom::LevelSystem& system, const SweepProfile& profile, double omega,
                   const Eigen::VectorXcd& initial, const StepControl& control,
                   const Eigen::VectorXcd* predicted) {
    if (!(omega > 0.0)) {
        throw invalid_input_error("evolve: omega must be positive");
    }
    if (!(control.max_omega_dt > 0.0 && control.max_omega_dt <= 0.5)) {
        throw invalid_input_error("evolve: max_omega_dt must lie in (0, 0.5]");
    }
    if (initial.size() != system.dim_total()) {
        throw invalid_input_error("evolve: initial state lives in the wrong space");
    }
    if (std::abs(initial.norm() - 1.0) > 1e-9) {
        throw invalid_input_error("evolve: initial state must be unit norm");
    }

    SweepTrace trace = propagate(system, profile, omega, initial, control.max_omega_dt);

    SweepResult result;
    result.final_state = trace.psi;
    result.norm_drift = trace.norm_drift;
    result.max_excited_population = trace.max_excited;
    result.max_leakage = trace.max_leakage;
    if (result.norm_drift > 1e-6) {
        throw propagation_error("evolve: norm drift exceeded the accuracy budget");
    }
    if (predicted != nullptr) {
        if (predicted->size() != initial.size()) {
            throw invalid_input_error("evolve: predicted state lives in the wrong space");
        }
        result.fidelity_vs_prediction = std::norm(predicted->dot(trace.psi));
    }
    if (control.halving_check) {
        SweepTrace fine =
            propagate(system, profile, omega, initial, 0.5 * control.max_omega_dt);
        result.halving_defect = (trace.psi - fine.psi).norm();
    }
    return result;
}

Eigen::VectorXcd predict_final(const atom::LevelSystem& system,
                               const decomp::Decomposition& decomposition,
                               const decomp::LambdaBasis& basis, passage::Direction direction,
                               const Eigen::VectorXcd& initial, double rtol, double atol) {
    const Eigen::Index da = system.dim_a(), db = system.dim_b();
    if (initial.size() != system.dim_total()) {
        throw invalid_input_error("predict_final: initial state lives in the wrong space");
    }

    passage::TransferMap map = passage::integrate_transfer(basis, direction, rtol, atol);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(initial.size());

    if (direction == passage::Direction::a_to_b) {
        if (initial.tail(initial.size() - da).norm() > 1e-9) {
            throw invalid_input_error("predict_final: initial state must start in manifold a");
        }
        Eigen::VectorXcd psi_a = initial.head(da);
        Eigen::VectorXcd c0 = basis.a_states.adjoint() * psi_a;
        Eigen::VectorXcd dark = decomposition.a_dark.projector() * psi_a;
        if ((psi_a - basis.a_states * c0 - dark).norm() > 1e-9) {
            throw invalid_input_error(
                "predict_final: initial state has components in the bright subspace");
        }
        out.head(da) = dark;
        out.segment(da, db) = basis.b_states * (map.c_final * c0);
    } else {
        if (initial.head(da).norm() > 1e-9 ||
            initial.tail(initial.size() - da - db).norm() > 1e-9) {
            throw invalid_input_error("predict_final: initial state must start in manifold b");
        }
        Eigen::VectorXcd psi_b = initial.segment(da, db);
        Eigen::VectorXcd c0 = linalg::invert_hermitian(basis.b_gram) *
                              (basis.b_states.adjoint() * psi_b);
        Eigen::VectorXcd dark = decomposition.b_dark.projector() * psi_b;
        if ((psi_b - basis.b_states * c0 - dark).norm() > 1e-9) {
            throw invalid_input_error(
                "predict_final: initial state has components in the bright subspace");
        }
        out.head(da) = basis.a_states * (map.c_final * c0);
        out.segment(da, db) = dark;
    }
    return out;
}

ConvergenceResult convergence_study(const atom::LevelSystem& system,
                                    const Eigen::VectorXcd& initial,
                                    const std::vector<double>& omega_t_list,
                                    ProfileShape shape, passage::Direction direction,
                                    double rank_tol, double rtol, double atol) {
    if (omega_t_list.empty()) {
        throw invalid_input_error("convergence_study: sweep length list is empty");
    }
    for (std::size_t i = 0; i < omega_t_list.size(); ++i) {
        bool increasing = i == 0 || omega_t_list[i] > omega_t_list[i - 1];
        if (!increasing || !(omega_t_list[i] > 0.0)) {
            throw invalid_input_error("convergence_study: sweep lengths must increase");
        }
    }

    decomp::Decomposition decomposition = decomp::decompose(system, rank_tol);
    decomp::LambdaBasis basis = decomp::lambda_pairs(decomposition, system);
    Eigen::VectorXcd predicted =
        predict_final(system, decomposition, basis, direction, initial, rtol, atol);

    ConvergenceResult result;
    result.points.resize(omega_t_list.size());
    parallel::parallel_for(static_cast<int>(omega_t_list.size()), [&](int i) {
        SweepProfile profile{shape, omega_t_list[std::size_t(i)], direction};
        SweepResult sweep = evolve(system, profile, 1.0, initial, {}, &predicted);
        double infid = std::clamp(1.0 - *sweep.fidelity_vs_prediction, 0.0, 1.0);
        result.points[std::size_t(i)] = {omega_t_list[std::size_t(i)], infid};
    });

    // log-log least-squares slope of the decay (floor avoids log of zero)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(result.points.size());
    for (const auto& p : result.points) {
        double x = std::log(p.omega_t);
        double y = std::log(std::max(p.infidelity, 1e-16));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    result.trend_slope = denom > 1e-12 ? (n * sxy - sx * sy) / denom : 0.0;
    return result;
}

} // namespace stirap::oracle
