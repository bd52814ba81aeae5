#include "stirap/passage.hpp"

#include <cmath>

#include "stirap/oracle.hpp"

namespace stirap::passage {

namespace {

constexpr double half_pi = 1.57079632679489661923;
constexpr double max_step = half_pi / 100.0; // pi/200

Eigen::VectorXd mixing_rates(const Eigen::VectorXd& lambdas, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    Eigen::VectorXd rates(lambdas.size());
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        rates(j) = lambdas(j) / (c * c + lambdas(j) * lambdas(j) * s * s);
    }
    return rates;
}

// Right-hand side of the coefficient equations of motion, columns independent
Eigen::MatrixXcd eom_rhs(const decomp::LambdaBasis& basis, double theta,
                         const Eigen::MatrixXcd& c) {
    DarkFrame frame = dark_frame(basis, theta);
    EomMatrices mats = eom_matrices(frame);
    Eigen::VectorXd rates = mixing_rates(basis.lambdas, theta);
    return -(mats.inverse * mats.gram_cross) * (rates.asDiagonal() * c);
}

// Dormand-Prince 5(4) with FSAL, integrating the coefficient matrix over
// theta from t0 to t1 (either direction)
Eigen::MatrixXcd integrate_eom(const decomp::LambdaBasis& basis, Eigen::MatrixXcd y,
                               double t0, double t1, double rtol, double atol) {
    static const double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static const double c_nodes[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double b_low[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    const double span = t1 - t0;
    if (span == 0.0) return y;
    const double dir = span > 0.0 ? 1.0 : -1.0;

    double t = t0;
    double h = dir * std::min(max_step, std::abs(span));
    Eigen::MatrixXcd k[7];
    k[0] = eom_rhs(basis, t, y);

    while (dir * (t1 - t) > 1e-15) {
        if (dir * (t + h - t1) > 0.0) h = t1 - t;

        for (int i = 1; i < 7; ++i) {
            Eigen::MatrixXcd yi = y;
            for (int j = 0; j < i; ++j) {
                if (a[i][j] != 0.0) yi += (h * a[i][j]) * k[j];
            }
            k[i] = eom_rhs(basis, t + c_nodes[i] * h, yi);
        }
        // stage 7 already evaluates the 5th-order solution (FSAL)
        Eigen::MatrixXcd y_new = y;
        for (int j = 0; j < 6; ++j) {
            if (a[6][j] != 0.0) y_new += (h * a[6][j]) * k[j];
        }
        Eigen::MatrixXcd y_low = y;
        for (int j = 0; j < 7; ++j) {
            if (b_low[j] != 0.0) y_low += (h * b_low[j]) * k[j];
        }

        double err_sq = 0.0;
        for (Eigen::Index col = 0; col < y.cols(); ++col) {
            for (Eigen::Index row = 0; row < y.rows(); ++row) {
                double scale = atol + rtol * std::max(std::abs(y(row, col)),
                                                      std::abs(y_new(row, col)));
                double e = std::abs(y_new(row, col) - y_low(row, col)) / scale;
                err_sq += e * e;
            }
        }
        double err = std::sqrt(err_sq / double(y.size()));

        if (err <= 1.0) {
            t += h;
            y = std::move(y_new);
            k[0] = k[6]; // FSAL: last stage doubles as the next first stage
        }

        double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        factor = std::clamp(factor, 0.2, 5.0);
        h *= factor;
        if (std::abs(h) > max_step) h = dir * max_step;
        if (std::abs(h) < 1e-14) {
            throw integration_error("integrate_transfer: step size underflow (stiff system)");
        }
    }
    return y;
}

void check_tolerances(double rtol, double atol, const char* who) {
    if (!(rtol > 0.0 && rtol <= 1e-2) || !(atol > 0.0 && atol <= 1e-2)) {
        throw invalid_input_error(std::string(who) + ": tolerances must lie in (0, 1e-2]");
    }
}

} // namespace

DarkFrame dark_frame(const decomp::LambdaBasis& basis, double theta) {
    if (!(theta >= -1e-12 && theta <= half_pi + 1e-12)) {
        throw invalid_input_error("dark_frame: theta must lie in [0, pi/2]");
    }
    DarkFrame frame;
    frame.basis = basis;
    frame.theta = theta;
    frame.phis = Eigen::VectorXd(basis.n_pairs());
    for (Eigen::Index j = 0; j < basis.n_pairs(); ++j) {
        frame.phis(j) = std::atan2(basis.lambdas(j) * std::sin(theta), std::cos(theta));
    }
    return frame;
}

EomMatrices eom_matrices(const DarkFrame& frame) {
    using linalg::complexd;
    Eigen::VectorXcd cosphi = frame.phis.array().cos().cast<complexd>();
    Eigen::VectorXcd sinphi = frame.phis.array().sin().cast<complexd>();
    const Eigen::MatrixXcd& g = frame.basis.b_gram;

    EomMatrices out;
    out.gram_dark = sinphi.asDiagonal() * g * sinphi.asDiagonal();
    out.gram_dark += (cosphi.cwiseProduct(cosphi)).asDiagonal();
    out.gram_cross = sinphi.asDiagonal() * g * cosphi.asDiagonal();
    out.gram_cross -= (cosphi.cwiseProduct(sinphi)).asDiagonal();
    out.inverse = linalg::invert_hermitian(out.gram_dark);
    return out;
}

Eigen::VectorXcd dark_state(const DarkFrame& frame, Eigen::Index j) {
    const auto& b = frame.basis;
    if (j < 0 || j >= b.n_pairs()) {
        throw invalid_input_error("dark_state: pair index out of range");
    }
    Eigen::VectorXcd state = Eigen::VectorXcd::Zero(b.dim_a() + b.dim_b() + b.dim_e);
    state.head(b.dim_a()) = std::cos(frame.phis(j)) * b.a_states.col(j);
    state.segment(b.dim_a(), b.dim_b()) = std::sin(frame.phis(j)) * b.b_states.col(j);
    return state;
}

double darkness_residual(const atom::LevelSystem& system, const DarkFrame& frame,
                         const Eigen::VectorXcd& state, double omega) {
    if (state.size() != system.dim_total()) {
        throw invalid_input_error("darkness_residual: state lives in the wrong space");
    }
    Eigen::MatrixXcd h = oracle::hamiltonian(system, frame.theta, omega);
    return (h * state).norm() / (omega / 2.0);
}

TransferMap integrate_transfer(const decomp::LambdaBasis& basis, Direction direction,
                               double rtol, double atol) {
    check_tolerances(rtol, atol, "integrate_transfer");
    const Eigen::Index n = basis.n_pairs();
    if (n == 0) {
        throw invalid_input_error("integrate_transfer: basis holds no pairs");
    }

    double t0 = direction == Direction::a_to_b ? 0.0 : half_pi;
    double t1 = half_pi - t0;
    Eigen::MatrixXcd c = integrate_eom(basis, Eigen::MatrixXcd::Identity(n, n), t0, t1,
                                       rtol, atol);

    TransferMap map;
    map.direction = direction;
    map.c_final = c;
    auto [q, r] = linalg::orthonormalize(basis.b_states);
    map.ortho_b_basis = q;
    if (direction == Direction::a_to_b) {
        map.u_ortho = r * c;
    } else {
        Eigen::MatrixXcd r_adj = r.adjoint();
        map.u_ortho =
            r_adj.triangularView<Eigen::Lower>().solve(c.adjoint()).adjoint(); // c r^{-1}
    }
    Eigen::MatrixXcd defect = map.u_ortho.adjoint() * map.u_ortho -
                              Eigen::MatrixXcd::Identity(n, n);
    map.unitarity_defect = defect.cwiseAbs().maxCoeff();
    if (map.unitarity_defect > 1e-6) {
        throw integration_error("integrate_transfer: accumulated map lost unitarity");
    }

    // each output state must stay unit norm, Gram cross terms included
    Eigen::MatrixXcd end_gram = direction == Direction::a_to_b
                                    ? Eigen::MatrixXcd(c.adjoint() * basis.b_gram * c)
                                    : Eigen::MatrixXcd(c.adjoint() * c);
    double norm_defect = (end_gram.diagonal().real().array() - 1.0).abs().maxCoeff();
    if (norm_defect > 1e-6) {
        throw integration_error("integrate_transfer: output states drifted off unit norm");
    }
    return map;
}

std::optional<TwoLevelTransfer> analytic_two_level(double lambda1, double lambda2, double z) {
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || !std::isfinite(z) ||
        lambda1 <= 0.0 || lambda2 <= 0.0) {
        throw invalid_input_error("analytic_two_level: couplings must be positive and finite");
    }
    if (std::abs(z) >= 1.0) {
        throw invalid_overlap_error("analytic_two_level: |z| must be below 1");
    }

    TwoLevelTransfer out;
    Eigen::Matrix2cd r;
    r << 1.0, z, 0.0, std::sqrt(1.0 - z * z);

    if (z == 0.0) {
        out.alpha = 1.0;
        out.beta = 0.0;
        out.c_final = Eigen::Matrix2cd::Identity();
        out.u_ortho = Eigen::Matrix2cd::Identity();
        return out;
    }
    if (std::abs(lambda1 - lambda2) <= 1e-12 * std::max(lambda1, lambda2)) {
        out.alpha = 0.5 * (1.0 / std::sqrt(1.0 + z) + 1.0 / std::sqrt(1.0 - z));
        out.beta = 0.5 * (1.0 / std::sqrt(1.0 + z) - 1.0 / std::sqrt(1.0 - z));
        out.c_final << out.alpha, out.beta, out.beta, out.alpha;
        out.u_ortho = r * out.c_final;
        return out;
    }
    return std::nullopt;
}

Trajectory trajectory(const decomp::LambdaBasis& basis, const Eigen::VectorXcd& initial_c,
                      const Eigen::VectorXd& theta_grid, double rtol, double atol) {
    check_tolerances(rtol, atol, "trajectory");
    const Eigen::Index n = basis.n_pairs();
    if (initial_c.size() != n) {
        throw invalid_input_error("trajectory: coefficient count disagrees with pair count");
    }
    if (std::abs(initial_c.norm() - 1.0) > 1e-9) {
        throw invalid_input_error("trajectory: initial coefficients must be normalized");
    }
    if (theta_grid.size() == 0) {
        throw invalid_input_error("trajectory: empty angle grid");
    }
    for (Eigen::Index i = 0; i < theta_grid.size(); ++i) {
        bool ordered = i == 0 || theta_grid(i) >= theta_grid(i - 1) - 1e-15;
        if (!ordered || theta_grid(i) < -1e-12 || theta_grid(i) > half_pi + 1e-12) {
            throw invalid_input_error("trajectory: grid must ascend within [0, pi/2]");
        }
    }

    Trajectory out;
    out.thetas = theta_grid;
    out.coefficients = Eigen::MatrixXcd(n, theta_grid.size());
    out.pop_a = Eigen::MatrixXd(basis.dim_a(), theta_grid.size());
    out.pop_b = Eigen::MatrixXd(basis.dim_b(), theta_grid.size());

    Eigen::MatrixXcd c = initial_c;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < theta_grid.size(); ++i) {
        if (theta_grid(i) > theta) {
            c = integrate_eom(basis, c, theta, theta_grid(i), rtol, atol);
            theta = theta_grid(i);
        }
        DarkFrame frame = dark_frame(basis, theta_grid(i));
        using linalg::complexd;
        Eigen::VectorXcd weights_a =
            frame.phis.array().cos().cast<complexd>() * c.col(0).array();
        Eigen::VectorXcd weights_b =
            frame.phis.array().sin().cast<complexd>() * c.col(0).array();
        out.coefficients.col(i) = c.col(0);
        out.pop_a.col(i) = (basis.a_states * weights_a).cwiseAbs2();
        out.pop_b.col(i) = (basis.b_states * weights_b).cwiseAbs2();
    }
    return out;
}

} // namespace stirap::passage
