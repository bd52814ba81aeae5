#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "stirap/atom.hpp"
#include "stirap/decomp.hpp"
#include "stirap/linalg.hpp"
#include "stirap/passage.hpp"

using namespace stirap;
using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using complexd = std::complex<double>;

namespace {

constexpr double half_pi = 1.5707963267948966;

decomp::LambdaBasis toy_pairs() {
    auto sys = atom::toy_model();
    MatrixXcd a_basis = MatrixXcd::Zero(3, 2);
    a_basis(0, 0) = 1.0;
    a_basis(2, 1) = 1.0;
    return decomp::lambda_pairs(decomp::decompose(sys), sys, a_basis);
}

// Two equal-coupling pairs with a chosen partner overlap z, small enough to
// write down by hand
decomp::LambdaBasis synthetic_pairs(double lambda1, double lambda2, double z) {
    decomp::LambdaBasis basis;
    basis.a_states = MatrixXcd::Identity(2, 2);
    basis.b_states = MatrixXcd::Zero(2, 2);
    basis.b_states(0, 0) = 1.0;
    basis.b_states(0, 1) = z;
    basis.b_states(1, 1) = std::sqrt(1.0 - z * z);
    basis.lambdas = Eigen::Vector2d(lambda1, lambda2);
    basis.b_gram = linalg::gram(basis.b_states);
    basis.dim_e = 2;
    return basis;
}

VectorXd grid_21() { return VectorXd::LinSpaced(21, 0.0, half_pi); }

} // namespace

TEST_CASE("dark frame mixing angles follow the coupling ratios") {
    auto basis = toy_pairs();
    auto at0 = passage::dark_frame(basis, 0.0);
    CHECK(at0.phis.cwiseAbs().maxCoeff() == 0.0);
    auto at_end = passage::dark_frame(basis, half_pi);
    CHECK(std::abs(at_end.phis(0) - half_pi) <= 1e-12);
    auto mid = passage::dark_frame(basis, 0.3);
    CHECK(mid.phis(0) ==
          doctest::Approx(std::atan(std::sqrt(2.0) * std::tan(0.3))).epsilon(1e-12));
    CHECK_THROWS_AS(passage::dark_frame(basis, -0.1), invalid_input_error);
    CHECK_THROWS_AS(passage::dark_frame(basis, 2.0), invalid_input_error);
}

TEST_CASE("dark states interpolate between the paired endpoints") {
    auto basis = toy_pairs();

    // theta = 0: pure a state
    auto f0 = passage::dark_frame(basis, 0.0);
    VectorXcd d0 = passage::dark_state(f0, 0);
    REQUIRE(d0.size() == 9);
    CHECK(std::abs(d0(0) - complexd(1.0, 0.0)) <= 1e-12);
    CHECK(d0.tail(6).norm() <= 1e-12);

    // theta = pi/2: pure partner state
    auto f1 = passage::dark_frame(basis, half_pi);
    VectorXcd d1 = passage::dark_state(f1, 0);
    CHECK(std::abs(d1(3) - complexd(1.0 / std::sqrt(2.0), 0.0)) <= 1e-12);
    CHECK(std::abs(d1(4) - complexd(1.0 / std::sqrt(2.0), 0.0)) <= 1e-12);
    CHECK(d1.head(3).norm() <= 1e-12);

    // theta = pi/4: equal thirds across |a+>, |b+>, |b0>
    auto fm = passage::dark_frame(basis, std::atan(1.0));
    VectorXcd dm = passage::dark_state(fm, 0);
    double third = 1.0 / std::sqrt(3.0);
    CHECK(std::abs(dm(0) - complexd(third, 0.0)) <= 1e-12);
    CHECK(std::abs(dm(3) - complexd(third, 0.0)) <= 1e-12);
    CHECK(std::abs(dm(4) - complexd(third, 0.0)) <= 1e-12);

    // excited block stays empty at every angle
    CHECK(dm.tail(3).norm() == 0.0);
    CHECK_THROWS_AS(passage::dark_state(fm, 2), invalid_input_error);
}

TEST_CASE("dark states stay dark across the sweep, independent of drive strength") {
    auto sys = atom::toy_model();
    auto basis = toy_pairs();
    VectorXd grid = grid_21();
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        auto frame = passage::dark_frame(basis, grid(k));
        for (Eigen::Index j = 0; j < basis.n_pairs(); ++j) {
            VectorXcd state = passage::dark_state(frame, j);
            CHECK(passage::darkness_residual(sys, frame, state, 1.0) <= 1e-9);
            CHECK(std::abs(passage::darkness_residual(sys, frame, state, 1.0) -
                           passage::darkness_residual(sys, frame, state, 7.0)) <= 1e-12);
        }
    }
}

TEST_CASE("uncoupled states have zero residual, pairless bright states do not") {
    auto sys = atom::toy_model();
    auto basis = toy_pairs();

    VectorXcd a_dark = VectorXcd::Zero(9);
    a_dark(1) = 1.0; // |a0>
    VectorXcd s = VectorXcd::Zero(9);
    s(3) = 1.0 / std::sqrt(3.0);
    s(4) = -1.0 / std::sqrt(3.0);
    s(5) = 1.0 / std::sqrt(3.0);

    for (double theta : {0.0, 0.4, half_pi}) {
        auto frame = passage::dark_frame(basis, theta);
        CHECK(passage::darkness_residual(sys, frame, a_dark, 1.0) <= 1e-12);
    }
    // b couplings are on at theta = 0 and off at theta = pi/2
    auto f0 = passage::dark_frame(basis, 0.0);
    CHECK(passage::darkness_residual(sys, f0, s, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    auto f1 = passage::dark_frame(basis, half_pi);
    CHECK(passage::darkness_residual(sys, f1, s, 1.0) <= 1e-12);

    CHECK_THROWS_AS(passage::darkness_residual(sys, f0, VectorXcd::Zero(4), 1.0),
                    invalid_input_error);
}

TEST_CASE("equation-of-motion matrices match the two-pair closed forms") {
    const double z = 0.3;
    auto basis = synthetic_pairs(2.0, 0.7, z);
    for (double theta : {0.2, 0.9, 1.4}) {
        auto frame = passage::dark_frame(basis, theta);
        auto eom = passage::eom_matrices(frame);
        double phi1 = frame.phis(0), phi2 = frame.phis(1);
        double s = z * std::sin(phi1) * std::sin(phi2);

        CHECK(std::abs(eom.gram_dark(0, 0) - complexd(1.0, 0.0)) <= 1e-12);
        CHECK(std::abs(eom.gram_dark(0, 1) - complexd(s, 0.0)) <= 1e-12);
        CHECK(std::abs(eom.gram_cross(0, 0)) <= 1e-12);
        CHECK(std::abs(eom.gram_cross(1, 1)) <= 1e-12);
        CHECK(std::abs(eom.gram_cross(0, 1) - complexd(z * std::sin(phi1) * std::cos(phi2), 0.0)) <=
              1e-12);
        CHECK(std::abs(eom.gram_cross(1, 0) - complexd(z * std::sin(phi2) * std::cos(phi1), 0.0)) <=
              1e-12);

        double scale = 1.0 / (1.0 - s * s);
        CHECK(std::abs(eom.inverse(0, 0) - complexd(scale, 0.0)) <= 1e-12);
        CHECK(std::abs(eom.inverse(0, 1) - complexd(-s * scale, 0.0)) <= 1e-12);
    }

    // orthogonal partners freeze the frame: trivial matrices at every angle
    auto frozen = synthetic_pairs(1.3, 0.4, 0.0);
    for (double theta : {0.0, 0.8, half_pi}) {
        auto eom = passage::eom_matrices(passage::dark_frame(frozen, theta));
        CHECK((eom.gram_dark - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(eom.gram_cross.cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((eom.inverse - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("demo transfer matches the closed form") {
    auto basis = toy_pairs();
    auto map = passage::integrate_transfer(basis, passage::Direction::a_to_b);
    auto exact = passage::analytic_two_level(std::sqrt(2.0), std::sqrt(2.0), 0.5);
    REQUIRE(exact.has_value());
    CHECK(exact->alpha == doctest::Approx(1.1153550716).epsilon(1e-9));
    CHECK(exact->beta == doctest::Approx(-0.2988584907).epsilon(1e-8));

    CHECK((map.c_final - exact->c_final.cast<complexd>()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::abs(map.c_final(0, 0) - complexd(exact->alpha, 0.0)) <= 1e-6);
    CHECK(std::abs(map.c_final(1, 0) - complexd(exact->beta, 0.0)) <= 1e-6);
    // columns mirror under swapping the pair labels
    CHECK(std::abs(map.c_final(0, 0) - map.c_final(1, 1)) <= 1e-9);
    CHECK(std::abs(map.c_final(1, 0) - map.c_final(0, 1)) <= 1e-9);

    CHECK(map.unitarity_defect <= 1e-8);
    CHECK((map.u_ortho - exact->u_ortho.cast<complexd>()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((map.u_ortho.adjoint() * map.u_ortho - MatrixXcd::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
}

TEST_CASE("forward and backward sweeps invert each other") {
    for (auto basis : {toy_pairs(), synthetic_pairs(1.0, 1.0, -1.0 / 15.0)}) {
        auto fwd = passage::integrate_transfer(basis, passage::Direction::a_to_b);
        auto bwd = passage::integrate_transfer(basis, passage::Direction::b_to_a);
        Eigen::Index n = basis.n_pairs();
        CHECK((bwd.c_final * fwd.c_final - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <=
              1e-6);
    }
}

TEST_CASE("integration tolerances are validated") {
    auto basis = toy_pairs();
    CHECK_THROWS_AS(passage::integrate_transfer(basis, passage::Direction::a_to_b, 0.0, 1e-10),
                    invalid_input_error);
    CHECK_THROWS_AS(passage::integrate_transfer(basis, passage::Direction::a_to_b, 1e-10, 0.1),
                    invalid_input_error);
}

TEST_CASE("closed-form transfer: frozen, symmetric, and rejected regimes") {
    // orthogonal partners: nothing moves
    auto frozen = passage::analytic_two_level(2.0, 0.5, 0.0);
    REQUIRE(frozen.has_value());
    CHECK(frozen->alpha == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(frozen->beta == doctest::Approx(0.0).epsilon(1e-14));
    CHECK((frozen->c_final - Matrix2cd::Identity()).cwiseAbs().maxCoeff() <= 1e-14);

    // equal couplings with the small negative overlap
    auto tilted = passage::analytic_two_level(1.0, 1.0, -1.0 / 15.0);
    REQUIRE(tilted.has_value());
    CHECK(tilted->alpha == doctest::Approx(1.0016720878).epsilon(1e-9));
    CHECK(tilted->beta == doctest::Approx(0.0334262512).epsilon(1e-8));

    // no closed form for distinct couplings with nonzero overlap
    CHECK_FALSE(passage::analytic_two_level(2.0, 0.5, 0.1).has_value());

    CHECK_THROWS_AS(passage::analytic_two_level(1.0, 1.0, 1.0), invalid_overlap_error);
    CHECK_THROWS_AS(passage::analytic_two_level(1.0, 1.0, -1.2), invalid_overlap_error);
    CHECK_THROWS_AS(passage::analytic_two_level(0.0, 1.0, 0.0), invalid_input_error);
}

TEST_CASE("numerical transfer agrees with the closed form away from the demo point") {
    auto basis = synthetic_pairs(1.0, 1.0, -1.0 / 15.0);
    auto map = passage::integrate_transfer(basis, passage::Direction::a_to_b);
    auto exact = passage::analytic_two_level(1.0, 1.0, -1.0 / 15.0);
    REQUIRE(exact.has_value());
    CHECK((map.c_final - exact->c_final.cast<complexd>()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((map.u_ortho - exact->u_ortho.cast<complexd>()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("parallel z light at F'=3 transfers every Zeeman state identically") {
    auto sys = atom::cesium_system(3, atom::Polarization::pi(), atom::Polarization::pi());
    auto pairs = decomp::lambda_pairs(decomp::decompose(sys), sys);
    auto map = passage::integrate_transfer(pairs, passage::Direction::a_to_b);
    Eigen::Index n = pairs.n_pairs();
    REQUIRE(n == 6);
    CHECK((map.c_final - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(map.unitarity_defect <= 1e-8);
}

TEST_CASE("crossed polarizations at F'=3 mix only within parity blocks") {
    auto sys = atom::cesium_system(3, atom::Polarization::pi(), atom::Polarization::linear_x());
    auto d = decomp::decompose(sys);
    const double ms[] = {3.0, 2.0, 1.0, -1.0, -2.0, -3.0};
    MatrixXcd a_basis = MatrixXcd::Zero(7, 6);
    for (int j = 0; j < 6; ++j) a_basis(Eigen::Index(ms[j] + 3.0), j) = 1.0;
    auto pairs = decomp::lambda_pairs(d, sys, a_basis);
    auto map = passage::integrate_transfer(pairs, passage::Direction::a_to_b);

    // |3,+-2> inputs stay on the {+2,-2} pair; all other inputs avoid it
    const bool even[] = {false, true, false, false, true, false};
    for (int j = 0; j < 6; ++j) {
        for (int k = 0; k < 6; ++k) {
            if (even[j] != even[k]) CHECK(std::abs(map.c_final(j, k)) <= 1e-8);
        }
    }

    // the even block is the closed-form pair at overlap -1/15
    auto exact = passage::analytic_two_level(pairs.lambdas(1), pairs.lambdas(4), -1.0 / 15.0);
    REQUIRE(exact.has_value());
    CHECK(std::abs(map.c_final(1, 1) - complexd(exact->alpha, 0.0)) <= 1e-6);
    CHECK(std::abs(map.c_final(4, 1) - complexd(exact->beta, 0.0)) <= 1e-6);
    CHECK(std::abs(map.c_final(4, 4) - complexd(exact->alpha, 0.0)) <= 1e-6);
    CHECK(map.unitarity_defect <= 1e-8);
}

TEST_CASE("trajectory populations follow the closed-form curve") {
    auto basis = toy_pairs();
    const double z = 0.5, lambda = std::sqrt(2.0);

    VectorXd grid = grid_21();
    VectorXcd c0(2);
    c0 << 1.0, 0.0;
    auto traj = passage::trajectory(basis, c0, grid);
    REQUIRE(traj.thetas.size() == 21);
    REQUIRE(traj.coefficients.rows() == 2);
    REQUIRE(traj.pop_a.rows() == 3);
    REQUIRE(traj.pop_b.rows() == 3);

    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        double phi = std::atan2(lambda * std::sin(grid(k)), std::cos(grid(k)));
        double sp2 = std::sin(phi) * std::sin(phi);
        double c1 = 0.5 * (1.0 / std::sqrt(1.0 + z * sp2) + 1.0 / std::sqrt(1.0 - z * sp2));
        double c2 = 0.5 * (1.0 / std::sqrt(1.0 + z * sp2) - 1.0 / std::sqrt(1.0 - z * sp2));
        CHECK(std::abs(traj.coefficients(0, k) - complexd(c1, 0.0)) <= 1e-6);
        CHECK(std::abs(traj.coefficients(1, k) - complexd(c2, 0.0)) <= 1e-6);

        double cp2 = std::cos(phi) * std::cos(phi);
        CHECK(std::abs(traj.pop_a(0, k) - c1 * c1 * cp2) <= 1e-6);
        CHECK(std::abs(traj.pop_a(2, k) - c2 * c2 * cp2) <= 1e-6);
        CHECK(traj.pop_a(1, k) <= 1e-12);
        // partners overlap on |b0>
        CHECK(std::abs(traj.pop_b(0, k) - c1 * c1 * sp2 / 2.0) <= 1e-6);
        CHECK(std::abs(traj.pop_b(1, k) - (c1 + c2) * (c1 + c2) * sp2 / 2.0) <= 1e-6);
        CHECK(std::abs(traj.pop_b(2, k) - c2 * c2 * sp2 / 2.0) <= 1e-6);

        // total population conserved
        CHECK(std::abs(traj.pop_a.col(k).sum() + traj.pop_b.col(k).sum() - 1.0) <= 1e-8);
    }
}

TEST_CASE("the transient population of the far pair matches the quarter-wave value") {
    auto basis = toy_pairs();
    // angle where the pair mixing angle reaches pi/4
    double theta_star = std::atan(std::tan(std::atan(1.0)) / std::sqrt(2.0));
    VectorXd grid(3);
    grid << 0.0, theta_star, half_pi;
    VectorXcd c0(2);
    c0 << 1.0, 0.0;
    auto traj = passage::trajectory(basis, c0, grid);
    CHECK(std::abs(traj.pop_a(2, 1) - 0.008468) <= 1e-6);
    // end of sweep: populations split |alpha|^2/2, |alpha+beta|^2/2, |beta|^2/2
    auto exact = passage::analytic_two_level(std::sqrt(2.0), std::sqrt(2.0), 0.5);
    CHECK(std::abs(traj.pop_b(2, 2) - exact->beta * exact->beta / 2.0) <= 1e-6);
    CHECK(traj.pop_a.col(2).sum() <= 1e-8);
}

TEST_CASE("trajectory validates its inputs") {
    auto basis = toy_pairs();
    VectorXcd good(2);
    good << 1.0, 0.0;
    VectorXd bad_grid(2);
    bad_grid << 0.5, 0.2;
    CHECK_THROWS_AS(passage::trajectory(basis, good, bad_grid), invalid_input_error);
    VectorXd out_of_range(2);
    out_of_range << 0.0, 2.0;
    CHECK_THROWS_AS(passage::trajectory(basis, good, out_of_range), invalid_input_error);
    VectorXcd wrong_size = VectorXcd::Ones(3);
    CHECK_THROWS_AS(passage::trajectory(basis, wrong_size, grid_21()), invalid_input_error);
    VectorXcd not_normalized(2);
    not_normalized << 2.0, 0.0;
    CHECK_THROWS_AS(passage::trajectory(basis, not_normalized, grid_21()), invalid_input_error);
    CHECK_THROWS_AS(passage::trajectory(basis, good, VectorXd()), invalid_input_error);
}
