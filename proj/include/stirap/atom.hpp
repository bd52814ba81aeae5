// atom.hpp: level systems and lowering operators. Explicit matrices, the
// three-manifold demo system, or angular-momentum construction from
// (F, F', polarization) via Clebsch-Gordan coefficients.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stirap/errors.hpp"

namespace stirap::atom {

using complexd = std::complex<double>;

// Field polarization in the spherical basis e_{+1}, e_0, e_{-1},
// with e_{+-1} = -+(x +- iy)/sqrt(2) and e_0 = z.
struct Polarization {
    Eigen::Vector3cd components; // (alpha_{+1}, alpha_0, alpha_{-1}), unit norm

    explicit Polarization(const Eigen::Vector3cd& spherical);

    complexd plus() const { return components(0); }
    complexd zero() const { return components(1); }
    complexd minus() const { return components(2); }

    static Polarization sigma_plus();  // e_{+1}
    static Polarization sigma_minus(); // e_{-1}
    static Polarization pi();          // e_0 (z)
    static Polarization linear_x();
    static Polarization linear_y();
    // Convert a Cartesian (possibly complex) vector; normalized internally
    static Polarization from_cartesian(const Eigen::Vector3cd& xyz);
};

// One ground manifold F coupled to an excited manifold F'
struct TransitionSpec {
    double F{0.0};       // ground manifold angular momentum
    double F_prime{0.0}; // excited manifold angular momentum
    double beta{1.0};    // reduced coupling strength beta(F', F)

    TransitionSpec(double F_, double F_prime_, double beta_);

    // Cesium D2 ground 6S_{1/2} F in {3,4} to excited 6P_{3/2} F' in {3,4},
    // with the reduced strengths fixed by the decay branching ratios
    static TransitionSpec cesium(double F_prime_, double F_);
};

// Reduced strength table for the cesium F,F' in {3,4} transitions
double cesium_beta(double F_prime, double F);

// <F',m'|1,q;F,m> in the Condon-Shortley convention, coupling the ground
// momentum F with one photon unit q to total F'. Zero when selection rules
// fail or a projection falls outside [-F, F]; throws invalid_input_error on
// momenta or projections off the ladder entirely.
double cg_coefficient(double F_prime, double m_prime, int q, double F, double m);

// Matrix of A_F = vec(A)_F . eps over Zeeman states ordered m = -F..+F
// (rows) and m' = -F'..+F' (columns):
//   A(m, m') = beta(F',F) * sum_q conj(alpha_q) <F',m'|1,q;F,m>
// so that the raising operator A_F† carries the bare coefficients.
Eigen::MatrixXcd build_lowering_operator(const TransitionSpec& spec, const Polarization& pol);

// Closed-form dark states of a transverse field (alpha_0 = 0) for the
// transitions with printed formulas: (F,F') in {(3,3),(4,4),(4,3)}.
// Returns normalized vectors over m = -F..+F; throws
// unsupported_transition_error otherwise.
std::vector<Eigen::VectorXcd> closed_form_dark_states(const TransitionSpec& spec,
                                                      const Polarization& pol);

// Two ground manifolds a, b coupled to one excited manifold e
struct LevelSystem {
    std::vector<std::string> labels_a, labels_b, labels_e;
    Eigen::MatrixXcd A_a; // dim_a x dim_e lowering operator
    Eigen::MatrixXcd A_b; // dim_b x dim_e lowering operator

    LevelSystem(std::vector<std::string> la, std::vector<std::string> lb,
                std::vector<std::string> le, Eigen::MatrixXcd a_a, Eigen::MatrixXcd a_b);

    Eigen::Index dim_a() const { return A_a.rows(); }
    Eigen::Index dim_b() const { return A_b.rows(); }
    Eigen::Index dim_e() const { return A_a.cols(); }
    Eigen::Index dim_total() const { return dim_a() + dim_b() + dim_e(); }
};

// 3+3+3 demonstration system, state order (+, 0, -):
//   A_b = |b+><e+| + |b0><e0| + |b-><e-|
//   A_a = |a+>(<e+| + <e0|) + |a->(<e-| + <e0|)
LevelSystem toy_model();

// Cesium 6S_{1/2} (F=3 -> manifold a, F=4 -> manifold b) coupled to one
// 6P_{3/2} manifold F' in {3,4}; each ground manifold sees its own field
LevelSystem cesium_system(int excited_F, const Polarization& pol_3, const Polarization& pol_4);

} // namespace stirap::atom
