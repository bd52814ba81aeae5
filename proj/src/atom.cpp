#include "stirap/atom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace stirap::atom {

namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;

double factorial(int n) {
    static const auto table = [] {
        std::array<double, 33> t{};
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * double(i);
        return t;
    }();
    return table.at(static_cast<std::size_t>(n));
}

// Doubled-integer representation (2j, 2m) keeps half-integer momenta exact
int doubled(double j, const char* who) {
    double t = 2.0 * j;
    int ti = static_cast<int>(std::lround(t));
    if (std::abs(t - ti) > 1e-9) {
        throw invalid_input_error(std::string(who) + ": momentum must be integer or half-integer");
    }
    return ti;
}

// <j1 m1; j2 m2 | j3 m3> by the Racah closed form, Condon-Shortley phases
double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tj3, int tm3) {
    if (tm1 + tm2 != tm3) return 0.0;
    int a1 = (tj1 + tj2 - tj3) / 2;
    int a2 = (tj1 - tj2 + tj3) / 2;
    int a3 = (-tj1 + tj2 + tj3) / 2;
    if ((tj1 + tj2 + tj3) % 2 != 0 || a1 < 0 || a2 < 0 || a3 < 0) return 0.0;

    double pref = (tj3 + 1.0) * factorial(a1) * factorial(a2) * factorial(a3) /
                  factorial((tj1 + tj2 + tj3) / 2 + 1);
    pref *= factorial((tj3 + tm3) / 2) * factorial((tj3 - tm3) / 2) *
            factorial((tj1 + tm1) / 2) * factorial((tj1 - tm1) / 2) *
            factorial((tj2 + tm2) / 2) * factorial((tj2 - tm2) / 2);

    int kmin = std::max({0, (tj2 - tj3 - tm1) / 2, (tj1 - tj3 + tm2) / 2});
    int kmax = std::min({a1, (tj1 - tm1) / 2, (tj2 + tm2) / 2});
    double sum = 0.0;
    for (int k = kmin; k <= kmax; ++k) {
        double denom = factorial(k) * factorial(a1 - k) *
                       factorial((tj1 - tm1) / 2 - k) * factorial((tj2 + tm2) / 2 - k) *
                       factorial((tj3 - tj2 + tm1) / 2 + k) * factorial((tj3 - tj1 - tm2) / 2 + k);
        sum += (k % 2 == 0 ? 1.0 : -1.0) / denom;
    }
    return std::sqrt(pref) * sum;
}

// A projection off the Zeeman ladder is malformed; one merely outside
// [-j, j] is a vanishing coefficient, not an error
bool projection_in_range(double j, double m, const char* who) {
    int tj = doubled(j, who);
    int tm = doubled(m, who);
    if (tj < 0 || (tj - tm) % 2 != 0) {
        throw invalid_input_error(std::string(who) + ": projection " + std::to_string(m) +
                                  " invalid for momentum " + std::to_string(j));
    }
    return std::abs(tm) <= tj;
}

complexd spherical_component(const Polarization& pol, int q) {
    switch (q) {
        case +1: return pol.plus();
        case 0: return pol.zero();
        case -1: return pol.minus();
        default: throw invalid_input_error("polarization: q must be -1, 0, or +1");
    }
}

std::vector<std::string> zeeman_labels(int F) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(2 * F + 1));
    for (int m = -F; m <= F; ++m) {
        out.push_back(std::to_string(F) + "," + std::to_string(m));
    }
    return out;
}

} // namespace

Polarization::Polarization(const Eigen::Vector3cd& spherical) : components(spherical) {
    if (!components.allFinite()) {
        throw invalid_input_error("Polarization: components must be finite");
    }
    if (std::abs(components.squaredNorm() - 1.0) > 1e-12) {
        throw invalid_input_error("Polarization: components must have unit norm");
    }
}

Polarization Polarization::sigma_plus() { return Polarization({1.0, 0.0, 0.0}); }
Polarization Polarization::sigma_minus() { return Polarization({0.0, 0.0, 1.0}); }
Polarization Polarization::pi() { return Polarization({0.0, 1.0, 0.0}); }
Polarization Polarization::linear_x() { return Polarization({-inv_sqrt2, 0.0, inv_sqrt2}); }

Polarization Polarization::linear_y() {
    return Polarization({complexd(0.0, inv_sqrt2), 0.0, complexd(0.0, inv_sqrt2)});
}

Polarization Polarization::from_cartesian(const Eigen::Vector3cd& xyz) {
    if (!xyz.allFinite() || xyz.norm() < 1e-12) {
        throw invalid_input_error("Polarization: Cartesian vector must be finite and nonzero");
    }
    Eigen::Vector3cd v = xyz / xyz.norm();
    const complexd i(0.0, 1.0);
    Eigen::Vector3cd e_plus(-inv_sqrt2, -i * inv_sqrt2, 0.0); // e_{+1} = -(x + iy)/sqrt(2)
    Eigen::Vector3cd e_zero(0.0, 0.0, 1.0);
    Eigen::Vector3cd e_minus(inv_sqrt2, -i * inv_sqrt2, 0.0); // e_{-1} = +(x - iy)/sqrt(2)
    Eigen::Vector3cd sph(e_plus.dot(v), e_zero.dot(v), e_minus.dot(v));
    sph /= sph.norm();
    return Polarization(sph);
}

TransitionSpec::TransitionSpec(double F_, double F_prime_, double beta_)
    : F(F_), F_prime(F_prime_), beta(beta_) {
    doubled(F, "TransitionSpec");
    doubled(F_prime, "TransitionSpec");
    if (F < 0.0 || F_prime < 0.0) {
        throw invalid_input_error("TransitionSpec: momenta must be non-negative");
    }
    if (std::abs(F - F_prime) > 1.0 + 1e-9) {
        throw invalid_input_error("TransitionSpec: |F - F'| must be at most 1 (dipole selection)");
    }
    if (!std::isfinite(beta) || beta <= 0.0) {
        throw invalid_input_error("TransitionSpec: beta must be finite and positive");
    }
    bool cesium_pair = (F == 3.0 || F == 4.0) && (F_prime == 3.0 || F_prime == 4.0);
    if (cesium_pair && std::abs(beta - cesium_beta(F_prime, F)) > 1e-12) {
        throw invalid_input_error("TransitionSpec: beta disagrees with the cesium strength table");
    }
}

TransitionSpec TransitionSpec::cesium(double F_prime_, double F_) {
    return TransitionSpec(F_, F_prime_, cesium_beta(F_prime_, F_));
}

double cesium_beta(double F_prime, double F) {
    if (F_prime == 3.0 && F == 3.0) return std::sqrt(3.0 / 4.0);
    if (F_prime == 3.0 && F == 4.0) return std::sqrt(1.0 / 4.0);
    if (F_prime == 4.0 && F == 3.0) return std::sqrt(5.0 / 12.0);
    if (F_prime == 4.0 && F == 4.0) return std::sqrt(7.0 / 12.0);
    throw invalid_input_error("cesium_beta: strengths tabulated only for F, F' in {3, 4}");
}

double cg_coefficient(double F_prime, double m_prime, int q, double F, double m) {
    if (q < -1 || q > 1) {
        throw invalid_input_error("cg_coefficient: q must be -1, 0, or +1");
    }
    if (!projection_in_range(F, m, "cg_coefficient") ||
        !projection_in_range(F_prime, m_prime, "cg_coefficient")) {
        return 0.0;
    }
    // Couple the ground momentum with the photon unit: <F,m; 1,q | F',m'>
    return clebsch_gordan(doubled(F, "cg_coefficient"), doubled(m, "cg_coefficient"), 2,
                          2 * q, doubled(F_prime, "cg_coefficient"),
                          doubled(m_prime, "cg_coefficient"));
}

Eigen::MatrixXcd build_lowering_operator(const TransitionSpec& spec, const Polarization& pol) {
    const int F2 = doubled(spec.F, "build_lowering_operator");
    const int Fp2 = doubled(spec.F_prime, "build_lowering_operator");
    const Eigen::Index rows = F2 + 1;
    const Eigen::Index cols = Fp2 + 1;

    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(rows, cols);
    for (Eigen::Index im = 0; im < rows; ++im) {
        double m = double(im) - spec.F;
        for (int q = -1; q <= 1; ++q) {
            double mp = m + q;
            if (std::abs(mp) > spec.F_prime + 1e-9) continue;
            Eigen::Index imp = static_cast<Eigen::Index>(std::lround(mp + spec.F_prime));
            a(im, imp) += spec.beta * std::conj(spherical_component(pol, q)) *
                          cg_coefficient(spec.F_prime, mp, q, spec.F, m);
        }
    }
    return a;
}

std::vector<Eigen::VectorXcd> closed_form_dark_states(const TransitionSpec& spec,
                                                      const Polarization& pol) {
    if (std::abs(pol.zero()) > 1e-12) {
        throw unsupported_transition_error(
            "closed_form_dark_states: requires transverse polarization (zero e_0 component)");
    }
    const complexd ap = pol.plus();
    const complexd am = pol.minus();
    const Eigen::Index dim = static_cast<Eigen::Index>(std::lround(2.0 * spec.F)) + 1;
    auto at_m = [&](Eigen::VectorXcd& v, int m, complexd value) {
        v(static_cast<Eigen::Index>(std::lround(m + spec.F))) = value;
    };

    std::vector<Eigen::VectorXcd> out;
    if (spec.F == 3.0 && spec.F_prime == 3.0) {
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(dim);
        at_m(d, 3, std::sqrt(5.0) * ap * ap * ap);
        at_m(d, 1, std::sqrt(3.0) * ap * ap * am);
        at_m(d, -1, std::sqrt(3.0) * ap * am * am);
        at_m(d, -3, std::sqrt(5.0) * am * am * am);
        out.push_back(d / d.norm());
    } else if (spec.F == 4.0 && spec.F_prime == 4.0) {
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(dim);
        at_m(d, 4, std::sqrt(35.0) * ap * ap * ap * ap);
        at_m(d, 2, std::sqrt(20.0) * ap * ap * ap * am);
        at_m(d, 0, std::sqrt(18.0) * ap * ap * am * am);
        at_m(d, -2, std::sqrt(20.0) * ap * am * am * am);
        at_m(d, -4, std::sqrt(35.0) * am * am * am * am);
        out.push_back(d / d.norm());
    } else if (spec.F == 4.0 && spec.F_prime == 3.0) {
        Eigen::VectorXcd even = Eigen::VectorXcd::Zero(dim);
        at_m(even, 4, ap * ap * ap * ap);
        at_m(even, 2, -std::sqrt(28.0) * ap * ap * ap * am);
        at_m(even, 0, std::sqrt(70.0) * ap * ap * am * am);
        at_m(even, -2, -std::sqrt(28.0) * ap * am * am * am);
        at_m(even, -4, am * am * am * am);
        Eigen::VectorXcd odd = Eigen::VectorXcd::Zero(dim);
        at_m(odd, 3, ap * ap * ap);
        at_m(odd, 1, -std::sqrt(7.0) * ap * ap * am);
        at_m(odd, -1, std::sqrt(7.0) * ap * am * am);
        at_m(odd, -3, -am * am * am);
        out.push_back(even / even.norm());
        out.push_back(odd / odd.norm());
    } else {
        throw unsupported_transition_error(
            "closed_form_dark_states: no closed form for this (F, F') pattern");
    }
    return out;
}

LevelSystem::LevelSystem(std::vector<std::string> la, std::vector<std::string> lb,
                         std::vector<std::string> le, Eigen::MatrixXcd a_a, Eigen::MatrixXcd a_b)
    : labels_a(std::move(la)), labels_b(std::move(lb)), labels_e(std::move(le)),
      A_a(std::move(a_a)), A_b(std::move(a_b)) {
    if (A_a.rows() == 0 || A_b.rows() == 0 || A_a.cols() == 0) {
        throw invalid_input_error("LevelSystem: all three manifolds must be nonempty");
    }
    if (A_a.cols() != A_b.cols()) {
        throw invalid_input_error("LevelSystem: A_a and A_b must share the excited dimension");
    }
    if (!A_a.allFinite() || !A_b.allFinite()) {
        throw invalid_input_error("LevelSystem: lowering operators must be finite");
    }
    auto check_labels = [](const std::vector<std::string>& labels, Eigen::Index dim,
                           const char* name) {
        if (static_cast<Eigen::Index>(labels.size()) != dim) {
            throw invalid_input_error(std::string("LevelSystem: ") + name +
                                      " label count disagrees with dimension");
        }
        std::set<std::string> seen(labels.begin(), labels.end());
        if (seen.size() != labels.size()) {
            throw invalid_input_error(std::string("LevelSystem: ") + name +
                                      " labels must be unique");
        }
    };
    check_labels(labels_a, dim_a(), "a");
    check_labels(labels_b, dim_b(), "b");
    check_labels(labels_e, dim_e(), "e");
}

LevelSystem toy_model() {
    Eigen::MatrixXcd a_b = Eigen::MatrixXcd::Identity(3, 3);
    Eigen::MatrixXcd a_a = Eigen::MatrixXcd::Zero(3, 3);
    a_a(0, 0) = 1.0; // |a+><e+|
    a_a(0, 1) = 1.0; // |a+><e0|
    a_a(2, 1) = 1.0; // |a-><e0|
    a_a(2, 2) = 1.0; // |a-><e-|
    return LevelSystem({"a+", "a0", "a-"}, {"b+", "b0", "b-"}, {"e+", "e0", "e-"},
                       std::move(a_a), std::move(a_b));
}

LevelSystem cesium_system(int excited_F, const Polarization& pol_3, const Polarization& pol_4) {
    if (excited_F != 3 && excited_F != 4) {
        throw invalid_input_error("cesium_system: excited manifold must be F' = 3 or 4");
    }
    Eigen::MatrixXcd a_a = build_lowering_operator(TransitionSpec::cesium(excited_F, 3.0), pol_3);
    Eigen::MatrixXcd a_b = build_lowering_operator(TransitionSpec::cesium(excited_F, 4.0), pol_4);
    return LevelSystem(zeeman_labels(3), zeeman_labels(4), zeeman_labels(excited_F),
                       std::move(a_a), std::move(a_b));
}

} // namespace stirap::atom
