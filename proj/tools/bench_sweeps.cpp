// bench_sweeps.cpp: Times a batch of independent Schrödinger sweeps run
// through the serial reference loop and the parallel loop, and checks that
// both produce identical states.
//
// Usage: stirap_bench [n_sweeps] [omega_t]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "stirap/atom.hpp"
#include "stirap/oracle.hpp"
#include "stirap/parallel.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

} // namespace

int main(int argc, char** argv) {
    int n_sweeps = argc > 1 ? std::atoi(argv[1]) : 16;
    double omega_t = argc > 2 ? std::atof(argv[2]) : 400.0;
    if (n_sweeps < 1 || omega_t <= 0.0) {
        std::fprintf(stderr, "usage: stirap_bench [n_sweeps >= 1] [omega_t > 0]\n");
        return 2;
    }

    stirap::atom::LevelSystem system = stirap::atom::cesium_system(
        3, stirap::atom::Polarization::pi(), stirap::atom::Polarization::pi());
    const Eigen::Index dim = system.dim_total();

    // One sweep per initial ground-a Zeeman state, cycling when n_sweeps > dim_a
    std::vector<Eigen::VectorXcd> initials;
    for (int i = 0; i < n_sweeps; ++i) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
        psi(i % system.dim_a()) = 1.0;
        initials.push_back(psi);
    }
    stirap::oracle::SweepProfile profile{stirap::oracle::ProfileShape::sine_squared, omega_t,
                                         stirap::passage::Direction::a_to_b};

    auto sweep = [&](int i) {
        return stirap::oracle::evolve(system, profile, 1.0, initials[std::size_t(i)]);
    };

    std::vector<Eigen::VectorXcd> serial_states(static_cast<std::size_t>(n_sweeps));
    auto t0 = clock_type::now();
    stirap::parallel::serial_for(n_sweeps, [&](int i) {
        serial_states[std::size_t(i)] = sweep(i).final_state;
    });
    double serial_s = seconds_since(t0);

    std::vector<Eigen::VectorXcd> parallel_states(static_cast<std::size_t>(n_sweeps));
    t0 = clock_type::now();
    stirap::parallel::parallel_for(n_sweeps, [&](int i) {
        parallel_states[std::size_t(i)] = sweep(i).final_state;
    });
    double parallel_s = seconds_since(t0);

    double max_delta = 0.0;
    for (std::size_t i = 0; i < std::size_t(n_sweeps); ++i) {
        max_delta = std::max(max_delta,
                             (serial_states[i] - parallel_states[i]).cwiseAbs().maxCoeff());
    }

    std::printf("sweeps            : %d (omega_t = %g, dim = %d)\n", n_sweeps, omega_t,
                int(dim));
    std::printf("threads           : %d\n", stirap::parallel::thread_cap());
    std::printf("serial_for        : %.3f s\n", serial_s);
    std::printf("parallel_for      : %.3f s\n", parallel_s);
    std::printf("speedup           : %.2fx\n", parallel_s > 0.0 ? serial_s / parallel_s : 0.0);
    std::printf("max state delta   : %.3e\n", max_delta);
    return max_delta == 0.0 ? 0 : 1;
}
