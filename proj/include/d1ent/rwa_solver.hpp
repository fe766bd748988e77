// rwa_solver.hpp: exact dynamics of the rotated spin-boson model under the
// rotating-wave approximation, restricted to the zero/one-excitation sector
//
//   |phi> = c |-,0> + c0 |+,0> + sum_l c_l |-,1_l>.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "d1ent/d1_solver.hpp"
#include "d1ent/model.hpp"
#include "d1ent/rk4.hpp"

namespace d1ent {

struct RwaState {
    Complex c_ground{0.0};
    Complex c_zero{0.0};
    Eigen::VectorXcd c_modes;
    double time{0.0};

    static RwaState vacuum(const Spinor& spin, std::size_t n_modes) {
        return {spin[1], spin[0], Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_modes)), 0.0};
    }

    double excitation_number() const { return std::norm(c_zero) + c_modes.squaredNorm(); }
    double norm() const { return std::norm(c_ground) + excitation_number(); }
};

struct RwaDerivative {
    Complex c_ground;
    Complex c_zero;
    Eigen::VectorXcd c_modes;
};

/// <H_RWA> for the state; conserved by the exact dynamics.
inline double rwa_energy(const RwaState& st, const BathModes& bath, double delta) {
    const double spin = 0.5 * delta * (std::norm(st.c_zero) - std::norm(st.c_ground) - st.c_modes.squaredNorm());
    const double field = (bath.omegas.array() * st.c_modes.array().abs2()).sum();
    const double coupling = (st.c_zero * std::conj(bath.lambdas.cast<Complex>().dot(st.c_modes))).real();
    return spin + field + coupling;
}

namespace detail {

// Packed excited sector [c0, c_1..c_n].
inline Eigen::VectorXcd rwa_rhs_packed(const Eigen::VectorXcd& y, const BathModes& bath, double delta) {
    const Eigen::Index n = y.size() - 1;
    const Complex c0 = y[0];
    const auto cl = y.segment(1, n);
    Eigen::VectorXcd out(y.size());
    out[0] = -kI * (0.5 * delta * c0 + 0.5 * bath.lambdas.cast<Complex>().dot(cl));
    out.segment(1, n) =
        -kI * ((bath.omegas.array() - 0.5 * delta).matrix().cast<Complex>().cwiseProduct(cl) +
               (0.5 * c0) * bath.lambdas.cast<Complex>());
    return out;
}

inline Eigen::VectorXcd pack(const RwaState& st) {
    Eigen::VectorXcd y(st.c_modes.size() + 1);
    y[0] = st.c_zero;
    y.segment(1, st.c_modes.size()) = st.c_modes;
    return y;
}

}  // namespace detail

inline RwaDerivative rwa_rhs(const RwaState& st, const BathModes& bath, double delta) {
    if (st.c_modes.size() != static_cast<Eigen::Index>(bath.size()))
        throw std::invalid_argument("rwa_rhs: state and bath mode counts differ");
    const Eigen::VectorXcd d = detail::rwa_rhs_packed(detail::pack(st), bath, delta);
    return {kI * (0.5 * delta) * st.c_ground, d[0], d.segment(1, st.c_modes.size())};
}

struct RwaTrajectory {
    std::vector<double> times;
    std::vector<RwaState> states;
    std::vector<double> norm_series;
    std::vector<double> energy_series;

    double max_norm_drift() const {
        double m = 0.0;
        for (double n : norm_series) m = std::max(m, std::abs(n - 1.0));
        return m;
    }
    double max_energy_drift(double scale) const {
        double m = 0.0;
        if (energy_series.empty()) return m;
        const double denom = std::max(std::abs(energy_series.front()), scale);
        for (double e : energy_series) m = std::max(m, std::abs(e - energy_series.front()) / denom);
        return m;
    }
};

/// RK4 for the excited sector; the decoupled ground amplitude picks up the
/// exact phase exp(i delta t / 2).
inline RwaTrajectory evolve_rwa(const RwaState& initial, const BathModes& bath, double delta,
                                const std::vector<double>& times, double dt) {
    if (initial.c_modes.size() != static_cast<Eigen::Index>(bath.size()))
        throw std::invalid_argument("evolve_rwa: state and bath mode counts differ");
    const auto steps = steps_for_grid(times, dt);
    auto rhs = [&](const Eigen::VectorXcd& y) { return detail::rwa_rhs_packed(y, bath, delta); };

    RwaTrajectory traj;
    traj.times = times;
    Eigen::VectorXcd y = detail::pack(initial);
    const Eigen::Index n = initial.c_modes.size();
    std::size_t done = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        for (; done < steps[i]; ++done) {
            y = rk4_step(y, dt, rhs);
            if (!detail::all_finite(y)) throw SolverError("RWA step: non-finite state");
        }
        RwaState snap;
        snap.time = times[i];
        snap.c_ground = initial.c_ground * std::exp(kI * (0.5 * delta * times[i]));
        snap.c_zero = y[0];
        snap.c_modes = y.segment(1, n);
        if (std::abs(snap.norm() - initial.norm()) > kNormAbortBound)
            throw SolverError("RWA unitarity lost at t=" + std::to_string(snap.time));
        traj.norm_series.push_back(snap.norm());
        traj.energy_series.push_back(rwa_energy(snap, bath, delta));
        traj.states.push_back(std::move(snap));
    }
    return traj;
}

}  // namespace d1ent
