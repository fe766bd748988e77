// d1_solver.hpp: Dirac-Frenkel dynamics of the Davydov D1 trial state
//
//   |D1> = A |+> |f> + B |-> |g>,   |f> = exp(sum_l f_l b_l^+ - h.c.)|0>,
//
// under H = -(delta/2) sigma_x + sum_l w_l b_l^+ b_l + (sigma_z/2) sum_l lambda_l (b_l^+ + b_l).

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d1ent/model.hpp"
#include "d1ent/rk4.hpp"

namespace d1ent {

/// Raised when an integration cannot continue (non-finite values or norm
/// drift past the hard bound).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kAmplitudeEpsilon = 1e-12;
inline constexpr double kNormAbortBound = 1e-4;

/// Packed as [A, B, f_1..f_n, g_1..g_n] so the integrator sees one vector.
struct D1State {
    Eigen::VectorXcd y;
    double time{0.0};

    D1State() = default;
    D1State(Complex a, Complex b, const Eigen::VectorXcd& f, const Eigen::VectorXcd& g, double t = 0.0)
        : y(2 + f.size() + g.size()), time(t) {
        if (f.size() != g.size()) throw std::invalid_argument("D1State: f and g must have equal length");
        y[0] = a;
        y[1] = b;
        y.segment(2, f.size()) = f;
        y.segment(2 + f.size(), g.size()) = g;
    }

    /// Spin state `spin` with both displacement vectors at the bath vacuum.
    static D1State vacuum(const Spinor& spin, std::size_t n_modes) {
        const auto n = static_cast<Eigen::Index>(n_modes);
        return {spin[0], spin[1], Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(n)};
    }

    Eigen::Index n_modes() const { return (y.size() - 2) / 2; }
    Complex a_amp() const { return y[0]; }
    Complex b_amp() const { return y[1]; }
    auto f() const { return y.segment(2, n_modes()); }
    auto g() const { return y.segment(2 + n_modes(), n_modes()); }
    double norm() const { return std::norm(y[0]) + std::norm(y[1]); }
};

struct D1Trajectory {
    std::vector<double> times;
    std::vector<D1State> states;
    std::vector<double> norm_series;
    std::vector<double> energy_series;

    double max_norm_drift() const {
        double m = 0.0;
        for (double n : norm_series) m = std::max(m, std::abs(n - 1.0));
        return m;
    }
    /// |E(t) - E(0)| / max(|E(0)|, scale), maximized over the trajectory.
    double max_energy_drift(double scale) const {
        double m = 0.0;
        if (energy_series.empty()) return m;
        const double denom = std::max(std::abs(energy_series.front()), scale);
        for (double e : energy_series) m = std::max(m, std::abs(e - energy_series.front()) / denom);
        return m;
    }
};

/// <f|g> for normalized multimode coherent states.
template <class VecF, class VecG>
Complex overlap_factor(const VecF& f, const VecG& g) {
    if (f.size() != g.size()) throw std::invalid_argument("overlap_factor: length mismatch");
    const Complex exponent = f.dot(g) - 0.5 * (f.squaredNorm() + g.squaredNorm());
    return std::exp(exponent);
}

namespace detail {

// x* / (|x|^2 + eps): the regularized inverse used for the branch amplitude ratios.
inline Complex regularized_inverse(Complex x) { return std::conj(x) / (std::norm(x) + kAmplitudeEpsilon); }

inline bool all_finite(const Eigen::VectorXcd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    return true;
}

inline Eigen::VectorXcd d1_rhs_packed(const Eigen::VectorXcd& y, const BathModes& bath, double delta) {
    const Eigen::Index n = (y.size() - 2) / 2;
    const Complex a = y[0];
    const Complex b = y[1];
    const auto f = y.segment(2, n);
    const auto g = y.segment(2 + n, n);
    const Eigen::VectorXcd w = bath.omegas.cast<Complex>();
    const Eigen::VectorXcd lam = bath.lambdas.cast<Complex>();

    const Complex s_fg = overlap_factor(f, g);
    const Complex s_gf = std::conj(s_fg);

    // Displacement equations contain no amplitude derivatives; solve them first.
    const Complex tun_f = 0.5 * delta * b * regularized_inverse(a) * s_fg;
    const Complex tun_g = 0.5 * delta * a * regularized_inverse(b) * s_gf;
    Eigen::VectorXcd out(y.size());
    auto fdot = out.segment(2, n);
    auto gdot = out.segment(2 + n, n);
    fdot = -kI * (0.5 * lam + w.cwiseProduct(f) + tun_f * (f - g));
    gdot = -kI * (w.cwiseProduct(g) - 0.5 * lam + tun_g * (g - f));

    const double phase_f = f.dot(fdot).imag();  // Im sum fdot f*
    const double phase_g = g.dot(gdot).imag();
    const double ef = (bath.omegas.array() * f.array().abs2()).sum() + bath.lambdas.dot(f.real());
    const double eg = (bath.omegas.array() * g.array().abs2()).sum() - bath.lambdas.dot(g.real());
    out[0] = -kI * (a * (phase_f + ef) - 0.5 * delta * b * s_fg);
    out[1] = -kI * (b * (phase_g + eg) - 0.5 * delta * a * s_gf);
    return out;
}

}  // namespace detail

/// Time derivative of (A, B, f, g), packed like D1State::y.
inline Eigen::VectorXcd eom_rhs(const D1State& state, const BathModes& bath, double delta) {
    if (state.n_modes() != static_cast<Eigen::Index>(bath.size()))
        throw std::invalid_argument("eom_rhs: state and bath mode counts differ");
    if (!detail::all_finite(state.y)) throw SolverError("eom_rhs: non-finite state at t=" + std::to_string(state.time));
    return detail::d1_rhs_packed(state.y, bath, delta);
}

inline double energy_expectation(const D1State& state, const BathModes& bath, double delta) {
    const auto f = state.f();
    const auto g = state.g();
    const Complex a = state.a_amp();
    const Complex b = state.b_amp();
    const double tunneling = -0.5 * delta * 2.0 * (std::conj(a) * b * overlap_factor(f, g)).real();
    const double plus = (bath.omegas.array() * f.array().abs2()).sum() + bath.lambdas.dot(f.real());
    const double minus = (bath.omegas.array() * g.array().abs2()).sum() - bath.lambdas.dot(g.real());
    return tunneling + std::norm(a) * plus + std::norm(b) * minus;
}

inline D1State step(const D1State& state, const BathModes& bath, double delta, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (state.n_modes() != static_cast<Eigen::Index>(bath.size()))
        throw std::invalid_argument("step: state and bath mode counts differ");
    auto rhs = [&](const Eigen::VectorXcd& y) { return detail::d1_rhs_packed(y, bath, delta); };
    D1State next;
    next.y = rk4_step(state.y, dt, rhs);
    next.time = state.time + dt;
    if (!detail::all_finite(next.y)) throw SolverError("D1 step: non-finite state at t=" + std::to_string(next.time));
    return next;
}

/// Integrates from `initial` (taken to sit at t = times.front() offset zero)
/// with fixed step dt and records a snapshot at each output time.
inline D1Trajectory evolve(const D1State& initial, const BathModes& bath, double delta,
                           const std::vector<double>& times, double dt) {
    const auto steps = steps_for_grid(times, dt);
    D1Trajectory traj;
    traj.times = times;
    traj.states.reserve(times.size());
    D1State cur = initial;
    cur.time = 0.0;
    std::size_t done = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        for (; done < steps[i]; ++done) {
            cur = step(cur, bath, delta, dt);
            cur.time = static_cast<double>(done + 1) * dt;
            if (std::abs(cur.norm() - 1.0) > kNormAbortBound)
                throw SolverError("variational breakdown: norm drift " + std::to_string(cur.norm() - 1.0) +
                                  " at t=" + std::to_string(cur.time));
        }
        D1State snap = cur;
        snap.time = times[i];
        traj.norm_series.push_back(snap.norm());
        traj.energy_series.push_back(energy_expectation(snap, bath, delta));
        traj.states.push_back(std::move(snap));
    }
    return traj;
}

}  // namespace d1ent
