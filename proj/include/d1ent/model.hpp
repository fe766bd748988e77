// model.hpp: physical parameters, Ohmic spectral density and bath discretization.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace d1ent {

using Complex = std::complex<double>;
using Spinor = Eigen::Vector2cd;  // amplitudes on {|+>, |->}

inline constexpr Complex kI{0.0, 1.0};

struct ModelParams {
    double delta{0.2};     // tunneling amplitude
    double alpha{0.1};     // dimensionless coupling
    double s{1.0};         // spectral exponent
    double omega_c{1.0};   // cutoff, sets the energy unit
    std::size_t n_modes{400};
    double dt{0.02};
    double t_max{100.0};
};

/// Throws std::invalid_argument naming the first violated invariant.
inline void validate(const ModelParams& p) {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid model parameters: " + what); };
    if (!(p.delta >= 0.0)) fail("delta must be >= 0");
    if (!(p.alpha >= 0.0)) fail("alpha must be >= 0");
    if (!(p.s > 0.0)) fail("s must be > 0");
    if (!(p.omega_c > 0.0)) fail("omega_c must be > 0");
    if (p.n_modes < 1) fail("n_modes must be >= 1");
    if (!(p.dt > 0.0)) fail("dt must be > 0");
    if (!(p.dt < p.t_max)) fail("dt must be < t_max");
}

/// Finite-size recurrence time 2*pi/d_omega of the linear grid. Runs longer
/// than this see the discretized bath feed energy back into the qubit.
inline double recurrence_time(const ModelParams& p) {
    return 2.0 * std::numbers::pi * static_cast<double>(p.n_modes) / p.omega_c;
}

inline bool exceeds_recurrence(const ModelParams& p) { return p.t_max >= recurrence_time(p); }

/// J(w) = 2 alpha w_c^(1-s) w^s below the hard cutoff w_c, zero above it.
inline double spectral_density(double omega, const ModelParams& p) {
    if (omega < 0.0) throw std::domain_error("spectral_density: negative frequency");
    if (omega > p.omega_c) return 0.0;
    return 2.0 * p.alpha * std::pow(p.omega_c, 1.0 - p.s) * std::pow(omega, p.s);
}

struct BathModes {
    Eigen::VectorXd omegas;
    Eigen::VectorXd lambdas;

    std::size_t size() const { return static_cast<std::size_t>(omegas.size()); }
};

/// Midpoint grid w_l = (l - 1/2) dw, dw = w_c / n, with lambda_l^2 = J(w_l) dw.
inline BathModes discretize_bath(const ModelParams& p) {
    validate(p);
    const auto n = static_cast<Eigen::Index>(p.n_modes);
    const double dw = p.omega_c / static_cast<double>(p.n_modes);
    BathModes bath;
    bath.omegas.resize(n);
    bath.lambdas.resize(n);
    for (Eigen::Index l = 0; l < n; ++l) {
        const double w = (static_cast<double>(l) + 0.5) * dw;
        bath.omegas[l] = w;
        bath.lambdas[l] = std::sqrt(spectral_density(w, p) * dw);
    }
    return bath;
}

/// Bath built from explicit mode lists, used for single-mode and oracle studies.
inline BathModes make_bath(std::vector<double> omegas, std::vector<double> lambdas) {
    if (omegas.size() != lambdas.size() || omegas.empty())
        throw std::invalid_argument("make_bath: mode lists must be nonempty and of equal length");
    BathModes bath;
    bath.omegas = Eigen::Map<Eigen::VectorXd>(omegas.data(), static_cast<Eigen::Index>(omegas.size()));
    bath.lambdas = Eigen::Map<Eigen::VectorXd>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
    for (Eigen::Index l = 0; l < bath.omegas.size(); ++l) {
        if (!(bath.omegas[l] > 0.0) || (l > 0 && !(bath.omegas[l] > bath.omegas[l - 1])))
            throw std::invalid_argument("make_bath: frequencies must be positive and strictly increasing");
        if (!(bath.lambdas[l] >= 0.0)) throw std::invalid_argument("make_bath: couplings must be >= 0");
    }
    return bath;
}

}  // namespace d1ent
