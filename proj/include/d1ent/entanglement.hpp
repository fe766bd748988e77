// entanglement.hpp: Wootters concurrence of two-qubit density matrices.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "d1ent/model.hpp"

namespace d1ent {

/// 4x4 density matrix in the product basis |++>, |+->, |-+>, |-->.
struct TwoQubitDensity {
    Eigen::Matrix4cd rho{Eigen::Matrix4cd::Zero()};

    double hermiticity_residual() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double trace() const { return rho.trace().real(); }
    double min_eigenvalue() const {
        const Eigen::Matrix4cd herm = 0.5 * (rho + rho.adjoint());
        return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(herm, Eigen::EigenvaluesOnly).eigenvalues()[0];
    }
    bool is_valid(double herm_tol = 1e-10, double trace_tol = 1e-8, double psd_tol = 1e-8) const {
        return hermiticity_residual() <= herm_tol && std::abs(trace() - 1.0) <= trace_tol &&
               min_eigenvalue() >= -psd_tol;
    }

    static TwoQubitDensity pure(const Eigen::Vector4cd& psi) { return {psi * psi.adjoint()}; }
};

/// sigma_y (x) sigma_y in the product basis; real and symmetric.
inline Eigen::Matrix4cd spin_flip() {
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    return yy;
}

/// Square roots of the eigenvalues of rho (yy) rho* (yy), descending.
///
/// With rho = W W^+, those roots are the singular values of W^T (yy) W, which
/// avoids square roots of rounded-to-tiny eigenvalues of the non-Hermitian
/// product. Eigenvalues of rho below a rounding floor are dropped from W so
/// that pure states come out exactly rank one.
inline std::array<double, 4> wootters_roots(const TwoQubitDensity& d) {
    const Eigen::Matrix4cd herm = 0.5 * (d.rho + d.rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(herm);
    const Eigen::Vector4d evals = es.eigenvalues();
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(evals.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::Matrix4cd w = es.eigenvectors();
    for (int k = 0; k < 4; ++k) w.col(k) *= evals[k] > floor ? std::sqrt(evals[k]) : 0.0;
    const Eigen::Matrix4cd tau = w.transpose() * spin_flip() * w;
    const Eigen::Vector4d sv = Eigen::JacobiSVD<Eigen::Matrix4cd>(tau).singularValues();  // descending
    return {sv[0], sv[1], sv[2], sv[3]};
}

inline double concurrence_general(const TwoQubitDensity& d) {
    if (d.hermiticity_residual() > 1e-8) throw std::invalid_argument("concurrence_general: rho is not Hermitian");
    const auto r = wootters_roots(d);
    return std::clamp(r[0] - r[1] - r[2] - r[3], 0.0, 1.0);
}

inline constexpr double kXFormTolerance = 1e-8;

/// True when every element off the diagonal and anti-diagonal is below `tol`.
inline bool is_x_form(const TwoQubitDensity& d, double tol = kXFormTolerance) {
    const auto& r = d.rho;
    for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}})
        if (std::abs(r(i, j)) > tol || std::abs(r(j, i)) > tol) return false;
    return true;
}

struct XConcurrence {
    double value;
    bool x_form_valid;
};

/// Closed form for X states; falls back to the general route otherwise.
inline XConcurrence concurrence_x(const TwoQubitDensity& d, double tol = kXFormTolerance) {
    if (!is_x_form(d, tol)) return {concurrence_general(d), false};
    const auto& r = d.rho;
    const double p11 = std::max(r(0, 0).real(), 0.0);
    const double p22 = std::max(r(1, 1).real(), 0.0);
    const double p33 = std::max(r(2, 2).real(), 0.0);
    const double p44 = std::max(r(3, 3).real(), 0.0);
    const double c1 = std::abs(r(0, 3)) - std::sqrt(p22 * p33);
    const double c2 = std::abs(r(1, 2)) - std::sqrt(p11 * p44);
    return {std::min(2.0 * std::max({0.0, c1, c2}), 1.0), true};
}

struct ConcurrenceSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<bool> x_form_valid;
    double max_route_disagreement{0.0};  // |general - X| over X-form snapshots
};

/// General concurrence per snapshot, cross-checked against the X formula
/// wherever the X precondition holds.
inline ConcurrenceSeries concurrence_series(const std::vector<double>& times,
                                            const std::vector<TwoQubitDensity>& rhos) {
    if (times.size() != rhos.size()) throw std::invalid_argument("concurrence_series: length mismatch");
    ConcurrenceSeries out;
    out.times = times;
    out.values.reserve(rhos.size());
    out.x_form_valid.reserve(rhos.size());
    for (const auto& rho : rhos) {
        const double c = concurrence_general(rho);
        const bool x = is_x_form(rho);
        if (x) out.max_route_disagreement = std::max(out.max_route_disagreement, std::abs(c - concurrence_x(rho).value));
        out.values.push_back(c);
        out.x_form_valid.push_back(x);
    }
    return out;
}

}  // namespace d1ent
