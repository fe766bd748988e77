// oracle.hpp: brute-force propagation of one qubit plus a few bath modes in a
// truncated Fock space. Used to validate both solvers at desk scale.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "d1ent/composer.hpp"
#include "d1ent/d1_solver.hpp"
#include "d1ent/model.hpp"
#include "d1ent/rwa_solver.hpp"

namespace d1ent::oracle {

inline constexpr std::size_t kMaxModes = 5;
inline constexpr std::size_t kMaxOccupation = 8;
inline constexpr std::size_t kMaxDimension = std::size_t{1} << 20;
// Dense eigendecomposition is the only propagator; keep matrices desk-sized.
inline constexpr std::size_t kMaxDenseDimension = 4096;

/// Basis |s, n_1 .. n_M>, spin-major with mixed-radix occupations (mode 1 slowest).
class TruncatedSpace {
public:
    TruncatedSpace(std::size_t n_modes, std::size_t n_max) : n_modes_(n_modes), n_max_(n_max) {
        if (n_modes < 1 || n_modes > kMaxModes) throw std::invalid_argument("TruncatedSpace: 1..5 modes supported");
        if (n_max < 1 || n_max > kMaxOccupation) throw std::invalid_argument("TruncatedSpace: n_max must be 1..8");
        bath_dim_ = 1;
        for (std::size_t l = 0; l < n_modes; ++l) bath_dim_ *= (n_max + 1);
        if (2 * bath_dim_ > kMaxDimension) throw std::invalid_argument("TruncatedSpace: dimension exceeds 2^20");
    }

    std::size_t n_modes() const { return n_modes_; }
    std::size_t n_max() const { return n_max_; }
    std::size_t bath_dimension() const { return bath_dim_; }
    std::size_t dimension() const { return 2 * bath_dim_; }

    std::vector<std::size_t> occupations(std::size_t bath_index) const {
        std::vector<std::size_t> occ(n_modes_);
        for (std::size_t l = n_modes_; l-- > 0;) {
            occ[l] = bath_index % (n_max_ + 1);
            bath_index /= (n_max_ + 1);
        }
        return occ;
    }
    std::size_t bath_index(const std::vector<std::size_t>& occ) const {
        std::size_t idx = 0;
        for (std::size_t l = 0; l < n_modes_; ++l) idx = idx * (n_max_ + 1) + occ[l];
        return idx;
    }
    /// spin 0 = |+>, 1 = |->.
    std::size_t index(int spin, std::size_t bath_idx) const { return static_cast<std::size_t>(spin) * bath_dim_ + bath_idx; }

private:
    std::size_t n_modes_;
    std::size_t n_max_;
    std::size_t bath_dim_{1};
};

/// Dense Hamiltonian of one qubit and its truncated bath. `rwa` keeps only
/// the excitation-conserving coupling and requires the RSB frame.
inline Eigen::MatrixXcd build_hamiltonian(Frame frame, bool rwa, double delta, const BathModes& bath,
                                          const TruncatedSpace& space) {
    if (bath.size() != space.n_modes()) throw std::invalid_argument("oracle: bath and space mode counts differ");
    if (rwa && frame != Frame::RSB) throw std::invalid_argument("oracle: RWA Hamiltonian is defined in the RSB frame");
    if (space.dimension() > kMaxDenseDimension) throw std::invalid_argument("oracle: dimension too large for dense propagation");
    const auto dim = static_cast<Eigen::Index>(space.dimension());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    auto at = [&](int s, std::size_t b) { return static_cast<Eigen::Index>(space.index(s, b)); };

    for (std::size_t b = 0; b < space.bath_dimension(); ++b) {
        const auto occ = space.occupations(b);
        double field = 0.0;
        for (std::size_t l = 0; l < occ.size(); ++l) field += bath.omegas[static_cast<Eigen::Index>(l)] * static_cast<double>(occ[l]);
        for (int s = 0; s < 2; ++s) h(at(s, b), at(s, b)) += field;
        if (frame == Frame::SB) {
            h(at(0, b), at(1, b)) += -0.5 * delta;
            h(at(1, b), at(0, b)) += -0.5 * delta;
        } else {
            h(at(0, b), at(0, b)) += 0.5 * delta;
            h(at(1, b), at(1, b)) += -0.5 * delta;
        }
        // Raising one mode: <n+1| b^+ |n> = sqrt(n+1).
        for (std::size_t l = 0; l < occ.size(); ++l) {
            if (occ[l] == space.n_max()) continue;
            auto up = occ;
            ++up[l];
            const std::size_t b2 = space.bath_index(up);
            const double amp = 0.5 * bath.lambdas[static_cast<Eigen::Index>(l)] * std::sqrt(static_cast<double>(occ[l] + 1));
            if (frame == Frame::SB) {
                // (sigma_z / 2) lambda (b + b^+)
                for (int s = 0; s < 2; ++s) {
                    const double sign = s == 0 ? 1.0 : -1.0;
                    h(at(s, b2), at(s, b)) += sign * amp;
                    h(at(s, b), at(s, b2)) += sign * amp;
                }
            } else if (rwa) {
                // (lambda/2)(b^+ sigma_- + b sigma_+): |+, n> -> |-, n+1> and back.
                h(at(1, b2), at(0, b)) += amp;
                h(at(0, b), at(1, b2)) += amp;
            } else {
                // (sigma_x / 2) lambda (b + b^+)
                h(at(1, b2), at(0, b)) += amp;
                h(at(0, b2), at(1, b)) += amp;
                h(at(0, b), at(1, b2)) += amp;
                h(at(1, b), at(0, b2)) += amp;
            }
        }
    }
    return h;
}

/// sigma_+ sigma_- + sum_l b_l^+ b_l, diagonal in the product basis.
inline Eigen::MatrixXcd excitation_number(const TruncatedSpace& space) {
    const auto dim = static_cast<Eigen::Index>(space.dimension());
    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t b = 0; b < space.bath_dimension(); ++b) {
        double occ = 0.0;
        for (auto o : space.occupations(b)) occ += static_cast<double>(o);
        n(static_cast<Eigen::Index>(space.index(0, b)), static_cast<Eigen::Index>(space.index(0, b))) = occ + 1.0;
        n(static_cast<Eigen::Index>(space.index(1, b)), static_cast<Eigen::Index>(space.index(1, b))) = occ;
    }
    return n;
}

/// e^{-iHt} via one eigendecomposition, reused for every time.
class ExactPropagator {
public:
    explicit ExactPropagator(const Eigen::MatrixXcd& h) : es_(0.5 * (h + h.adjoint())) {
        if (es_.info() != Eigen::Success) throw std::runtime_error("ExactPropagator: eigendecomposition failed");
    }

    const Eigen::VectorXd& eigenvalues() const { return es_.eigenvalues(); }

    Eigen::VectorXcd propagate(const Eigen::VectorXcd& initial, double t) const {
        const Eigen::VectorXcd coeffs = es_.eigenvectors().adjoint() * initial;
        Eigen::VectorXcd phased(coeffs.size());
        for (Eigen::Index k = 0; k < coeffs.size(); ++k) phased[k] = coeffs[k] * std::exp(-kI * (es_.eigenvalues()[k] * t));
        return es_.eigenvectors() * phased;
    }

private:
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_;
};

inline Eigen::VectorXcd exact_propagate(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& initial, double t) {
    return ExactPropagator(h).propagate(initial, t);
}

/// Spin state times the bath vacuum.
inline Eigen::VectorXcd product_vacuum(const Spinor& spin, const TruncatedSpace& space) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.dimension()));
    v[static_cast<Eigen::Index>(space.index(0, 0))] = spin[0];
    v[static_cast<Eigen::Index>(space.index(1, 0))] = spin[1];
    return v;
}

/// Projection of a D1 state onto the truncated basis:
/// <s, n|D1> = amp_s prod_l exp(-|z_l|^2/2) z_l^{n_l} / sqrt(n_l!).
inline Eigen::VectorXcd project_d1(const D1State& st, const TruncatedSpace& space) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(space.dimension()));
    for (int s = 0; s < 2; ++s) {
        const Eigen::VectorXcd z = s == 0 ? Eigen::VectorXcd(st.f()) : Eigen::VectorXcd(st.g());
        const Complex amp = s == 0 ? st.a_amp() : st.b_amp();
        const double vac = std::exp(-0.5 * z.squaredNorm());
        for (std::size_t b = 0; b < space.bath_dimension(); ++b) {
            const auto occ = space.occupations(b);
            Complex c = amp * vac;
            for (std::size_t l = 0; l < occ.size(); ++l) {
                double fact = 1.0;
                for (std::size_t k = 2; k <= occ[l]; ++k) fact *= static_cast<double>(k);
                c *= std::pow(z[static_cast<Eigen::Index>(l)], static_cast<double>(occ[l])) / std::sqrt(fact);
            }
            v[static_cast<Eigen::Index>(space.index(s, b))] = c;
        }
    }
    return v;
}

/// One-excitation amplitudes (c_ground, c0, c_l) read off an oracle vector.
inline RwaState read_one_excitation(const Eigen::VectorXcd& v, const TruncatedSpace& space) {
    RwaState st;
    st.c_ground = v[static_cast<Eigen::Index>(space.index(1, 0))];
    st.c_zero = v[static_cast<Eigen::Index>(space.index(0, 0))];
    st.c_modes.resize(static_cast<Eigen::Index>(space.n_modes()));
    for (std::size_t l = 0; l < space.n_modes(); ++l) {
        std::vector<std::size_t> occ(space.n_modes(), 0);
        occ[l] = 1;
        st.c_modes[static_cast<Eigen::Index>(l)] = v[static_cast<Eigen::Index>(space.index(1, space.bath_index(occ)))];
    }
    return st;
}

/// Tr_B |psi><phi| computed directly from full vectors.
inline Eigen::Matrix2cd partial_trace(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& phi,
                                      const TruncatedSpace& space) {
    const auto nb = static_cast<Eigen::Index>(space.bath_dimension());
    Eigen::Matrix2cd k;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) k(r, c) = phi.segment(c * nb, nb).dot(psi.segment(r * nb, nb));
    return k;
}

/// Largest change of the amplitudes shared by two truncations (the
/// coarser basis embedded in the finer one).
inline double truncation_change(const Eigen::VectorXcd& coarse, const TruncatedSpace& cs, const Eigen::VectorXcd& fine,
                                const TruncatedSpace& fs) {
    double m = 0.0;
    for (int s = 0; s < 2; ++s)
        for (std::size_t b = 0; b < cs.bath_dimension(); ++b) {
            const auto occ = cs.occupations(b);
            const Complex x = coarse[static_cast<Eigen::Index>(cs.index(s, b))];
            const Complex y = fine[static_cast<Eigen::Index>(fs.index(s, fs.bath_index(occ)))];
            m = std::max(m, std::abs(x - y));
        }
    return m;
}

/// Exact two-qubit densities for identical qubits from single-qubit oracle
/// runs of |+> and |->, with the bath traces taken on the full vectors.
struct OracleDensities {
    std::vector<double> times;
    std::vector<TwoQubitDensity> rhos;
    double ladder_change{0.0};  // max amplitude change between n_max and the next rung
};

namespace detail {

inline std::vector<std::vector<Eigen::VectorXcd>> evolve_spinors(const std::vector<Spinor>& spinors,
                                                                 const ExactPropagator& prop,
                                                                 const TruncatedSpace& space,
                                                                 const std::vector<double>& times) {
    std::vector<std::vector<Eigen::VectorXcd>> vecs(spinors.size());
    for (std::size_t i = 0; i < spinors.size(); ++i)
        for (double t : times) vecs[i].push_back(prop.propagate(product_vacuum(spinors[i], space), t));
    return vecs;
}

}  // namespace detail

/// Exact two-qubit densities for identical qubits, given the single-qubit
/// Hamiltonian already diagonalized on `space`. Bath traces are taken on the
/// full vectors.
inline std::vector<TwoQubitDensity> exact_densities(const std::vector<EnsembleMember>& ensemble,
                                                    const ExactPropagator& prop, const TruncatedSpace& space,
                                                    const std::vector<double>& times) {
    const auto spinors = spinors_of(ensemble);
    const auto vecs = detail::evolve_spinors(spinors, prop, space, times);
    auto index_of = [&](const Spinor& s) {
        for (std::size_t i = 0; i < spinors.size(); ++i)
            if ((spinors[i] - s).cwiseAbs().maxCoeff() < 1e-14) return i;
        throw std::logic_error("oracle: spinor lookup failed");
    };
    const std::size_t n = spinors.size();
    std::vector<TwoQubitDensity> out;
    for (std::size_t t = 0; t < times.size(); ++t) {
        KernelTable table;
        table.n = n;
        table.k.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) table.k[i * n + j] = partial_trace(vecs[i][t], vecs[j][t], space);
        TwoQubitDensity rho;
        for (const auto& m : ensemble) {
            std::vector<IndexedTerm> terms;
            for (const auto& term : m.state) terms.push_back({term.coeff, index_of(term.qubit1), index_of(term.qubit2)});
            rho.rho += m.weight * reduced_density(terms, table, table).density.rho;
        }
        out.push_back(rho);
    }
    return out;
}

/// As above, building the Hamiltonian for `frame`/`rwa`. With
/// ladder_n_max > n_max the run is repeated on the larger truncation and the
/// largest shared-amplitude change is reported.
inline OracleDensities exact_densities(const std::vector<EnsembleMember>& ensemble, Frame frame, bool rwa, double delta,
                                       const BathModes& bath, std::size_t n_max, const std::vector<double>& times,
                                       std::size_t ladder_n_max = 0) {
    const TruncatedSpace space(bath.size(), n_max);
    const ExactPropagator prop(build_hamiltonian(frame, rwa, delta, bath, space));
    OracleDensities out;
    out.times = times;
    out.rhos = exact_densities(ensemble, prop, space, times);
    if (ladder_n_max > n_max) {
        const auto spinors = spinors_of(ensemble);
        const TruncatedSpace fine_space(bath.size(), ladder_n_max);
        const ExactPropagator fine_prop(build_hamiltonian(frame, rwa, delta, bath, fine_space));
        const auto coarse = detail::evolve_spinors(spinors, prop, space, times);
        const auto fine = detail::evolve_spinors(spinors, fine_prop, fine_space, times);
        for (std::size_t i = 0; i < spinors.size(); ++i)
            for (std::size_t t = 0; t < times.size(); ++t)
                out.ladder_change = std::max(out.ladder_change, truncation_change(coarse[i][t], space, fine[i][t], fine_space));
    }
    return out;
}

}  // namespace d1ent::oracle
