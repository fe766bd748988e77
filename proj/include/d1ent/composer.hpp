// composer.hpp: frame rotations, single-qubit evolutions in branch form,
// analytic partial traces over the baths and two-qubit reduced densities.
//
// Each qubit evolves with its own bath, so a two-qubit pure state
// sum_m c_m |u_m>|v_m> evolves term by term and
//
//   rho(t) = sum_{m,n} c_m c_n^* K1[u_m, u_n](t) (x) K2[v_m, v_n](t),
//
// where K[u, u'] = Tr_B |psi_u(t)><psi_u'(t)| is a 2x2 cross kernel.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d1ent/d1_solver.hpp"
#include "d1ent/entanglement.hpp"
#include "d1ent/model.hpp"
#include "d1ent/rwa_solver.hpp"

namespace d1ent {

enum class Frame { SB, RSB };
enum class Method { D1, RWA };

inline const char* to_string(Frame f) { return f == Frame::SB ? "SB" : "RSB"; }
inline const char* to_string(Method m) { return m == Method::D1 ? "D1" : "RWA"; }

inline Spinor spin_plus() { return {1.0, 0.0}; }
inline Spinor spin_minus() { return {0.0, 1.0}; }

// ---------------------------------------------------------------------------
// Frame rotation U = exp(i pi/4 sigma_y), mapping H_RSB = U^+ H_SB U.

enum class Rotation { Forward, Inverse };

inline Eigen::Matrix2cd rotation_matrix() {
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::Matrix2cd u;
    u << r, r, -r, r;
    return u;
}

inline Spinor rotate_spin(const Spinor& s, Rotation dir) {
    static const Eigen::Matrix2cd u = rotation_matrix();
    return dir == Rotation::Forward ? Spinor(u * s) : Spinor(u.adjoint() * s);
}

// ---------------------------------------------------------------------------
// Branch representation of one qubit plus its bath.

enum class BranchKind { Coherent, Fock };

/// Coherent branches carry a displacement vector; Fock branches carry an
/// occupation label (-1 for the vacuum, l for one quantum in mode l).
struct Branch {
    Spinor spin;
    Eigen::VectorXcd displacement;
    long fock_label{-1};
};

struct BranchState {
    BranchKind kind{BranchKind::Coherent};
    std::vector<Branch> branches;
    double time{0.0};
};

/// Bath inner product <w|z> for two branches of the same kind.
inline Complex branch_overlap(BranchKind kind, const Branch& w, const Branch& z) {
    if (kind == BranchKind::Fock) return w.fock_label == z.fock_label ? 1.0 : 0.0;
    return overlap_factor(w.displacement, z.displacement);
}

/// K = sum_{k,k'} chi_k^(m) chi_k'^(n)^+ <z_k'^(n) | z_k^(m)>.
inline Eigen::Matrix2cd cross_kernel(const BranchState& m, const BranchState& n) {
    if (m.kind != n.kind) throw std::invalid_argument("cross_kernel: incompatible branch kinds");
    Eigen::Matrix2cd k = Eigen::Matrix2cd::Zero();
    if (m.kind == BranchKind::Fock) {
        // Labels are sorted and unique, so a merge visits each matching pair once.
        std::size_t i = 0, j = 0;
        while (i < m.branches.size() && j < n.branches.size()) {
            const long li = m.branches[i].fock_label, lj = n.branches[j].fock_label;
            if (li < lj) { ++i; continue; }
            if (lj < li) { ++j; continue; }
            k += m.branches[i].spin * n.branches[j].spin.adjoint();
            ++i;
            ++j;
        }
        return k;
    }
    for (const auto& bm : m.branches) {
        for (const auto& bn : n.branches) {
            if (bm.displacement.size() != bn.displacement.size())
                throw std::invalid_argument("cross_kernel: mode count mismatch");
            k += bm.spin * bn.spin.adjoint() * overlap_factor(bn.displacement, bm.displacement);
        }
    }
    return k;
}

inline double branch_norm(const BranchState& s) { return cross_kernel(s, s).trace().real(); }

inline BranchState branches_from(const D1State& st, Frame frame) {
    BranchState out;
    out.kind = BranchKind::Coherent;
    out.time = st.time;
    Spinor up{st.a_amp(), 0.0};
    Spinor down{0.0, st.b_amp()};
    if (frame == Frame::RSB) {
        up = rotate_spin(up, Rotation::Inverse);
        down = rotate_spin(down, Rotation::Inverse);
    }
    out.branches.push_back({up, st.f(), -1});
    out.branches.push_back({down, st.g(), -1});
    return out;
}

inline BranchState branches_from(const RwaState& st) {
    BranchState out;
    out.kind = BranchKind::Fock;
    out.time = st.time;
    out.branches.reserve(static_cast<std::size_t>(st.c_modes.size()) + 1);
    out.branches.push_back({Spinor{st.c_zero, st.c_ground}, {}, -1});
    for (Eigen::Index l = 0; l < st.c_modes.size(); ++l) out.branches.push_back({Spinor{0.0, st.c_modes[l]}, {}, l});
    return out;
}

/// One qubit's trajectory in branch form, with solver health per snapshot.
struct SingleQubitEvolution {
    std::vector<double> times;
    std::vector<BranchState> snapshots;
    std::vector<double> norm_drift;    // |norm(t) - norm(0)|
    std::vector<double> energy_drift;  // |E(t) - E(0)| / max(|E(0)|, delta)
};

/// Evolves `initial` (a spin state, bath in vacuum) for one qubit.
///
/// D1/RSB rotates the spin into the SB frame, runs the variational dynamics
/// there and rotates each branch spinor back. RWA is only defined for RSB.
inline SingleQubitEvolution evolve_single_qubit(const Spinor& initial, Frame frame, Method method,
                                                const ModelParams& params, const BathModes& bath,
                                                const std::vector<double>& times) {
    if (std::abs(initial.squaredNorm() - 1.0) > 1e-12)
        throw std::invalid_argument("evolve_single_qubit: initial spinor must be normalized");
    SingleQubitEvolution out;
    out.times = times;
    auto record = [&](const auto& traj) {
        const double scale = std::max(std::abs(traj.energy_series.front()), params.delta);
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            out.norm_drift.push_back(std::abs(traj.norm_series[i] - traj.norm_series.front()));
            out.energy_drift.push_back(std::abs(traj.energy_series[i] - traj.energy_series.front()) / scale);
        }
    };
    if (method == Method::RWA) {
        if (frame != Frame::RSB) throw std::invalid_argument("evolve_single_qubit: RWA requires the RSB frame");
        const auto traj = evolve_rwa(RwaState::vacuum(initial, bath.size()), bath, params.delta, times, params.dt);
        for (const auto& st : traj.states) out.snapshots.push_back(branches_from(st));
        record(traj);
        return out;
    }
    const Spinor start = frame == Frame::RSB ? rotate_spin(initial, Rotation::Forward) : initial;
    const auto traj = evolve(D1State::vacuum(start, bath.size()), bath, params.delta, times, params.dt);
    for (const auto& st : traj.states) out.snapshots.push_back(branches_from(st, frame));
    record(traj);
    return out;
}

inline SingleQubitEvolution evolve_single_qubit(bool spin_up, Frame frame, Method method, const ModelParams& params,
                                                const BathModes& bath, const std::vector<double>& times) {
    return evolve_single_qubit(spin_up ? spin_plus() : spin_minus(), frame, method, params, bath, times);
}

// ---------------------------------------------------------------------------
// Initial two-qubit states.

struct ProductTerm {
    Complex coeff;
    Spinor qubit1;
    Spinor qubit2;
};

/// A pure two-qubit state written as a sum of product terms. Each distinct
/// single-qubit spinor is evolved as one trial state.
using PureInitial = std::vector<ProductTerm>;

struct EnsembleMember {
    double weight;
    PureInitial state;
};

enum class InitialKind { AntiBell, Bell, Mixed, Custom };

struct InitialSpec {
    InitialKind kind{InitialKind::AntiBell};
    double a_param{1.0};
    Frame frame{Frame::RSB};
    PureInitial custom;  // used for InitialKind::Custom
};

inline Eigen::Vector4cd to_vector(const PureInitial& psi) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    for (const auto& t : psi)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) v[2 * i + j] += t.coeff * t.qubit1[i] * t.qubit2[j];
    return v;
}

/// Custom state from amplitudes on |++>, |+->, |-+>, |--> (normalized on input).
inline PureInitial custom_state(const Eigen::Vector4cd& amps) {
    if (std::abs(amps.squaredNorm() - 1.0) > 1e-10) throw std::invalid_argument("custom state must have unit norm");
    PureInitial psi;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (amps[2 * i + j] != Complex(0.0))
                psi.push_back({amps[2 * i + j], i == 0 ? spin_plus() : spin_minus(), j == 0 ? spin_plus() : spin_minus()});
    return psi;
}

/// Pure members and weights whose mixture is the initial density matrix.
inline std::vector<EnsembleMember> to_ensemble(const InitialSpec& spec) {
    const double a = spec.a_param;
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("initial state parameter a must lie in [0, 1]");
    const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
    const Spinor p = spin_plus(), m = spin_minus();
    switch (spec.kind) {
        case InitialKind::AntiBell: return {{1.0, {{a, p, m}, {b, m, p}}}};
        case InitialKind::Bell: return {{1.0, {{a, p, p}, {b, m, m}}}};
        case InitialKind::Mixed: {
            const double r = std::numbers::sqrt2 / 2.0;
            return {{(1.0 - a) / 3.0, {{1.0, m, m}}}, {a / 3.0, {{1.0, p, p}}}, {2.0 / 3.0, {{r, p, m}, {r, m, p}}}};
        }
        case InitialKind::Custom: {
            if (std::abs(to_vector(spec.custom).squaredNorm() - 1.0) > 1e-10)
                throw std::invalid_argument("custom state must have unit norm");
            return {{1.0, spec.custom}};
        }
    }
    throw std::invalid_argument("unknown initial kind");
}

/// Applies U (x) U to every product term, giving the SB-frame counterpart of
/// an RSB-frame state.
inline std::vector<EnsembleMember> rotate_ensemble(std::vector<EnsembleMember> ens, Rotation dir) {
    for (auto& member : ens)
        for (auto& t : member.state) {
            t.qubit1 = rotate_spin(t.qubit1, dir);
            t.qubit2 = rotate_spin(t.qubit2, dir);
        }
    return ens;
}

inline TwoQubitDensity initial_density(const std::vector<EnsembleMember>& ens) {
    TwoQubitDensity d;
    for (const auto& member : ens) d.rho += member.weight * TwoQubitDensity::pure(to_vector(member.state)).rho;
    return d;
}

// ---------------------------------------------------------------------------
// Density assembly.

/// Cross kernels K[i][j] between the evolutions of a qubit's distinct
/// initial spinors, at one snapshot; stored row-major.
struct KernelTable {
    std::size_t n{0};
    std::vector<Eigen::Matrix2cd> k;
    const Eigen::Matrix2cd& operator()(std::size_t i, std::size_t j) const { return k[i * n + j]; }
};

/// A pure member expressed through indices into the per-qubit spinor lists.
struct IndexedTerm {
    Complex coeff;
    std::size_t i1;
    std::size_t i2;
};

struct AssembledDensity {
    TwoQubitDensity density;  // trace-normalized
    double raw_trace{1.0};
};

/// rho = sum_{m,n} c_m c_n^* K1_{mn} (x) K2_{mn}, renormalized by its trace.
inline AssembledDensity reduced_density(const std::vector<IndexedTerm>& terms, const KernelTable& k1,
                                        const KernelTable& k2) {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (const auto& tm : terms) {
        for (const auto& tn : terms) {
            const Complex w = tm.coeff * std::conj(tn.coeff);
            const Eigen::Matrix2cd& a = k1(tm.i1, tn.i1);
            const Eigen::Matrix2cd& b = k2(tm.i2, tn.i2);
            for (int r1 = 0; r1 < 2; ++r1)
                for (int c1 = 0; c1 < 2; ++c1)
                    for (int r2 = 0; r2 < 2; ++r2)
                        for (int c2 = 0; c2 < 2; ++c2) rho(2 * r1 + r2, 2 * c1 + c2) += w * a(r1, c1) * b(r2, c2);
        }
    }
    const double tr = rho.trace().real();
    if (!(tr >= 1e-6)) throw SolverError("reduced_density: degenerate state, trace " + std::to_string(tr));
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return {{rho}, tr};
}

struct QubitSetup {
    ModelParams params;
    BathModes bath;
};

inline bool same_setup(const QubitSetup& a, const QubitSetup& b) {
    return a.params.delta == b.params.delta && a.params.dt == b.params.dt && a.bath.omegas == b.bath.omegas &&
           a.bath.lambdas == b.bath.lambdas;
}

struct DensitySeries {
    std::vector<double> times;
    std::vector<TwoQubitDensity> rhos;
    std::vector<double> raw_trace;
    std::vector<double> norm_drift;
    std::vector<double> energy_drift;
};

/// Evolves every distinct single-qubit spinor once and caches the kernel
/// tables, so densities for any ensemble over those spinors (an a-sweep, a
/// Bell/anti-Bell pair, the mixed state) cost only the final contraction.
class TwoQubitPropagator {
public:
    TwoQubitPropagator(QubitSetup q1, QubitSetup q2, Frame frame, Method method, std::vector<double> times,
                       std::vector<Spinor> spinors = {spin_plus(), spin_minus()})
        : frame_(frame), method_(method), times_(std::move(times)), spinors_(std::move(spinors)) {
        qubits_[0] = build(q1);
        qubits_[1] = same_setup(q1, q2) ? qubits_[0] : build(q2);
    }

    const std::vector<double>& times() const { return times_; }
    const std::vector<Spinor>& spinors() const { return spinors_; }
    const SingleQubitEvolution& evolution(int qubit, std::size_t spinor) const {
        return qubits_.at(static_cast<std::size_t>(qubit)).evolutions.at(spinor);
    }

    DensitySeries densities(const std::vector<EnsembleMember>& ensemble) const {
        std::vector<std::pair<double, std::vector<IndexedTerm>>> members;
        std::vector<bool> used1(spinors_.size(), false), used2(spinors_.size(), false);
        double total_weight = 0.0;
        for (const auto& m : ensemble) {
            if (m.weight < 0.0) throw std::invalid_argument("ensemble weights must be nonnegative");
            total_weight += m.weight;
            std::vector<IndexedTerm> terms;
            for (const auto& t : m.state) {
                const std::size_t i1 = index_of(t.qubit1), i2 = index_of(t.qubit2);
                used1[i1] = used2[i2] = true;
                terms.push_back({t.coeff, i1, i2});
            }
            members.emplace_back(m.weight, std::move(terms));
        }
        if (std::abs(total_weight - 1.0) > 1e-12) throw std::invalid_argument("ensemble weights must sum to 1");

        DensitySeries out;
        out.times = times_;
        for (std::size_t t = 0; t < times_.size(); ++t) {
            TwoQubitDensity rho;
            double raw = 0.0;
            for (const auto& [w, terms] : members) {
                if (w == 0.0) continue;
                const auto part = reduced_density(terms, qubits_[0].kernels[t], qubits_[1].kernels[t]);
                rho.rho += w * part.density.rho;
                raw += w * part.raw_trace;
            }
            double nd = 0.0, ed = 0.0;
            for (std::size_t i = 0; i < spinors_.size(); ++i) {
                for (std::size_t q = 0; q < 2; ++q) {
                    if (!(q == 0 ? used1[i] : used2[i])) continue;
                    nd = std::max(nd, qubits_[q].evolutions[i].norm_drift[t]);
                    ed = std::max(ed, qubits_[q].evolutions[i].energy_drift[t]);
                }
            }
            out.rhos.push_back(rho);
            out.raw_trace.push_back(raw);
            out.norm_drift.push_back(nd);
            out.energy_drift.push_back(ed);
        }
        return out;
    }

private:
    struct QubitData {
        std::vector<SingleQubitEvolution> evolutions;
        std::vector<KernelTable> kernels;  // one per output time
    };

    QubitData build(const QubitSetup& q) const {
        QubitData d;
        for (const auto& s : spinors_)
            d.evolutions.push_back(evolve_single_qubit(s, frame_, method_, q.params, q.bath, times_));
        const std::size_t n = spinors_.size();
        d.kernels.resize(times_.size());
        for (std::size_t t = 0; t < times_.size(); ++t) {
            auto& table = d.kernels[t];
            table.n = n;
            table.k.resize(n * n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    table.k[i * n + j] = cross_kernel(d.evolutions[i].snapshots[t], d.evolutions[j].snapshots[t]);
                    if (j != i) table.k[j * n + i] = table.k[i * n + j].adjoint();
                }
            }
        }
        return d;
    }

    std::size_t index_of(const Spinor& s) const {
        for (std::size_t i = 0; i < spinors_.size(); ++i)
            if ((spinors_[i] - s).cwiseAbs().maxCoeff() < 1e-14) return i;
        throw std::invalid_argument("TwoQubitPropagator: initial spinor was not precomputed");
    }

    Frame frame_;
    Method method_;
    std::vector<double> times_;
    std::vector<Spinor> spinors_;
    std::array<QubitData, 2> qubits_;
};

/// Distinct single-qubit spinors appearing in an ensemble, in first-seen order.
inline std::vector<Spinor> spinors_of(const std::vector<EnsembleMember>& ens) {
    std::vector<Spinor> out;
    auto add = [&](const Spinor& s) {
        for (const auto& e : out)
            if ((e - s).cwiseAbs().maxCoeff() < 1e-14) return;
        out.push_back(s);
    };
    for (const auto& m : ens)
        for (const auto& t : m.state) {
            add(t.qubit1);
            add(t.qubit2);
        }
    return out;
}

/// Evolves an initial state for two identical qubits.
inline DensitySeries evolve_initial(const InitialSpec& spec, Method method, const ModelParams& params,
                                    const BathModes& bath, const std::vector<double>& times) {
    const auto ens = to_ensemble(spec);
    const QubitSetup q{params, bath};
    TwoQubitPropagator prop(q, q, spec.frame, method, times, spinors_of(ens));
    return prop.densities(ens);
}

/// The mixed family rho(0) = (1-a)/3 |--><--| + a/3 |++><++| + 2/3 |s><s|,
/// |s> = (|+-> + |-+>)/sqrt2, evolved as a three-member ensemble.
inline DensitySeries evolve_mixed(const InitialSpec& spec, Method method, const ModelParams& params,
                                  const BathModes& bath, const std::vector<double>& times) {
    if (spec.kind != InitialKind::Mixed) throw std::invalid_argument("evolve_mixed: spec is not the mixed family");
    return evolve_initial(spec, method, params, bath, times);
}

}  // namespace d1ent
