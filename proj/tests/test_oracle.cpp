#include <catch_amalgamated.hpp>

#include <cmath>

#include "d1ent/oracle.hpp"

using namespace d1ent;
using namespace d1ent::oracle;
using Catch::Matchers::WithinAbs;

namespace {

BathModes three_modes(double alpha) {
    ModelParams p;
    p.alpha = alpha;
    p.n_modes = 3;
    return discretize_bath(p);
}

}  // namespace

TEST_CASE("truncated basis indexing round-trips") {
    TruncatedSpace space(3, 4);
    CHECK(space.dimension() == 250);
    for (std::size_t b = 0; b < space.bath_dimension(); ++b) CHECK(space.bath_index(space.occupations(b)) == b);
    CHECK_THROWS_AS(TruncatedSpace(6, 1), std::invalid_argument);
    CHECK_THROWS_AS(TruncatedSpace(2, 9), std::invalid_argument);
}

TEST_CASE("Hamiltonians are Hermitian; RWA conserves excitations") {
    const auto bath = three_modes(0.1);
    TruncatedSpace space(3, 3);
    for (Frame frame : {Frame::SB, Frame::RSB}) {
        const auto h = build_hamiltonian(frame, false, 0.2, bath, space);
        CHECK((h - h.adjoint()).norm() == 0.0);
    }
    const auto h = build_hamiltonian(Frame::RSB, true, 0.2, bath, space);
    const auto n = excitation_number(space);
    CHECK((h * n - n * h).norm() < 1e-14);
    const auto full = build_hamiltonian(Frame::RSB, false, 0.2, bath, space);
    CHECK((full * n - n * full).norm() > 1e-3);
    CHECK_THROWS_AS(build_hamiltonian(Frame::SB, true, 0.2, bath, space), std::invalid_argument);
}

TEST_CASE("both frames have the same spectrum") {
    const auto bath = three_modes(0.1);
    TruncatedSpace space(3, 3);
    const ExactPropagator sb(build_hamiltonian(Frame::SB, false, 0.2, bath, space));
    const ExactPropagator rsb(build_hamiltonian(Frame::RSB, false, 0.2, bath, space));
    CHECK((sb.eigenvalues() - rsb.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("propagation is unitary and composes") {
    const auto bath = three_modes(0.1);
    TruncatedSpace space(3, 2);
    const ExactPropagator prop(build_hamiltonian(Frame::RSB, false, 0.2, bath, space));
    const auto v0 = product_vacuum(Spinor(0.6, 0.8), space);
    const auto v1 = prop.propagate(v0, 3.0);
    CHECK_THAT(v1.norm(), WithinAbs(1.0, 1e-12));
    CHECK((prop.propagate(v1, 4.0) - prop.propagate(v0, 7.0)).norm() < 1e-12);
}

TEST_CASE("RWA solver matches exact one-excitation dynamics") {
    const double delta = 0.2;
    const auto bath = three_modes(0.2);
    TruncatedSpace space(3, 2);
    const ExactPropagator prop(build_hamiltonian(Frame::RSB, true, delta, bath, space));
    const double r = std::sqrt(0.5);
    const Spinor spin(r, Complex(0.0, r));
    const auto times = make_output_grid(50.0, 1.0);
    const auto traj = evolve_rwa(RwaState::vacuum(spin, 3), bath, delta, times, 0.02);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto exact = read_one_excitation(prop.propagate(product_vacuum(spin, space), times[i]), space);
        const auto& st = traj.states[i];
        err = std::max({err, std::abs(exact.c_ground - st.c_ground), std::abs(exact.c_zero - st.c_zero),
                        (exact.c_modes - st.c_modes).cwiseAbs().maxCoeff()});
    }
    CHECK(err < 1e-6);
}

TEST_CASE("D1 solver is exact without tunneling") {
    const auto bath = three_modes(0.01);
    TruncatedSpace space(3, 8);
    const ExactPropagator prop(build_hamiltonian(Frame::SB, false, 0.0, bath, space));
    const double r = std::sqrt(0.5);
    const Spinor spin(r, r);
    const auto times = make_output_grid(30.0, 1.0);
    const auto traj = evolve(D1State::vacuum(spin, 3), bath, 0.0, times, 0.02);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        err = std::max(err, (prop.propagate(product_vacuum(spin, space), times[i]) - project_d1(traj.states[i], space))
                                .cwiseAbs()
                                .maxCoeff());
    CHECK(err < 1e-6);
}

TEST_CASE("D1 solver agrees with exact dynamics at short times") {
    const auto bath = three_modes(0.05);
    TruncatedSpace space(3, 6);
    const ExactPropagator prop(build_hamiltonian(Frame::SB, false, 0.2, bath, space));
    const auto times = std::vector<double>{0.0, 0.2, 0.4, 0.8};
    const auto traj = evolve(D1State::vacuum(spin_plus(), 3), bath, 0.2, times, 0.01);
    std::vector<double> err;
    for (std::size_t i = 1; i < times.size(); ++i)
        err.push_back((prop.propagate(product_vacuum(spin_plus(), space), times[i]) - project_d1(traj.states[i], space)).norm());
    CHECK(err[0] < 1e-4);
    // The ansatz is exact through second order, so the error grows like t^3.
    CHECK(err[2] / err[1] > 6.0);
}

TEST_CASE("two-qubit oracle densities") {
    const auto bath = three_modes(0.05);
    const auto times = make_output_grid(10.0, 1.0);
    const auto ens = to_ensemble({InitialKind::AntiBell, std::sqrt(0.5), Frame::RSB, {}});
    const auto exact = exact_densities(ens, Frame::RSB, true, 0.2, bath, 2, times, 3);
    CHECK(exact.ladder_change < 1e-12);
    ModelParams p;
    p.alpha = 0.05;
    p.n_modes = 3;
    const auto rwa = evolve_initial({InitialKind::AntiBell, std::sqrt(0.5), Frame::RSB, {}}, Method::RWA, p, bath, times);
    for (std::size_t t = 0; t < times.size(); ++t) {
        CHECK(exact.rhos[t].is_valid());
        CHECK((exact.rhos[t].rho - rwa.rhos[t].rho).cwiseAbs().maxCoeff() < 1e-6);
    }
    CHECK_THAT(concurrence_general(exact.rhos[0]), WithinAbs(1.0, 1e-12));
}
