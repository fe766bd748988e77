#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "d1ent/entanglement.hpp"

using namespace d1ent;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::Vector4cd basis(double a, double b, double c, double d) { return Eigen::Vector4cd(a, b, c, d); }

Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Eigen::Matrix2cd m;
    for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = Complex(n(rng), n(rng));
    return Eigen::HouseholderQR<Eigen::Matrix2cd>(m).householderQ();
}

TwoQubitDensity random_density(std::mt19937_64& rng, int rank) {
    std::normal_distribution<double> n;
    Eigen::MatrixXcd w(4, rank);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < rank; ++j) w(i, j) = Complex(n(rng), n(rng));
    Eigen::Matrix4cd rho = w * w.adjoint();
    return {rho / rho.trace().real()};
}

}  // namespace

TEST_CASE("pure state references") {
    const double r = std::sqrt(0.5);
    CHECK_THAT(concurrence_general(TwoQubitDensity::pure(basis(r, 0, 0, r))), WithinAbs(1.0, 1e-12));
    CHECK_THAT(concurrence_general(TwoQubitDensity::pure(basis(0, r, r, 0))), WithinAbs(1.0, 1e-12));
    CHECK_THAT(concurrence_general(TwoQubitDensity::pure(basis(1, 0, 0, 0))), WithinAbs(0.0, 1e-12));
    CHECK_THAT(concurrence_general(TwoQubitDensity::pure(basis(0.5, 0.5, 0.5, 0.5))), WithinAbs(0.0, 1e-12));
    for (double a2 = 0.0; a2 <= 1.0; a2 += 0.05) {
        const double a = std::sqrt(a2), b = std::sqrt(1.0 - a2);
        const auto d = TwoQubitDensity::pure(basis(0, a, b, 0));
        CHECK_THAT(concurrence_general(d), WithinAbs(2.0 * a * b, 1e-12));
        CHECK_THAT(concurrence_x(d).value, WithinAbs(2.0 * a * b, 1e-12));
    }
}

TEST_CASE("maximally mixed state is separable") {
    const TwoQubitDensity d{Eigen::Matrix4cd::Identity() / 4.0};
    CHECK(concurrence_general(d) == 0.0);
    CHECK(concurrence_x(d).value == 0.0);
}

TEST_CASE("Werner states") {
    const double r = std::sqrt(0.5);
    const Eigen::Matrix4cd singlet = TwoQubitDensity::pure(basis(0, r, -r, 0)).rho;
    for (int k = 0; k <= 100; ++k) {
        const double p = k / 100.0;
        const TwoQubitDensity w{p * singlet + (1.0 - p) / 4.0 * Eigen::Matrix4cd::Identity()};
        const double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
        CHECK_THAT(concurrence_general(w), WithinAbs(expected, 1e-12));
        CHECK_THAT(concurrence_x(w).value, WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("random X states: closed form equals the general route") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int entangled = 0;
    for (int s = 0; s < 20000; ++s) {
        // Positive X matrices: two independent 2x2 PSD blocks on {0,3} and {1,2}.
        auto block = [&](double scale) {
            const double p = u(rng), q = u(rng);
            const double mag = std::sqrt(p * q) * u(rng);
            const Complex c = std::polar(mag, 2.0 * std::numbers::pi * u(rng));
            return std::tuple{scale * p, scale * q, scale * c};
        };
        const double share = u(rng);
        auto [p11, p44, c14] = block(share);
        auto [p22, p33, c23] = block(1.0 - share);
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = p11;
        rho(3, 3) = p44;
        rho(1, 1) = p22;
        rho(2, 2) = p33;
        rho(0, 3) = c14;
        rho(3, 0) = std::conj(c14);
        rho(1, 2) = c23;
        rho(2, 1) = std::conj(c23);
        rho /= rho.trace().real();
        const TwoQubitDensity d{rho};
        const auto x = concurrence_x(d);
        REQUIRE(x.x_form_valid);
        const double g = concurrence_general(d);
        if (g > 0.0) ++entangled;
        worst = std::max(worst, std::abs(x.value - g));
    }
    CHECK(worst < 1e-9);
    CHECK(entangled > 1000);
}

TEST_CASE("local unitaries leave concurrence unchanged") {
    std::mt19937_64 rng(7);
    for (int s = 0; s < 500; ++s) {
        const auto d = random_density(rng, 1 + s % 4);
        Eigen::Matrix4cd u;
        const Eigen::Matrix2cd u1 = random_unitary(rng), u2 = random_unitary(rng);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) u(i, j) = u1(i / 2, j / 2) * u2(i % 2, j % 2);
        const TwoQubitDensity rotated{u * d.rho * u.adjoint()};
        CHECK_THAT(concurrence_general(rotated), WithinAbs(concurrence_general(d), 1e-10));
    }
}

TEST_CASE("non-X states fall back to the general route") {
    const auto d = TwoQubitDensity::pure(basis(0.6, 0.0, 0.0, 0.8));
    CHECK(concurrence_x(d).x_form_valid);
    const auto general = TwoQubitDensity::pure(Eigen::Vector4cd(0.5, 0.5, 0.5, -0.5));
    const auto x = concurrence_x(general);
    CHECK_FALSE(x.x_form_valid);
    CHECK_THAT(x.value, WithinAbs(1.0, 1e-12));
}

TEST_CASE("series flags and validation") {
    const double r = std::sqrt(0.5);
    std::vector<TwoQubitDensity> rhos{TwoQubitDensity::pure(basis(0, r, r, 0)),
                                      TwoQubitDensity::pure(Eigen::Vector4cd(0.5, 0.5, 0.5, -0.5))};
    const auto series = concurrence_series({0.0, 1.0}, rhos);
    CHECK(series.x_form_valid[0]);
    CHECK_FALSE(series.x_form_valid[1]);
    CHECK(series.max_route_disagreement < 1e-12);
    CHECK(rhos[0].is_valid());
    TwoQubitDensity bad{Eigen::Matrix4cd::Zero()};
    bad.rho(0, 1) = 1.0;
    CHECK_THROWS_AS(concurrence_general(bad), std::invalid_argument);
    CHECK_THROWS_AS(concurrence_series({0.0}, rhos), std::invalid_argument);
}
