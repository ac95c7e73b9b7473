#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jcas/radio.hpp"

using namespace jcas;
using radio::BeamVector;
using radio::Complex;

namespace {
constexpr double kPi = std::numbers::pi;

// Brute-force circular nearest codomain value; oracle for quantize().
double nearest_by_scan(double phase, const radio::PhaseCodomain& codomain) {
    double best = 0.0, best_d = 1e18;
    for (double v : codomain.values()) {
        double d = std::fabs(std::remainder(phase - v, 2.0 * kPi));
        if (d < best_d - 1e-15) {
            best_d = d;
            best = v;
        } else if (std::fabs(d - best_d) <= 1e-15 && v < best) {
            best = v;
        }
    }
    return best;
}
}  // namespace

TEST_CASE("beam_weights: all-zero phases on M=4") {
    BeamVector beam(std::vector<double>(4, 0.0));
    const auto w = radio::beam_weights(beam);
    for (const auto& c : w) {
        CHECK(c.real() == doctest::Approx(0.5));
        CHECK(c.imag() == doctest::Approx(0.0));
    }
}

TEST_CASE("beam_weights: single antenna at pi/2") {
    BeamVector beam(std::vector<double>{kPi / 2.0});
    const auto w = radio::beam_weights(beam);
    CHECK(w[0].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(w[0].imag() == doctest::Approx(1.0));
}

TEST_CASE("beam_weights: M=2 with phases 0 and pi") {
    BeamVector beam(std::vector<double>{0.0, kPi});
    const auto w = radio::beam_weights(beam);
    CHECK(w[0].real() == doctest::Approx(std::sqrt(0.5)));
    CHECK(w[1].real() == doctest::Approx(-std::sqrt(0.5)));
    CHECK(std::fabs(w[0].imag()) < 1e-12);
    CHECK(std::fabs(w[1].imag()) < 1e-12);
}

TEST_CASE("beam_weights: unit modulus property") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> m_dist(1, 64);
        const int m = m_dist(rng);
        std::vector<double> phases(m);
        for (double& p : phases) p = dist(rng);
        const auto w = radio::beam_weights(BeamVector(phases));
        double norm_sq = 0.0;
        for (const auto& c : w) {
            CHECK(std::fabs(std::abs(c) - 1.0 / std::sqrt(m)) < 1e-12);
            norm_sq += std::norm(c);
        }
        CHECK(norm_sq == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("quantize: 1-bit codomain") {
    radio::PhaseCodomain codomain(1);
    const auto vals = codomain.values();
    REQUIRE(vals.size() == 2);
    CHECK(vals[0] == doctest::Approx(0.0));
    CHECK(vals[1] == doctest::Approx(kPi));
    CHECK(radio::quantize(BeamVector({0.3}), codomain).phases[0] == doctest::Approx(0.0));
    CHECK(radio::quantize(BeamVector({3.0}), codomain).phases[0] == doctest::Approx(kPi));
}

TEST_CASE("quantize: wrap across -pi with 2-bit codomain") {
    radio::PhaseCodomain codomain(2);
    const auto vals = codomain.values();
    REQUIRE(vals.size() == 4);
    CHECK(vals[0] == doctest::Approx(-kPi / 2.0));
    CHECK(vals[3] == doctest::Approx(kPi));
    // -3.0 rad is circularly closer to pi than to -pi/2
    CHECK(radio::quantize(BeamVector({-3.0}), codomain).phases[0] == doctest::Approx(kPi));
}

TEST_CASE("quantize: idempotent and matches brute-force scan") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (int bits = 1; bits <= 5; ++bits) {
        radio::PhaseCodomain codomain(bits);
        for (int trial = 0; trial < 200; ++trial) {
            const double phase = dist(rng);
            BeamVector beam({phase});
            const auto q = radio::quantize(beam, codomain);
            CHECK(q.phases[0] == doctest::Approx(nearest_by_scan(phase, codomain)).epsilon(1e-12));
            const auto qq = radio::quantize(q, codomain);
            CHECK(qq.phases[0] == q.phases[0]);
        }
    }
}

TEST_CASE("codomain values: strictly increasing, inside (-pi, pi], count 2^r") {
    for (int bits = 1; bits <= 8; ++bits) {
        const auto vals = radio::PhaseCodomain(bits).values();
        CHECK(static_cast<int>(vals.size()) == (1 << bits));
        for (size_t i = 0; i < vals.size(); ++i) {
            CHECK(vals[i] > -kPi);
            CHECK(vals[i] <= kPi);
            if (i > 0) CHECK(vals[i] > vals[i - 1]);
        }
    }
}

TEST_CASE("comm_gain: all-ones channel with zero phases on M=4") {
    BeamVector beam(std::vector<double>(4, 0.0));
    radio::ChannelVector h(4, Complex{1.0, 0.0});
    CHECK(radio::comm_gain(beam, h) == doctest::Approx(4.0));
}

TEST_CASE("comm_gain: zero channel gives zero") {
    BeamVector beam(std::vector<double>{0.1, -0.4, 2.2});
    radio::ChannelVector h(3, Complex{0.0, 0.0});
    CHECK(radio::comm_gain(beam, h) == 0.0);
}

TEST_CASE("comm_gain: matched phases reach the Cauchy-Schwarz maximum M") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 8;
        radio::ChannelVector h(m);
        std::vector<double> phases(m);
        for (int i = 0; i < m; ++i) {
            const double a = dist(rng);
            h[i] = std::polar(1.0, a);
            phases[i] = a;
        }
        CHECK(radio::comm_gain(BeamVector(phases), h) == doctest::Approx(m).epsilon(1e-9));
    }
}

TEST_CASE("comm_gain: bound (sum |h_m| / sqrt(M))^2 holds on random channels") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> ph(-kPi, kPi);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 6;
        radio::ChannelVector h(m);
        std::vector<double> phases(m);
        double sum_abs = 0.0;
        for (int i = 0; i < m; ++i) {
            h[i] = Complex{g(rng), g(rng)};
            sum_abs += std::abs(h[i]);
            phases[i] = ph(rng);
        }
        const double bound = sum_abs * sum_abs / m;
        CHECK(radio::comm_gain(BeamVector(phases), h) <= bound + 1e-9);
    }
}

TEST_CASE("comm_gain rejects length mismatch") {
    BeamVector beam(std::vector<double>(4, 0.0));
    radio::ChannelVector h(3, Complex{1.0, 0.0});
    CHECK_THROWS_AS((void)radio::comm_gain(beam, h), std::invalid_argument);
}

TEST_CASE("avg_comm_gain: singleton, mean, and permutation invariance") {
    BeamVector beam(std::vector<double>(2, 0.0));
    radio::ChannelVector h1(2, Complex{1.0, 0.0});
    radio::ChannelVector h2(2, Complex{0.0, 1.0});
    const double g1 = radio::comm_gain(beam, h1);
    CHECK(radio::avg_comm_gain(beam, {h1}) == doctest::Approx(g1));
    const double mean = radio::avg_comm_gain(beam, {h1, h2});
    CHECK(mean == doctest::Approx(0.5 * (g1 + radio::comm_gain(beam, h2))));
    CHECK(radio::avg_comm_gain(beam, {h2, h1}) == doctest::Approx(mean));
    CHECK_THROWS_AS((void)radio::avg_comm_gain(beam, {}), std::invalid_argument);
}

TEST_CASE("array_response: theta=0 gives all ones") {
    const auto geom = radio::ArrayGeometry::uniform_linear(8, 0.1);
    const auto b = radio::array_response(geom, 0.0);
    for (const auto& c : b) {
        CHECK(c.real() == doctest::Approx(1.0));
        CHECK(c.imag() == doctest::Approx(0.0));
    }
}

TEST_CASE("array_response: half-wavelength pair at pi/6") {
    const double lambda = 0.1;
    radio::ArrayGeometry geom({0.0, lambda / 2.0}, lambda);
    const auto b = radio::array_response(geom, kPi / 6.0);
    // exponent = 2*pi*(lambda/2)*sin(pi/6)/lambda = pi/2
    CHECK(b[0].real() == doctest::Approx(1.0));
    CHECK(b[0].imag() == doctest::Approx(0.0));
    CHECK(b[1].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b[1].imag() == doctest::Approx(1.0));
}

TEST_CASE("array_response: sin symmetry theta vs pi-theta, unit modulus") {
    const auto geom = radio::ArrayGeometry::uniform_linear(8, 0.1);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> dist(-kPi / 2, kPi / 2);
    for (int trial = 0; trial < 50; ++trial) {
        const double theta = dist(rng);
        const auto a = radio::array_response(geom, theta);
        const auto b = radio::array_response(geom, kPi - theta);
        for (size_t m = 0; m < a.size(); ++m) {
            CHECK(std::abs(a[m] - b[m]) < 1e-9);
            CHECK(std::fabs(std::abs(a[m]) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("array_response rejects nonpositive wavelength") {
    CHECK_THROWS_AS(radio::ArrayGeometry({0.0, 0.05}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(radio::ArrayGeometry({0.0, 0.05}, -1.0), std::invalid_argument);
}

TEST_CASE("sensing_gain: matched steering phases reach M") {
    const int m = 8;
    const auto geom = radio::ArrayGeometry::uniform_linear(m, 0.1);
    const double theta = 0.4;
    std::vector<double> phases(m);
    for (int i = 0; i < m; ++i)
        phases[i] = radio::wrap_phase(2.0 * kPi * geom.positions[i] * std::sin(theta) /
                                      geom.wavelength);
    CHECK(radio::sensing_gain(BeamVector(phases), geom, theta) ==
          doctest::Approx(m).epsilon(1e-9));
}

TEST_CASE("sensing_gain: M=1 is always 1") {
    const auto geom = radio::ArrayGeometry::uniform_linear(1, 0.1);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (int trial = 0; trial < 20; ++trial)
        CHECK(radio::sensing_gain(BeamVector({dist(rng)}), geom, dist(rng)) ==
              doctest::Approx(1.0));
}

TEST_CASE("sensing_gain: never exceeds M on random samples") {
    const int m = 12;
    const auto geom = radio::ArrayGeometry::uniform_linear(m, 0.1);
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> phases(m);
        for (double& p : phases) p = dist(rng);
        CHECK(radio::sensing_gain(BeamVector(phases), geom, dist(rng)) <= m + 1e-9);
    }
}

TEST_CASE("beam_pattern: matched beam peaks at 1.0; M=1 flat; length matches grid") {
    const int m = 8;
    const auto geom = radio::ArrayGeometry::uniform_linear(m, 0.1);
    const double theta_star = 0.3;
    std::vector<double> phases(m);
    for (int i = 0; i < m; ++i)
        phases[i] = radio::wrap_phase(2.0 * kPi * geom.positions[i] * std::sin(theta_star) /
                                      geom.wavelength);
    std::vector<double> grid;
    for (int i = 0; i < 181; ++i) grid.push_back(-kPi / 2 + kPi * i / 180.0);
    grid.push_back(theta_star);
    const auto pattern = radio::beam_pattern(BeamVector(phases), geom, grid);
    CHECK(pattern.size() == grid.size());
    double best = -1.0;
    double best_angle = 0.0;
    for (const auto& [angle, gain] : pattern) {
        CHECK(gain >= 0.0);
        CHECK(gain <= 1.0 + 1e-12);
        if (gain > best) {
            best = gain;
            best_angle = angle;
        }
    }
    CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(best_angle == doctest::Approx(theta_star));

    const auto geom1 = radio::ArrayGeometry::uniform_linear(1, 0.1);
    const auto flat = radio::beam_pattern(BeamVector({0.7}), geom1, grid);
    for (const auto& [angle, gain] : flat) CHECK(gain == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)radio::beam_pattern(BeamVector(phases), geom, std::vector<double>{}),
                    std::invalid_argument);
}

TEST_CASE("wrap_phase lands in (-pi, pi]") {
    CHECK(radio::wrap_phase(kPi) == doctest::Approx(kPi));
    CHECK(radio::wrap_phase(-kPi) == doctest::Approx(kPi));
    CHECK(radio::wrap_phase(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(radio::wrap_phase(0.0) == 0.0);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double w = radio::wrap_phase(dist(rng));
        CHECK(w > -kPi);
        CHECK(w <= kPi);
    }
}
