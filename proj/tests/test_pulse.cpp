#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <numbers>
#include <random>

#include "pulsekit/pulse.hpp"
#include "pulsekit/quadrature.hpp"
#include "oracles.hpp"

using namespace pulsekit;
constexpr double kPi = std::numbers::pi;

TEST_CASE("eval_amplitude: constant pi pulse") {
    const PulseShape p = resolve_pulse_name("CONST-Pi");
    CHECK(eval_amplitude(p, 0.3) == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(eval_amplitude(p, 0.0) == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(eval_amplitude(p, 1.0) == doctest::Approx(kPi / 2).epsilon(1e-14));
}

TEST_CASE("eval_amplitude: continuous pulse endpoints vanish") {
    const PulseShape& p = find_catalog_entry("CONT-SYM-Pi")->shape;
    CHECK(std::abs(eval_amplitude(p, 0.0)) < 1e-12);
    CHECK(std::abs(eval_amplitude(p, 1.0)) < 1e-12);
}

TEST_CASE("eval_amplitude: CORPSE-Pi second segment and switch convention") {
    const PulseShape& p = find_catalog_entry("CORPSE-Pi")->shape;
    CHECK(eval_amplitude(p, 0.2) == doctest::Approx(-13 * kPi / 6).epsilon(1e-14));
    // Right-continuous at the switch instants.
    CHECK(eval_amplitude(p, 1.0 / 13) == doctest::Approx(-13 * kPi / 6).epsilon(1e-14));
    CHECK(eval_amplitude(p, 6.0 / 13) == doctest::Approx(13 * kPi / 6).epsilon(1e-14));
}

TEST_CASE("eval_amplitude: domain errors") {
    const PulseShape p = resolve_pulse_name("CONST-Pi");
    CHECK_THROWS_AS((void)eval_amplitude(p, -0.01), std::domain_error);
    CHECK_THROWS_AS((void)eval_amplitude(p, 1.01), std::domain_error);
    CHECK_THROWS_AS((void)accumulated_angle(p, 1.5), std::domain_error);
}

TEST_CASE("accumulated_angle: linear ramp, composite sums, harmonic closed form") {
    CHECK(accumulated_angle(resolve_pulse_name("CONST-Pi"), 0.5) ==
          doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(accumulated_angle(find_catalog_entry("CORPSE-Pi")->shape, 1.0) ==
          doctest::Approx(kPi).epsilon(1e-12));
    // Table values are rounded to six digits.
    CHECK(std::abs(accumulated_angle(find_catalog_entry("SYM2ND-Pi")->shape, 1.0) - kPi) < 1e-3);
    // Oscillatory terms integrate to zero; only the constant term remains.
    CHECK(accumulated_angle(find_catalog_entry("CONT-SYM-Pi")->shape, 1.0) ==
          doctest::Approx(kPi).epsilon(1e-14));
}

TEST_CASE("catalog: size and printed parameters") {
    CHECK(catalog().size() == 15);

    const CatalogEntry* corpse = find_catalog_entry("CORPSE-Pi");
    REQUIRE(corpse != nullptr);
    REQUIRE(corpse->shape.segments.size() == 3);
    CHECK(corpse->shape.segments[0].end == doctest::Approx(1.0 / 13).epsilon(1e-15));
    CHECK(corpse->shape.segments[1].end == doctest::Approx(6.0 / 13).epsilon(1e-15));
    CHECK(std::abs(corpse->shape.segments[0].amplitude) ==
          doctest::Approx(13 * kPi / 6).epsilon(1e-15));

    const CatalogEntry* s2 = find_catalog_entry("SYM2ND-Pi2");
    REQUIRE(s2 != nullptr);
    REQUIRE(s2->shape.segments.size() == 5);
    CHECK(std::abs(s2->shape.segments[0].amplitude) == doctest::Approx(11.486275));
    CHECK(s2->shape.segments[2].amplitude == doctest::Approx(-8.038405));
    CHECK(s2->shape.segments[0].end == doctest::Approx(0.037279));
    CHECK(s2->shape.segments[1].end == doctest::Approx(0.269827));
    CHECK(s2->shape.segments[2].end == doctest::Approx(0.730173));
    CHECK(s2->shape.segments[3].end == doctest::Approx(0.962721));

    // Fourier coefficients map one-to-one onto the printed a, b values.
    const CatalogEntry* ca = find_catalog_entry("CONT-ASYM-Pi");
    REQUIRE(ca != nullptr);
    const double a = 5.263022, b = 17.850535;
    CHECK(ca->shape.harmonics.constant == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(ca->shape.harmonics.cos_coeffs[0] == doctest::Approx(a - kPi / 2).epsilon(1e-15));
    CHECK(ca->shape.harmonics.cos_coeffs[1] == doctest::Approx(-a).epsilon(1e-15));
    CHECK(ca->shape.harmonics.sin_coeffs[0] == doctest::Approx(b).epsilon(1e-15));
    CHECK(ca->shape.harmonics.sin_coeffs[1] == doctest::Approx(-b / 2).epsilon(1e-15));
}

TEST_CASE("catalog: net angle within 1e-3 of theta for every entry") {
    for (const CatalogEntry& e : catalog()) {
        CAPTURE(e.name);
        CHECK(std::abs(accumulated_angle(e.shape, 1.0) - e.shape.theta) < 1e-3);
    }
}

TEST_CASE("catalog: symmetry classification matches the waveform") {
    for (const CatalogEntry& e : catalog()) {
        CAPTURE(e.name);
        CHECK(is_symmetric(e.shape) == (e.symmetry == Symmetry::Symmetric));
    }
}

TEST_CASE("quadrature of v equals psi/2 on random pulses") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const PulseShape p = (trial % 2 == 0)
                                 ? test::random_piecewise(rng)
                                 : test::random_harmonic(rng, kPi, 3, trial % 4 == 1);
        std::vector<double> breaks;
        for (const Segment& s : p.segments) breaks.push_back(s.end);
        const std::vector<double> panels = make_panels(breaks, 32);
        double integral = 0.0;
        for (std::size_t i = 0; i + 1 < panels.size(); ++i)
            integral += gl_integrate([&](double t) { return eval_amplitude(p, t); }, panels[i],
                                     panels[i + 1], 16);
        CHECK(std::abs(integral - accumulated_angle(p, 1.0) / 2.0) < 1e-10);
    }
}

TEST_CASE("validation: rejects malformed shapes") {
    PulseShape p;
    p.kind = PulseShape::Kind::Piecewise;
    p.theta = kPi;
    p.segments = {{0.6, 1.0}, {0.4, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(validate_pulse(p), std::invalid_argument);  // non-increasing

    p.segments = {{0.5, 1.0}, {0.9, -1.0}};
    CHECK_THROWS_AS(validate_pulse(p), std::invalid_argument);  // last end != 1

    p.segments = {{1.0, 1.0}};
    CHECK_THROWS_AS(validate_pulse(p), std::invalid_argument);  // psi(1) != theta

    p.segments = {{1.0, 0.0}};
    CHECK_THROWS_AS(validate_pulse(p), std::invalid_argument);  // zero waveform, theta != 0
    p.theta = 0.0;
    CHECK_NOTHROW(validate_pulse(p));

    // A psi(1) = -theta realization is the same rotation up to global phase.
    PulseShape neg;
    neg.kind = PulseShape::Kind::Piecewise;
    neg.theta = kPi;
    neg.segments = {{1.0, -kPi / 2}};
    CHECK_NOTHROW(validate_pulse(neg));
}

TEST_CASE("validation: harmonic coefficients must be finite") {
    PulseShape p;
    p.kind = PulseShape::Kind::Harmonic;
    p.theta = kPi;
    p.harmonics = {kPi / 2, {std::numeric_limits<double>::quiet_NaN()}, {}};
    CHECK_THROWS_AS(validate_pulse(p), std::invalid_argument);
    p.harmonics = {kPi / 2, {1.0, -1.0}, {}};
    CHECK_NOTHROW(validate_pulse(p));
}

TEST_CASE("resolve_pulse_name: constant pulses and unknown names") {
    const PulseShape p2 = resolve_pulse_name("CONST-Pi2");
    CHECK(p2.theta == doctest::Approx(kPi / 2));
    CHECK(accumulated_angle(p2, 1.0) == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS((void)resolve_pulse_name("NOPE"), std::invalid_argument);
    CHECK(find_catalog_entry("corpse-pi") != nullptr);  // case-insensitive
}
