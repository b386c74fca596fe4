#include "phaseonium/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace phaseonium;

namespace {

PulseSpec pulse_with(double l, double r, double phase, double center = -8.0)
{
    PulseSpec p;
    p.qubit = qubit_from_intensities(l, r, phase);
    p.center = center;
    p.peak_rabi = 2e-4;
    return p;
}

}  // namespace

TEST_CASE("time grid layout")
{
    const TimeGrid g = TimeGrid::centered(64, 8.0, 1.0);
    CHECK(g.dt == doctest::Approx(0.25));
    CHECK(g.time(32) == doctest::Approx(1.0));
    CHECK(g.time(0) == doctest::Approx(-7.0));
    CHECK(g.omega(32) == 0.0);
    CHECK(g.mirror(32) == 32);
    CHECK(g.mirror(0) == 0);
    CHECK(g.omega(g.mirror(10)) == doctest::Approx(-g.omega(10)));
    CHECK_THROWS_AS(TimeGrid::centered(63, 8.0), ConfigError);
    CHECK_THROWS_AS(TimeGrid::centered(64, 0.0), ConfigError);
}

TEST_CASE("gaussian spectrum matches its closed form")
{
    const TimeGrid g = TimeGrid::centered(2048, 32.0, 0.0);
    const PulseSpec p = pulse_with(0.9, 0.1, 0.4);
    const SpectralField s = to_spectrum(sample_pulse(p, g));
    for (std::size_t k = 900; k < 1150; k += 7) {
        const double w = g.omega(k);
        const cplx env = p.peak_rabi * p.duration * std::sqrt(2.0 * pi) * std::exp(-0.5 * w * w) *
                         std::exp(I * w * (p.center - g.t_ref));
        CHECK(std::abs(s.comp13[k] - p.qubit.a_L * env) < 1e-14);
        CHECK(std::abs(s.comp23[k] - p.qubit.a_R * env) < 1e-14);
    }
}

TEST_CASE("transform round trip, Parseval and closed-form energy")
{
    const TimeGrid g = TimeGrid::centered(4096, 32.0, 0.0);
    const PulseSpec p = pulse_with(0.3, 0.7, -1.1);
    const TimeField t = sample_pulse(p, g);
    const SpectralField s = to_spectrum(t);
    const TimeField back = to_time(s);
    for (std::size_t i = 0; i < g.n; i += 13) {
        CHECK(std::abs(back.comp13[i] - t.comp13[i]) < 1e-18);
        CHECK(std::abs(back.comp23[i] - t.comp23[i]) < 1e-18);
    }
    CHECK(s.energy() == doctest::Approx(t.energy()).epsilon(1e-12));
    CHECK(t.energy() == doctest::Approx(p.energy()).epsilon(1e-12));
}

TEST_CASE("spectral mirror reverses time about t_ref")
{
    const TimeGrid g = TimeGrid::centered(1024, 16.0, 0.0);
    const PulseSpec p = pulse_with(1.0, 0.0, 0.0, -5.0);
    const SpectralField s = to_spectrum(sample_pulse(p, g));
    SpectralField m(g);
    for (std::size_t k = 0; k < g.n; ++k) m.comp13[k] = s.comp13[g.mirror(k)];
    const TimeField r = to_time(m);
    const std::vector<double> env = reversed_envelope(p, g, 0.0);
    for (std::size_t i = 1; i < g.n; i += 5) CHECK(std::abs(r.comp13[i] - p.peak_rabi * env[i]) < 1e-15);
}

TEST_CASE("clipped pulses are rejected")
{
    const TimeGrid g = TimeGrid::centered(512, 8.0, 0.0);
    CHECK_THROWS_AS(to_spectrum(sample_pulse(pulse_with(1.0, 0.0, 0.0, -6.0), g)), WindowError);
    CHECK_NOTHROW(to_spectrum(sample_pulse(pulse_with(1.0, 0.0, 0.0, 0.0), g)));
    TimeField zero(g);
    CHECK_NOTHROW(to_spectrum(zero));
}

TEST_CASE("pulse helpers")
{
    const PulseSpec p = pulse_with(0.9, 0.1, 0.0);
    const double f = 1e-13;
    const double w = p.spectral_extent(f);
    CHECK(w == doctest::Approx(std::sqrt(2.0 * std::log(1.0 / f)) / p.duration).epsilon(1e-12));
    CHECK(p.envelope(p.center) == 1.0);
    CHECK(std::abs(p.rabi13(p.center) - p.peak_rabi * p.qubit.a_L) < 1e-20);
}

TEST_CASE("field summary")
{
    const TimeGrid g = TimeGrid::centered(2048, 32.0, 0.0);
    const PulseSpec p = pulse_with(0.9, 0.1, 1.2);
    const FieldSummary s = summarize(sample_pulse(p, g));
    const double peak = p.peak_rabi * p.peak_rabi;
    CHECK(s.peak13 == doctest::Approx(0.9 * peak).epsilon(1e-12));
    CHECK(s.peak23 == doctest::Approx(0.1 * peak).epsilon(1e-12));
    CHECK(s.relative_phase() == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(s.energy() == doctest::Approx(p.energy()).epsilon(1e-12));
    CHECK_THROWS_AS(summarize(std::vector<cplx>(3), std::vector<cplx>(4), 0.1), DomainError);
}
