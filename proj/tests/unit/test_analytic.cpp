#include "phaseonium/analytic.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

using namespace phaseonium;

namespace {

using M2 = std::array<cplx, 4>;  // row major

M2 mul(const M2& a, const M2& b)
{
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}
M2 add(const M2& a, const M2& b, cplx s = 1.0) { return {a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]}; }
M2 scale(const M2& a, cplx s) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }

// Ground-state density matrix at z.
M2 rho(double pop1, double phi, double theta, double z)
{
    const cplx s = std::sqrt(pop1 * (1.0 - pop1)) * std::polar(1.0, phi + theta * z);
    return {pop1, s, std::conj(s), 1.0 - pop1};
}

double dist(const Mat2& m, const M2& r)
{
    return std::max({std::abs(m.m11 - r[0]), std::abs(m.m12 - r[1]), std::abs(m.m21 - r[2]), std::abs(m.m22 - r[3])});
}

double size(const M2& r) { return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2]), std::abs(r[3])}); }

// dT/dz = -alpha rho(z) T, T(0) = 1, sampled at n + 1 nodes and n midpoints by RK4.
struct ForwardOracle {
    std::vector<M2> node, mid;
};

ForwardOracle forward_ode(cplx alpha, double pop1, double phi, double theta, int n)
{
    const double h = 1.0 / n;
    auto f = [&](double z, const M2& t) { return scale(mul(rho(pop1, phi, theta, z), t), -alpha); };
    ForwardOracle o;
    M2 t{1.0, 0.0, 0.0, 1.0};
    o.node.push_back(t);
    for (int i = 0; i < n; ++i) {
        const double z = i * h;
        const M2 k1 = f(z, t);
        const M2 k2 = f(z + h / 2, add(t, k1, h / 2));
        const M2 k3 = f(z + h / 2, add(t, k2, h / 2));
        const M2 k4 = f(z + h, add(t, k3, h));
        // separate RK4 half step for the midpoint value
        const M2 a1 = f(z, t);
        const M2 a2 = f(z + h / 4, add(t, a1, h / 4));
        const M2 a3 = f(z + h / 4, add(t, a2, h / 4));
        const M2 a4 = f(z + h / 2, add(t, a3, h / 2));
        o.mid.push_back(add(t, add(add(a1, a4), add(a2, a3), 2.0), h / 12.0));
        t = add(t, add(add(k1, k4), add(k2, k3), 2.0), h / 6.0);
        o.node.push_back(t);
    }
    return o;
}

// dB/dz = rho(z) (F B + J A(z)), B(1) = 0, integrated from z = 1 down to z.
M2 backward_ode(cplx F, cplx Hm, cplx J, double pop1, double phi, double theta, double z_end, int n)
{
    const ForwardOracle a = forward_ode(Hm, pop1, phi, theta, n);
    const double h = 1.0 / n;
    auto f = [&](double z, const M2& b, const M2& af) {
        return mul(rho(pop1, phi, theta, z), add(scale(b, F), scale(af, J)));
    };
    M2 b{};
    const int stop = static_cast<int>(std::lround(z_end * n));
    for (int i = n; i > stop; --i) {
        const double z = i * h;
        const M2 k1 = f(z, b, a.node[i]);
        const M2 k2 = f(z - h / 2, add(b, k1, -h / 2), a.mid[i - 1]);
        const M2 k3 = f(z - h / 2, add(b, k2, -h / 2), a.mid[i - 1]);
        const M2 k4 = f(z - h, add(b, k3, -h), a.node[i - 1]);
        b = add(b, add(add(k1, k4), add(k2, k3), 2.0), -h / 6.0);
    }
    return b;
}

}  // namespace

TEST_CASE("uniform forward matrix solves the propagation equation")
{
    for (double pop1 : {0.6, 0.2, 1.0}) {
        const cplx alpha{7.3, -2.1};
        const ForwardOracle o = forward_ode(alpha, pop1, pi / 3.0, 0.0, 2000);
        const auto prep = make_phaseonium(pop1, pi / 3.0, 0.0);
        for (int i : {0, 500, 1300, 2000}) {
            const double z = i / 2000.0;
            CHECK(dist(uniform_forward_matrix(prep, alpha, z), o.node[i]) < 1e-11);
        }
    }
}

TEST_CASE("incoherent uniform forward matrix is diagonal Beer-Lambert")
{
    const auto prep = make_phaseonium(0.7, 0.0, 0.0, true);
    const cplx alpha{4.0, 1.0};
    const Mat2 m = uniform_forward_matrix(prep, alpha, 0.6);
    CHECK(std::abs(m.m11 - std::exp(-alpha * 0.7 * 0.6)) < 1e-15);
    CHECK(std::abs(m.m22 - std::exp(-alpha * 0.3 * 0.6)) < 1e-15);
    CHECK(m.m12 == cplx{});
    CHECK(m.m21 == cplx{});
}

TEST_CASE("longitudinal forward matrix solves the propagation equation")
{
    for (double theta : {3.0 * pi, 10.0, 25.0, 0.3}) {
        const cplx alpha{10.0, 1.7};
        const double phi = 0.4;
        const ForwardOracle o = forward_ode(alpha, 0.5, phi, theta, 4000);
        for (int i : {0, 1000, 2500, 4000}) {
            const double z = i / 4000.0;
            const Mat2 m = conjugate_by_phase(longitudinal_forward_matrix(alpha, theta, z, 1e-5), phi);
            CAPTURE(theta);
            CAPTURE(z);
            CHECK(dist(m, o.node[i]) < 1e-9);
        }
    }
}

TEST_CASE("uniform backward matrix solves the retrieval equation")
{
    const cplx F{31.0, 4.0}, Hm{31.0, -4.0}, J{62.0, 0.0};
    for (double pop1 : {0.6, 0.5, 1.0}) {
        const auto prep = make_phaseonium(pop1, 1.1, 0.0);
        for (double z : {0.0, 0.3, 0.75}) {
            const M2 ref = backward_ode(F * 0.3, Hm * 0.3, J * 0.3, pop1, 1.1, 0.0, z, 4000);
            CAPTURE(pop1);
            CAPTURE(z);
            CHECK(dist(uniform_backward_matrix(prep, F * 0.3, Hm * 0.3, J * 0.3, z), ref) < 1e-9 * std::max(1.0, size(ref)));
        }
    }
    CHECK(dist(uniform_backward_matrix(make_phaseonium(0.6, 0.0, 0.0), F, Hm, 0.0, 0.2), M2{}) == 0.0);
}

TEST_CASE("incoherent uniform backward matrix acts per level")
{
    const cplx F{5.0, 1.0}, Hm{5.0, -1.0}, J{10.0, 0.0};
    const auto prep = make_phaseonium(0.7, 0.0, 0.0, true);
    const Mat2 m = uniform_backward_matrix(prep, F, Hm, J, 0.0);
    for (int mu = 0; mu < 2; ++mu) {
        const double lambda = mu == 0 ? 0.7 : 0.3;
        // single level: dB/dz = lambda (F B + J exp(-lambda Hm z))
        const M2 ref = backward_ode(F * lambda, Hm * lambda, J * lambda, 1.0, 0.0, 0.0, 0.0, 4000);
        CHECK(std::abs((mu == 0 ? m.m11 : m.m22) - ref[0]) < 1e-9);
    }
    CHECK(m.m12 == cplx{});
}

TEST_CASE("longitudinal backward matrix solves the retrieval equation")
{
    const cplx F{10.0, 2.5}, Hm{10.0, -2.5}, J{20.0, 0.0};
    for (double theta : {3.0 * pi, 4.0, 30.0}) {
        for (double z : {0.0, 0.4, 0.9}) {
            const double phi = -0.7;
            const M2 ref = backward_ode(F, Hm, J, 0.5, phi, theta, z, 4000);
            const Mat2 m = conjugate_by_phase(longitudinal_backward_matrix(F, Hm, J, theta, z, 1e-5), phi);
            CAPTURE(theta);
            CAPTURE(z);
            CHECK(dist(m, ref) < 1e-8 * std::max(1.0, size(ref)));
        }
    }
}

TEST_CASE("branch continuity near K = 0")
{
    const double a = 10.0;
    for (double eps : {1e-6, -1e-6}) {
        const double theta = a * (1.0 + eps);
        for (double z : {0.0, 0.5, 1.0}) {
            const Mat2 direct = longitudinal_forward_matrix(a, theta, z, 1e-12);
            const Mat2 series = longitudinal_forward_matrix(a, theta, z, 1e6);
            for (const auto& [x, y] : {std::pair{direct.m11, series.m11}, {direct.m12, series.m12}, {direct.m22, series.m22}})
                CHECK(std::abs(x - y) <= 1e-5 * std::max(std::abs(y), 1e-12));

            const Mat2 bd = longitudinal_backward_matrix(a, a, 2.0 * a, theta, z, 1e-12);
            const Mat2 bs = longitudinal_backward_matrix(a, a, 2.0 * a, theta, z, 1e6);
            for (const auto& [x, y] : {std::pair{bd.m11, bs.m11}, {bd.m12, bs.m12}, {bd.m21, bs.m21}, {bd.m22, bs.m22}})
                CHECK(std::abs(x - y) <= 1e-5 * std::max(std::abs(y), 1e-12));
        }
    }
    CHECK(std::abs(sinhc(0.0, 0.7, 1e-6) - 0.7) < 1e-16);
    CHECK(std::abs(sinhc(cplx{0.0, 1e-3}, 2.0, 1e-2) - std::sin(2e-3) / 1e-3) < 1e-15);
}

TEST_CASE("field propagation on a grid")
{
    const TimeGrid g = TimeGrid::centered(4096, 32.0, 0.0);
    const MediumSpec m(make_phaseonium(0.6, pi / 3.0, 0.0), InhomogeneousProfile::default_flat_top(), 10.0);
    const SpectralMedium sm(m, g);
    PulseSpec p;
    p.qubit = qubit_from_intensities(0.9, 0.1, 0.0);
    const SpectralField in = to_spectrum(sample_pulse(p, g));

    SUBCASE("z = 0 forward is the identity")
    {
        const SpectralField f = propagate_forward(in, sm, 0.0);
        for (std::size_t k = 0; k < g.n; k += 31) CHECK(std::abs(f.comp13[k] - in.comp13[k]) < 1e-18);
    }
    SUBCASE("antisymmetric mode decouples")
    {
        const cplx c1 = std::sqrt(0.6) * std::polar(1.0, pi / 3.0);
        const cplx c2 = std::sqrt(0.4);
        PulseSpec a = p;
        a.qubit = {std::conj(c2), -std::conj(c1)};
        const SpectralField ina = to_spectrum(sample_pulse(a, g));
        const SpectralField out = propagate_forward(ina, sm, 10.0);
        CHECK(to_time(out).energy() == doctest::Approx(a.energy()).epsilon(1e-12));
    }
    SUBCASE("large-depth limits")
    {
        const auto fl = forward_limit_intensities(m.preparation);
        const auto bl = backward_limit_intensities(m.preparation);
        CHECK(fl[0] == doctest::Approx(0.4));
        CHECK(bl[0] == doctest::Approx(0.6));
        const FieldSummary f = summarize(to_time(propagate_forward(in, sm, 10.0)));
        CHECK(f.peak13 / (f.peak13 + f.peak23) == doctest::Approx(fl[0]).epsilon(0.01));
    }
    SUBCASE("position checks")
    {
        CHECK_THROWS_AS(propagate_forward(in, sm, 10.5), DomainError);
        CHECK_THROWS_AS(propagate_forward(in, sm, -0.1), DomainError);
    }
    SUBCASE("narrow span is rejected")
    {
        const MediumSpec narrow(m.preparation, InhomogeneousProfile(ProfileShape::flat_top, 4.0, 2.0), 10.0);
        const SpectralMedium sn(narrow, g);
        CHECK_THROWS_AS(propagate_forward(in, sn, 1.0), ExtrapolationError);
    }
}

TEST_CASE("solver validity domain")
{
    const TimeGrid g = TimeGrid::centered(1024, 32.0, 0.0);
    const MediumSpec m(make_phaseonium(0.6, 0.0, 3.0 * pi), InhomogeneousProfile::default_flat_top(), 10.0);
    const SpectralMedium sm(m, g);
    PulseSpec p;
    const SpectralField in = to_spectrum(sample_pulse(p, g));
    CHECK_FALSE(analytic_supported(m.preparation));
    CHECK_THROWS_AS(propagate_forward(in, sm, 1.0), WrongSolverError);
    CHECK_THROWS_AS(retrieve_backward(in, sm), WrongSolverError);
    CHECK_THROWS_AS(propagate_forward_uniform(in, sm, 1.0), WrongSolverError);
    CHECK(analytic_supported(make_phaseonium(0.5, 0.0, 3.0 * pi)));
    CHECK_FALSE(analytic_supported(make_phaseonium(0.5, 0.0, 3.0 * pi, true)));
    CHECK(analytic_supported(make_phaseonium(0.2, 0.0, 0.0, true)));
}

TEST_CASE("longitudinal memory at alpha L = 10 returns the time-reversed input")
{
    const TimeGrid g = TimeGrid::centered(4096, 32.0, 0.0);
    const MediumSpec m(make_phaseonium(0.5, 0.0, 3.0 * pi), InhomogeneousProfile::default_flat_top(), 10.0);
    const SpectralMedium sm(m, g);
    PulseSpec p;
    p.qubit = qubit_from_intensities(0.9, 0.1, 0.5);
    const SpectralField in = to_spectrum(sample_pulse(p, g));
    const TimeField ret = to_time(retrieve_backward(in, sm));
    const TimeField lim = to_time(memory_limit(in));
    cplx overlap{};
    for (std::size_t i = 0; i < g.n; ++i)
        overlap += std::conj(lim.comp13[i]) * ret.comp13[i] + std::conj(lim.comp23[i]) * ret.comp23[i];
    overlap *= g.dt;
    CHECK(std::norm(overlap) / (ret.energy() * lim.energy()) > 0.9999);
    CHECK(std::abs(std::arg(overlap)) < 1e-3);
    CHECK(ret.energy() / lim.energy() > 0.99);
}
