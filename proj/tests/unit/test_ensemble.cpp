#include "phaseonium/ensemble.hpp"
#include "phaseonium/medium.hpp"

#include <doctest.h>
#include <gsl/gsl_integration.h>
#include <omp.h>

#include <cmath>
#include <functional>
#include <random>

using namespace phaseonium;

namespace {

struct Classes {
    std::size_t n;
    std::vector<double> p11, p22, p33, x12, y12, x13, y13, x23, y23, delta, weight;

    Classes(const DetuningGrid& g, double pop1, cplx s12) : n(g.size()), delta(g.nodes), weight(g.weights)
    {
        p11.assign(n, pop1);
        p22.assign(n, 1.0 - pop1);
        p33.assign(n, 0.0);
        x12.assign(n, s12.real());
        y12.assign(n, s12.imag());
        for (auto* v : {&x13, &y13, &x23, &y23}) v->assign(n, 0.0);
    }

    ClassArrays view()
    {
        return {p11.data(), p22.data(), p33.data(), x12.data(), y12.data(), x13.data(), y13.data(),
                x23.data(), y23.data(), delta.data(), weight.data(), n};
    }
};

struct Drive {
    std::vector<cplx> f13, f23, m13, m23;
    SliceDrive slice{};

    Drive(const std::function<cplx(double)>& o13, const std::function<cplx(double)>& o23, double t0, double dt,
          std::size_t steps)
    {
        for (std::size_t i = 0; i <= steps; ++i) {
            const double t = t0 + dt * static_cast<double>(i);
            f13.push_back(o13(t));
            f23.push_back(o23(t));
            m13.push_back(o13(t + 0.5 * dt));
            m23.push_back(o23(t + 0.5 * dt));
        }
        slice = {f13.data(), f23.data(), m13.data(), m23.data(), steps, dt};
    }
};

// i int_{t0}^{t} exp(i D (t - s)) f(s) ds by adaptive quadrature.
cplx linear_response(double D, double t0, double t, const std::function<cplx(double)>& f)
{
    struct P {
        double D, t;
        const std::function<cplx(double)>* f;
        bool imag;
    };
    auto integrand = [](double s, void* v) {
        const P* p = static_cast<P*>(v);
        const cplx x = I * std::exp(I * p->D * (p->t - s)) * (*p->f)(s);
        return p->imag ? x.imag() : x.real();
    };
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(1000);
    double re = 0.0, im = 0.0, err = 0.0;
    P pr{D, t, &f, false}, pi_{D, t, &f, true};
    gsl_function Fr{integrand, &pr}, Fi{integrand, &pi_};
    gsl_integration_qag(&Fr, t0, t, 1e-19, 1e-11, 1000, GSL_INTEG_GAUSS61, ws, &re, &err);
    gsl_integration_qag(&Fi, t0, t, 1e-19, 1e-11, 1000, GSL_INTEG_GAUSS61, ws, &im, &err);
    gsl_integration_workspace_free(ws);
    return {re, im};
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("resonant Rabi oscillation")
{
    DetuningGrid g{{0.0, 0.0}, {0.5, 0.5}};
    Classes c(g, 1.0, 0.0);
    const double omega = 0.8, dt = 1e-3;
    const std::size_t steps = 2000;
    Drive d([&](double) { return cplx{omega, 0.0}; }, [](double) { return cplx{}; }, 0.0, dt, steps);
    SlicePolarization pol;
    const SliceDiagnostics diag = evolve_classes_serial(c.view(), d.slice, {1.0, 0.0, {}}, pol);
    const double t = dt * steps;
    CHECK(c.p33[0] == doctest::Approx(std::pow(std::sin(omega * t), 2)).epsilon(1e-11));
    CHECK(c.p11[0] == doctest::Approx(std::pow(std::cos(omega * t), 2)).epsilon(1e-11));
    // rho13 = i sin cos for real Omega
    CHECK(std::abs(cplx{c.x13[0], c.y13[0]} - I * std::sin(omega * t) * std::cos(omega * t)) < 1e-11);
    CHECK(diag.invariant_violation < 1e-11);
    CHECK(diag.population_deviation == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("free evolution is an exact rotation")
{
    DetuningGrid g{{-3.0, 3.0}, {0.5, 0.5}};
    Classes c(g, 0.5, 0.0);
    c.x13 = {0.1, 0.1};
    c.p33 = {0.05, 0.05};
    c.p11 = {0.45, 0.45};
    const double dt = 0.37;  // coarse on purpose
    Drive d([](double) { return cplx{}; }, [](double) { return cplx{}; }, 0.0, dt, 40);
    SlicePolarization pol;
    evolve_classes_blocked(c.view(), d.slice, {0.45, 0.5, {}}, pol);
    for (std::size_t j = 0; j < 2; ++j) {
        const cplx expect = 0.1 * std::exp(I * g.nodes[j] * 40.0 * dt);
        CHECK(std::abs(cplx{c.x13[j], c.y13[j]} - expect) < 1e-14);
    }
}

TEST_CASE("weak drive follows linear response")
{
    const InhomogeneousProfile prof(ProfileShape::flat_top, 8.0, 4.0);
    const DetuningGrid g = sample_profile(prof, 16);
    const cplx s12 = std::sqrt(0.24) * std::polar(1.0, 0.9);
    const double amp = 1e-6;
    auto o13 = [&](double t) { return cplx{0.9, 0.2} * amp * std::exp(-0.5 * (t + 4.0) * (t + 4.0)); };
    auto o23 = [&](double t) { return cplx{0.3, 0.0} * amp * std::exp(-0.5 * (t + 4.0) * (t + 4.0)); };
    const double t0 = -12.0, dt = 0.01;
    const std::size_t steps = 1000;
    Drive d(o13, o23, t0, dt, steps);

    for (int kernel = 0; kernel < 2; ++kernel) {
        Classes c(g, 0.6, s12);
        SlicePolarization pol;
        if (kernel == 0) evolve_classes_serial(c.view(), d.slice, {0.6, 0.4, s12}, pol);
        else evolve_classes_blocked(c.view(), d.slice, {0.6, 0.4, s12}, pol);
        const double t = t0 + dt * steps;
        std::function<cplx(double)> src13 = [&](double s) { return 0.6 * o13(s) + s12 * o23(s); };
        std::function<cplx(double)> src23 = [&](double s) { return std::conj(s12) * o13(s) + 0.4 * o23(s); };
        for (std::size_t j : {0ul, 5ul, 11ul}) {
            const cplx r13 = linear_response(g.nodes[j], t0, t, src13);
            const cplx r23 = linear_response(g.nodes[j], t0, t, src23);
            CAPTURE(kernel);
            CAPTURE(j);
            CHECK(std::abs(cplx{c.x13[j], c.y13[j]} - r13) < 1e-9 * amp);
            CHECK(std::abs(cplx{c.x23[j], c.y23[j]} - r23) < 1e-9 * amp);
        }
    }
}

TEST_CASE("blocked kernel reproduces the serial reference")
{
    const InhomogeneousProfile prof = InhomogeneousProfile::default_flat_top();
    const DetuningGrid g = sample_profile(prof, 150);  // not a multiple of the block size
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const cplx a13{u(rng), u(rng)}, a23{u(rng), u(rng)};
    auto o13 = [&](double t) { return 0.05 * a13 * std::exp(-0.5 * t * t); };
    auto o23 = [&](double t) { return 0.05 * a23 * std::exp(-0.5 * t * t); };
    Drive d(o13, o23, -6.0, 0.005, 2400);
    const cplx s12{0.3, -0.35};

    Classes a(g, 0.5, s12), b(g, 0.5, s12);
    SlicePolarization pa, pb;
    const SliceDiagnostics da = evolve_classes_serial(a.view(), d.slice, {0.5, 0.5, s12}, pa);
    const SliceDiagnostics db = evolve_classes_blocked(b.view(), d.slice, {0.5, 0.5, s12}, pb);
    for (auto [x, y] : {std::pair{&a.p11, &b.p11}, {&a.p33, &b.p33}, {&a.x12, &b.x12}, {&a.y12, &b.y12},
                        {&a.x13, &b.x13}, {&a.y13, &b.y13}, {&a.x23, &b.x23}, {&a.y23, &b.y23}})
        CHECK(max_diff(*x, *y) < 1e-14);
    double dp = 0.0;
    for (std::size_t i = 0; i < pa.p13.size(); ++i)
        dp = std::max({dp, std::abs(pa.p13[i] - pb.p13[i]), std::abs(pa.p23[i] - pb.p23[i])});
    CHECK(dp < 1e-14);
    CHECK(da.population_deviation == doctest::Approx(db.population_deviation).epsilon(1e-9));
    CHECK(da.coherence12_deviation == doctest::Approx(db.coherence12_deviation).epsilon(1e-9));
    CHECK(da.population_deviation > 1e-5);
    CHECK(da.invariant_violation < 1e-12);
    CHECK(db.invariant_violation < 1e-12);
}

TEST_CASE("blocked kernel is independent of the thread count")
{
    const DetuningGrid g = sample_profile(InhomogeneousProfile::default_flat_top(), 256);
    auto o13 = [](double t) { return cplx{0.02, 0.01} * std::exp(-0.5 * t * t); };
    auto o23 = [](double t) { return cplx{0.01, 0.0} * std::exp(-0.5 * t * t); };
    Drive d(o13, o23, -6.0, 0.01, 1200);
    std::vector<std::vector<double>> states;
    std::vector<std::vector<cplx>> pols;
    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 3}) {
        omp_set_num_threads(threads);
        Classes c(g, 0.5, {0.5, 0.0});
        SlicePolarization p;
        evolve_classes_blocked(c.view(), d.slice, {0.5, 0.5, {0.5, 0.0}}, p);
        states.push_back(c.x13);
        pols.push_back(p.p13);
    }
    omp_set_num_threads(saved);
    CHECK(states[0] == states[1]);
    CHECK(states[0] == states[2]);
    CHECK(pols[0] == pols[1]);
    CHECK(pols[0] == pols[2]);
}

TEST_CASE("polarization sums and diagnostics")
{
    DetuningGrid g{{-1.0, 1.0}, {0.25, 0.75}};
    Classes c(g, 1.0, 0.0);
    Drive d([](double) { return cplx{1e-3, 0.0}; }, [](double) { return cplx{}; }, 0.0, 0.01, 10);
    SlicePolarization p;
    Classes ref = c;
    SlicePolarization unused;
    evolve_classes_serial(c.view(), d.slice, {1.0, 0.0, {}}, p);
    const cplx expect = 0.25 * cplx{c.x13[0], c.y13[0]} + 0.75 * cplx{c.x13[1], c.y13[1]};
    CHECK(std::abs(p.p13.back() - expect) < 1e-18);
    CHECK(p.p13.front() == cplx{});
    CHECK(p.p13.size() == 11);

    Drive bad([](double) { return cplx{NAN, 0.0}; }, [](double) { return cplx{}; }, 0.0, 0.01, 4);
    CHECK_FALSE(evolve_classes_serial(ref.view(), bad.slice, {1.0, 0.0, {}}, unused).finite);
    Classes ref2(g, 1.0, 0.0);
    CHECK_FALSE(evolve_classes_blocked(ref2.view(), bad.slice, {1.0, 0.0, {}}, unused).finite);

    SliceDiagnostics a{1e-3, 0.0, 0.0, true}, b{0.0, 2e-3, 5e-4, false};
    a.merge(b);
    CHECK(a.population_deviation == 1e-3);
    CHECK(a.coherence12_deviation == 2e-3);
    CHECK_FALSE(a.finite);
}
