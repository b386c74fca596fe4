#include "phaseonium/kernels.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

namespace phaseonium {

namespace {

struct GlTable {
    std::vector<double> x;  // on [-1, 1]
    std::vector<double> w;
};

const GlTable& gl_table(std::size_t order)
{
    static std::mutex mutex;
    static std::map<std::size_t, GlTable> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(order);
    GlTable table;
    for (std::size_t i = 0; i < order; ++i) {
        double x = 0.0, w = 0.0;
        gsl_integration_glfixed_point(-1.0, 1.0, i, &x, &w, t);
        table.x.push_back(x);
        table.w.push_back(w);
    }
    gsl_integration_glfixed_table_free(t);
    return cache.emplace(order, std::move(table)).first->second;
}

void check_span(const InhomogeneousProfile& profile, double omega)
{
    if (!(std::abs(omega) <= profile.span())) {
        std::ostringstream msg;
        msg << "kernel requested at omega=" << omega << " outside the tabulated span +-" << profile.span();
        throw ExtrapolationError(msg.str());
    }
}

/// PV int_{-s}^{s} g(D) / (D - pole) dD. On the smooth segment holding the
/// pole, g(pole) is subtracted and its logarithm added analytically. Panels
/// of the other segments are halved toward the pole until they are no longer
/// than their distance to it.
double principal_value(const std::function<double(double)>& g, const InhomogeneousProfile& profile, double pole,
                       const KernelQuadrature& q)
{
    const double s = profile.span();
    const double scale = profile.shape() == ProfileShape::flat_top ? profile.support() : profile.width();
    const double max_panel = q.panel_fraction * scale;
    const double min_panel = 1e-13 * scale;

    std::vector<double> cuts{-s, s};
    for (double b : profile.breakpoints()) cuts.push_back(b);
    if (pole > -s && pole < s) cuts.push_back(pole);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // Smooth segment [lo, hi] containing the pole; the pole itself is a cut.
    double lo = 0.0, hi = 0.0, g_pole = 0.0;
    bool inside = false;
    if (pole > -s && pole < s) {
        const auto it = std::find(cuts.begin(), cuts.end(), pole);
        lo = it == cuts.begin() ? pole : *(it - 1);
        hi = it + 1 == cuts.end() ? pole : *(it + 1);
        g_pole = g(pole);
        inside = true;
    }
    const GlTable& gl = gl_table(q.order);

    auto panel = [&](double a, double b, double sub) {
        const double mid = 0.5 * (a + b), h = b - a;
        double part = 0.0;
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
            const double d = mid + 0.5 * h * gl.x[i];
            part += gl.w[i] * (g(d) - sub) / (d - pole);
        }
        return 0.5 * h * part;
    };
    std::function<double(double, double)> graded = [&](double a, double b) -> double {
        const double gap = std::min(std::abs(a - pole), std::abs(b - pole));
        if (b - a <= gap || b - a <= min_panel) return panel(a, b, 0.0);
        const double m = 0.5 * (a + b);
        return graded(a, m) + graded(m, b);
    };

    double sum = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c];
        const double b = cuts[c + 1];
        const bool subtract = inside && a >= lo && b <= hi;
        const auto panels = static_cast<std::size_t>(std::ceil((b - a) / max_panel));
        const double h = (b - a) / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double pa = a + static_cast<double>(p) * h;
            const double pb = p + 1 == panels ? b : pa + h;
            sum += subtract ? panel(pa, pb, g_pole) : graded(pa, pb);
        }
    }
    if (inside && g_pole != 0.0) sum += g_pole * std::log(std::abs((hi - pole) / (lo - pole)));
    return sum;
}

}  // namespace

cplx kernel_H(const InhomogeneousProfile& profile, double omega, const KernelQuadrature& q)
{
    check_span(profile, omega);
    auto g = [&](double d) { return profile.density(d); };
    // PV int G(D)/(w + D) = PV int G(D)/(D - (-w)).
    const double pv = principal_value(g, profile, -omega, q);
    return {pi * profile.density(-omega), pv};
}

cplx kernel_F(const InhomogeneousProfile& profile, double omega, const KernelQuadrature& q)
{
    check_span(profile, omega);
    auto g = [&](double d) { return profile.density(-d); };
    // PV int G(-D)/(w - D) = -PV int G(-D)/(D - w).
    const double pv = -principal_value(g, profile, omega, q);
    return {pi * profile.density(-omega), pv};
}

cplx kernel_J(const InhomogeneousProfile& profile, double omega)
{
    return {2.0 * pi * profile.density(-omega), 0.0};
}

double coupling_eta(const MediumSpec& medium)
{
    // Re H(0) = pi G(0) exactly.
    return medium.optical_depth / (pi * medium.profile.density(0.0));
}

cplx absorption_coefficient(const MediumSpec& medium, double omega, const KernelQuadrature& q)
{
    return coupling_eta(medium) * kernel_H(medium.profile, omega, q);
}

KernelTable tabulate_kernels(const MediumSpec& medium, std::span<const double> omega, const KernelQuadrature& q)
{
    for (double w : omega) check_span(medium.profile, w);
    gl_table(q.order);

    KernelTable t;
    const std::size_t n = omega.size();
    t.omega.assign(omega.begin(), omega.end());
    t.H.resize(n);
    t.F.resize(n);
    t.J.resize(n);
    t.alpha.resize(n);
    t.eta = coupling_eta(medium);

#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t k = 0; k < n; ++k) {
        t.H[k] = kernel_H(medium.profile, omega[k], q);
        t.F[k] = kernel_F(medium.profile, omega[k], q);
        t.J[k] = kernel_J(medium.profile, omega[k]);
        t.alpha[k] = t.eta * t.H[k];
    }
    return t;
}

void write_kernel_table(std::ostream& os, const KernelTable& t)
{
    os << "# omega\tReH\tImH\tReF\tImF\tReJ\tImJ\n";
    os << std::scientific << std::setprecision(12);
    for (std::size_t k = 0; k < t.omega.size(); ++k) {
        os << t.omega[k] << '\t' << t.H[k].real() << '\t' << t.H[k].imag() << '\t' << t.F[k].real() << '\t'
           << t.F[k].imag() << '\t' << t.J[k].real() << '\t' << t.J[k].imag() << '\n';
    }
}

}  // namespace phaseonium
