#include "phaseonium/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace phaseonium {

namespace {

// FFTW planning is not thread-safe; execution with new-array is.
std::mutex& plan_mutex()
{
    static std::mutex m;
    return m;
}

/// out_k' = sum_i' in_i' exp(sign 2 pi i k' i' / n) on shifted (centred) arrays.
std::vector<cplx> centred_dft(const std::vector<cplx>& in, int sign)
{
    const std::size_t n = in.size();
    std::vector<cplx> buf(in);
    std::rotate(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n / 2), buf.end());
    std::vector<cplx> out(n);
    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n / 2), out.end());
    return out;
}

void check_edges(const std::vector<cplx>& x, double tol, const char* label)
{
    double peak = 0.0;
    for (const cplx& v : x) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return;
    const std::size_t m = std::min<std::size_t>(8, x.size() / 2);
    for (std::size_t i = 0; i < m; ++i) {
        const double edge = std::max(std::abs(x[i]), std::abs(x[x.size() - 1 - i]));
        if (edge > tol * peak) {
            std::ostringstream msg;
            msg << "component " << label << " is clipped by the time window (edge/peak = " << edge / peak << ")";
            throw WindowError(msg.str());
        }
    }
}

}  // namespace

TimeGrid TimeGrid::centered(std::size_t n, double half_window, double t_ref)
{
    if (n < 4 || n % 2 != 0) throw ConfigError("time grid size must be even and >= 4");
    if (!(half_window > 0.0)) throw ConfigError("time window must be positive");
    return {n, 2.0 * half_window / static_cast<double>(n), t_ref};
}

double TimeField::energy13() const
{
    double e = 0.0;
    for (const cplx& v : comp13) e += std::norm(v);
    return e * grid.dt;
}

double TimeField::energy23() const
{
    double e = 0.0;
    for (const cplx& v : comp23) e += std::norm(v);
    return e * grid.dt;
}

FieldSummary summarize(const std::vector<cplx>& comp13, const std::vector<cplx>& comp23, double dt)
{
    if (comp13.size() != comp23.size()) throw DomainError("field components differ in length");
    FieldSummary s;
    for (std::size_t i = 0; i < comp13.size(); ++i) {
        const double i13 = std::norm(comp13[i]);
        const double i23 = std::norm(comp23[i]);
        s.peak13 = std::max(s.peak13, i13);
        s.peak23 = std::max(s.peak23, i23);
        s.energy13 += i13;
        s.energy23 += i23;
        s.cross += comp13[i] * std::conj(comp23[i]);
    }
    s.energy13 *= dt;
    s.energy23 *= dt;
    s.cross *= dt;
    return s;
}

double SpectralField::energy() const
{
    double e = 0.0;
    for (std::size_t k = 0; k < grid.n; ++k) e += std::norm(comp13[k]) + std::norm(comp23[k]);
    return e * grid.domega() / (2.0 * pi);
}

SpectralField to_spectrum(const TimeField& field, double edge_tolerance)
{
    check_edges(field.comp13, edge_tolerance, "13");
    check_edges(field.comp23, edge_tolerance, "23");
    SpectralField s(field.grid);
    s.comp13 = centred_dft(field.comp13, FFTW_BACKWARD);
    s.comp23 = centred_dft(field.comp23, FFTW_BACKWARD);
    for (auto* c : {&s.comp13, &s.comp23})
        for (cplx& v : *c) v *= field.grid.dt;
    return s;
}

TimeField to_time(const SpectralField& field)
{
    TimeField t(field.grid);
    t.comp13 = centred_dft(field.comp13, FFTW_FORWARD);
    t.comp23 = centred_dft(field.comp23, FFTW_FORWARD);
    const double scale = field.grid.domega() / (2.0 * pi);
    for (auto* c : {&t.comp13, &t.comp23})
        for (cplx& v : *c) v *= scale;
    return t;
}

double PulseSpec::envelope(double t) const
{
    const double x = (t - center) / duration;
    return std::exp(-0.5 * x * x);
}

double PulseSpec::energy() const
{
    return peak_rabi * peak_rabi * qubit.norm2() * std::sqrt(pi) * duration;
}

double PulseSpec::spectral_extent(double fraction) const
{
    // |Omega~(w)| ~ exp(-w^2 d^2 / 2)
    return std::sqrt(-2.0 * std::log(fraction)) / duration;
}

TimeField sample_pulse(const PulseSpec& pulse, const TimeGrid& grid)
{
    TimeField f(grid);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double t = grid.time(i);
        f.comp13[i] = pulse.rabi13(t);
        f.comp23[i] = pulse.rabi23(t);
    }
    return f;
}

std::vector<double> reversed_envelope(const PulseSpec& pulse, const TimeGrid& grid, double t_mirror)
{
    std::vector<double> e(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) e[i] = pulse.envelope(2.0 * t_mirror - grid.time(i));
    return e;
}

}  // namespace phaseonium
