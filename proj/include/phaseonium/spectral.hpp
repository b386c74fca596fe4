#pragma once

#include "phaseonium/common.hpp"
#include "phaseonium/qubit.hpp"

#include <vector>

namespace phaseonium {

/// Uniform, centred sampling: t_i = t_ref + (i - n/2) dt for i in [0, n),
/// w_k = (k - n/2) dw with dw = 2 pi / (n dt). Transforms carry phases
/// relative to t_ref, so reversing the spectrum reverses time about t_ref.
struct TimeGrid {
    std::size_t n = 8192;
    double dt = 64.0 / 8192.0;
    double t_ref = 0.0;

    double time(std::size_t i) const { return t_ref + (static_cast<double>(i) - static_cast<double>(n / 2)) * dt; }
    double domega() const { return 2.0 * pi / (static_cast<double>(n) * dt); }
    double omega(std::size_t k) const { return (static_cast<double>(k) - static_cast<double>(n / 2)) * domega(); }
    /// Index of -w_k. The Nyquist bin maps onto itself.
    std::size_t mirror(std::size_t k) const { return (n - k) % n; }

    /// n samples spanning [t_ref - half_window, t_ref + half_window).
    static TimeGrid centered(std::size_t n, double half_window, double t_ref = 0.0);
};

enum class Direction { forward, backward };

/// Two-component slowly varying envelope (Rabi frequencies of the 1-3 and
/// 2-3 components) sampled in time.
struct TimeField {
    TimeGrid grid;
    std::vector<cplx> comp13;
    std::vector<cplx> comp23;

    explicit TimeField(TimeGrid g) : grid(g), comp13(g.n), comp23(g.n) {}

    double energy13() const;
    double energy23() const;
    double energy() const { return energy13() + energy23(); }
};

/// Peak intensities, energies and the cross term int Omega_13 Omega_23^* dt.
struct FieldSummary {
    double peak13 = 0.0;
    double peak23 = 0.0;
    double energy13 = 0.0;
    double energy23 = 0.0;
    cplx cross{};

    double energy() const { return energy13 + energy23; }
    /// arg(Omega_13) - arg(Omega_23), intensity weighted.
    double relative_phase() const { return std::arg(cross); }
};

FieldSummary summarize(const std::vector<cplx>& comp13, const std::vector<cplx>& comp23, double dt);
inline FieldSummary summarize(const TimeField& f) { return summarize(f.comp13, f.comp23, f.grid.dt); }

/// Spectrum Omega~(w) = int Omega(t) exp(i w (t - t_ref)) dt.
struct SpectralField {
    TimeGrid grid;
    std::vector<cplx> comp13;
    std::vector<cplx> comp23;
    Direction direction = Direction::forward;

    explicit SpectralField(TimeGrid g, Direction d = Direction::forward)
        : grid(g), comp13(g.n), comp23(g.n), direction(d)
    {
    }

    double energy() const;  // sum |Omega~|^2 dw / 2 pi
};

/// Throws WindowError when the envelope at either window edge exceeds
/// `edge_tolerance` times its maximum.
SpectralField to_spectrum(const TimeField& field, double edge_tolerance = 1e-12);
TimeField to_time(const SpectralField& field);

/// Gaussian pulse exp(-(t - center)^2 / (2 duration^2)) carrying the
/// polarization qubit, scaled by peak_rabi.
struct PulseSpec {
    double duration = 1.0;
    double center = -8.0;
    PolarizationQubit qubit{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    double peak_rabi = 1e-4;

    double envelope(double t) const;
    cplx rabi13(double t) const { return peak_rabi * qubit.a_L * envelope(t); }
    cplx rabi23(double t) const { return peak_rabi * qubit.a_R * envelope(t); }
    /// int |Omega_13|^2 + |Omega_23|^2 dt (closed form).
    double energy() const;
    /// Largest |w| at which the spectral amplitude still exceeds `fraction` of its peak.
    double spectral_extent(double fraction) const;
};

TimeField sample_pulse(const PulseSpec& pulse, const TimeGrid& grid);

/// Pulse envelope mirrored about `t_mirror`, sampled on `grid`.
std::vector<double> reversed_envelope(const PulseSpec& pulse, const TimeGrid& grid, double t_mirror);

}  // namespace phaseonium
