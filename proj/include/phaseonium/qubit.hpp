#pragma once

#include "phaseonium/common.hpp"

#include <cmath>

namespace phaseonium {

/// Single-photon polarization state a_L|L> + a_R|R>. |L> drives the 1-3
/// transition and |R> the 2-3 transition. Output states may be subnormalized.
struct PolarizationQubit {
    cplx a_L{};
    cplx a_R{};

    double norm2() const { return std::norm(a_L) + std::norm(a_R); }
    double norm() const { return std::sqrt(norm2()); }

    PolarizationQubit normalized() const
    {
        const double n = norm();
        if (n == 0.0) throw DomainError("cannot normalize a zero qubit");
        return {a_L / n, a_R / n};
    }

    /// arg(a_L) - arg(a_R), wrapped to (-pi, pi].
    double relative_phase() const { return std::arg(a_L * std::conj(a_R)); }

    friend PolarizationQubit operator*(cplx s, const PolarizationQubit& q) { return {s * q.a_L, s * q.a_R}; }
    friend PolarizationQubit operator+(const PolarizationQubit& x, const PolarizationQubit& y)
    {
        return {x.a_L + y.a_L, x.a_R + y.a_R};
    }
};

/// <x|y>
inline cplx inner(const PolarizationQubit& x, const PolarizationQubit& y)
{
    return std::conj(x.a_L) * y.a_L + std::conj(x.a_R) * y.a_R;
}

/// Qubit from intensities and relative phase arg(a_L) - arg(a_R); a_R is kept real.
inline PolarizationQubit qubit_from_intensities(double intensity_L, double intensity_R, double relative_phase)
{
    if (intensity_L < 0.0 || intensity_R < 0.0) throw DomainError("qubit intensities must be non-negative");
    return {std::polar(std::sqrt(intensity_L), relative_phase), cplx{std::sqrt(intensity_R), 0.0}};
}

}  // namespace phaseonium
