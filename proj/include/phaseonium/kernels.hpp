#pragma once

#include "phaseonium/common.hpp"
#include "phaseonium/medium.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace phaseonium {

/// Quadrature resolution for the principal-value integrals. Panels are at
/// most `panel_fraction` times the profile width (or the support for flat-top),
/// with `order` Gauss-Legendre points each.
struct KernelQuadrature {
    double panel_fraction = 0.25;
    std::size_t order = 24;
};

/// H(w) = pi G(-w) + i PV int G(D) / (w + D) dD.
///
/// This is the half-line time integral int_0^inf exp(i(w + D) t) dt taken as
/// pi delta(w + D) + i PV 1/(w + D) and folded with G.
cplx kernel_H(const InhomogeneousProfile& profile, double omega, const KernelQuadrature& q = {});

/// F(w) = pi G(-w) + i PV int G(-D) / (w - D) dD (mirror labelling of the
/// switched atoms). Equal to H(w) for symmetric profiles.
cplx kernel_F(const InhomogeneousProfile& profile, double omega, const KernelQuadrature& q = {});

/// J(w) = 2 pi G(-w); the two-sided time integral is a delta function.
cplx kernel_J(const InhomogeneousProfile& profile, double omega);

/// Coupling eta such that Re alpha(0) L = optical depth, with L = 1.
double coupling_eta(const MediumSpec& medium);

/// alpha(w) = eta H(w). The real part is the amplitude absorption rate; the
/// imaginary part carries the dispersion of the inhomogeneous line.
cplx absorption_coefficient(const MediumSpec& medium, double omega, const KernelQuadrature& q = {});

struct KernelTable {
    std::vector<double> omega;
    std::vector<cplx> H;
    std::vector<cplx> F;
    std::vector<cplx> J;
    std::vector<cplx> alpha;
    double eta = 0.0;
};

/// Tabulates all kernels on `omega` (parallel over frequencies). Every
/// frequency must lie within the profile span.
KernelTable tabulate_kernels(const MediumSpec& medium, std::span<const double> omega, const KernelQuadrature& q = {});

/// Columns: omega ReH ImH ReF ImF ReJ ImJ.
void write_kernel_table(std::ostream& os, const KernelTable& table);

}  // namespace phaseonium
