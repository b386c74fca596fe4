#pragma once

#include "phaseonium/common.hpp"
#include "phaseonium/kernels.hpp"
#include "phaseonium/medium.hpp"
#include "phaseonium/spectral.hpp"

#include <array>
#include <vector>

namespace phaseonium {

/// 2x2 complex matrix acting on (Omega_13, Omega_23).
struct Mat2 {
    cplx m11{}, m12{}, m21{}, m22{};

    std::array<cplx, 2> apply(cplx x13, cplx x23) const { return {m11 * x13 + m12 * x23, m21 * x13 + m22 * x23}; }
    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

Mat2 operator*(const Mat2& a, const Mat2& b);

/// sinh(K x) / K, switching to a 4-term Taylor series when |K| < small_k.
cplx sinhc(cplx K, double x, double small_k);

// Per-frequency transfer matrices. `alpha_L`, `etaF_L`, ... are the
// dimensionless products of the kernels with eta L; `z` is z / L.

/// Uniform preparation, forward stage. Pure preparations use the closed form
/// I - (1 - e^{-alpha z}) M; incoherent ones exponentiate the diagonal M.
Mat2 uniform_forward_matrix(const PhaseoniumPreparation& prep, cplx alpha_L, double z);

/// Uniform preparation, backward field at z produced from the time-reversed
/// input spectrum Omega_in(0, -w). Equals (J/(F+H-)) (e^{-(F+H-)(1-z)} - 1) M
/// at z = 0; inside the medium it carries the extra e^{-H- z} attenuation of
/// the stored excitation.
Mat2 uniform_backward_matrix(const PhaseoniumPreparation& prep, cplx etaF_L, cplx etaHm_L, cplx etaJ_L, double z);

/// Longitudinal phaseonium (sigma11 = sigma22 = 1/2, phi12(z) = theta z).
/// `small_k` is the |K| below which the series branch is used.
Mat2 longitudinal_forward_matrix(cplx alpha_L, double theta, double z, double small_k);
Mat2 longitudinal_backward_matrix(cplx etaF_L, cplx etaHm_L, cplx etaJ_L, double theta, double z, double small_k);

/// Gauge diag(e^{i phi/2}, e^{-i phi/2}) moving a constant phi12 offset onto the fields.
Mat2 conjugate_by_phase(const Mat2& m, double phi12);

/// Kernels sampled on the frequencies of a time grid. Frequencies beyond the
/// profile span are inactive: input spectra must vanish there.
class SpectralMedium {
public:
    SpectralMedium(MediumSpec medium, TimeGrid grid, KernelQuadrature q = {});

    const MediumSpec& medium() const { return medium_; }
    const TimeGrid& grid() const { return grid_; }
    double eta() const { return table_.eta; }

    bool active(std::size_t k) const { return slot_[k] >= 0; }
    cplx H(std::size_t k) const { return table_.H[static_cast<std::size_t>(slot_[k])]; }
    cplx F(std::size_t k) const { return table_.F[static_cast<std::size_t>(slot_[k])]; }
    cplx J(std::size_t k) const { return table_.J[static_cast<std::size_t>(slot_[k])]; }
    cplx alpha(std::size_t k) const { return table_.alpha[static_cast<std::size_t>(slot_[k])]; }
    const KernelTable& table() const { return table_; }

    /// Relative |K| threshold for the series branch.
    double small_k() const { return 1e-6 * medium_.optical_depth; }

private:
    MediumSpec medium_;
    TimeGrid grid_;
    std::vector<long> slot_;
    KernelTable table_;
};

/// Forward field at optical distance alpha_z (uniform preparation).
SpectralField propagate_forward_uniform(const SpectralField& input, const SpectralMedium& medium, double alpha_z);

/// Backward retrieved field at optical distance alpha_z (0 = output surface)
/// after the switch at the grid's t_ref, uniform preparation.
SpectralField retrieve_backward_uniform(const SpectralField& input, const SpectralMedium& medium,
                                        double alpha_z = 0.0);

/// Forward field in a longitudinally phase-graded medium (sigma11 = sigma22).
SpectralField propagate_forward_longitudinal(const SpectralField& input, const SpectralMedium& medium, double alpha_z);

/// Backward retrieved field in a longitudinally phase-graded medium.
SpectralField retrieve_backward_longitudinal(const SpectralField& input, const SpectralMedium& medium,
                                             double alpha_z = 0.0);

/// Dispatch on the preparation: uniform when theta = 0, longitudinal otherwise.
SpectralField propagate_forward(const SpectralField& input, const SpectralMedium& medium, double alpha_z);
SpectralField retrieve_backward(const SpectralField& input, const SpectralMedium& medium, double alpha_z = 0.0);

/// True when the closed forms cover this preparation.
bool analytic_supported(const PhaseoniumPreparation& prep);

// Large-depth limits.

/// Normalized forward intensities at z = L for alpha L -> inf: (sigma22, sigma11).
std::array<double, 2> forward_limit_intensities(const PhaseoniumPreparation& prep);
/// Normalized backward intensities at z = 0 for alpha L -> inf: (sigma11, sigma22).
std::array<double, 2> backward_limit_intensities(const PhaseoniumPreparation& prep);
/// Retrieved spectrum of the longitudinal memory for alpha L -> inf: -Omega_in(0, -w).
SpectralField memory_limit(const SpectralField& input);

}  // namespace phaseonium
