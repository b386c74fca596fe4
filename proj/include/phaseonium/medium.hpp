#pragma once

#include "phaseonium/common.hpp"

#include <string_view>
#include <vector>

namespace phaseonium {

/// Ground-state preparation of the Lambda medium. The excited level starts
/// empty, so pop1 + pop2 = 1. A pure (phaseonium) preparation carries
/// |sigma12| = sqrt(pop1 pop2); the incoherent flag zeroes it.
///
/// The coherence phase may vary linearly along the medium:
/// phi12(z) = phi12 + theta * z / L.
struct PhaseoniumPreparation {
    double pop1 = 1.0;
    double pop2 = 0.0;
    double phi12 = 0.0;
    double theta = 0.0;
    bool incoherent = false;

    double coherence_magnitude() const;
    bool uniform() const { return theta == 0.0; }
};

PhaseoniumPreparation make_phaseonium(double pop1, double phi12, double theta, bool incoherent = false);

/// sigma12 at the fractional position z/L.
cplx coherence_at(const PhaseoniumPreparation& prep, double z_over_L);

enum class ProfileShape { gaussian, lorentzian, flat_top };

std::string_view to_string(ProfileShape shape);
ProfileShape profile_shape_from_string(std::string_view name);

/// Symmetric inhomogeneous detuning distribution G(Delta), normalized to unit
/// area over [-span, span].
///
/// `width` is the standard deviation for gaussian, the HWHM for lorentzian
/// (truncated at +-span), and the full width of the support for flat_top.
class InhomogeneousProfile {
public:
    InhomogeneousProfile(ProfileShape shape, double width, double span);

    /// Flat-top whose full width is `factor` times the spectral intensity
    /// FWHM of a Gaussian pulse with amplitude rms duration `duration`.
    static InhomogeneousProfile default_flat_top(double duration = 1.0, double factor = 20.0);

    ProfileShape shape() const { return shape_; }
    double width() const { return width_; }
    double span() const { return span_; }

    /// G(Delta); zero outside [-span, span] (and outside the flat-top support).
    double density(double delta) const;

    /// Outermost detuning where G can be non-zero.
    double support() const;

    /// Detunings where G is not smooth (flat-top edges), inside (-span, span).
    std::vector<double> breakpoints() const;

    /// Closed-form int Delta^2 G dDelta over the span.
    double second_moment() const;

private:
    ProfileShape shape_;
    double width_;
    double span_;
    double norm_;  // 1 / (area of the unnormalized shape over the span)
};

/// Quadrature rule sum_j w_j f(Delta_j) ~ int G(Delta) f(Delta) dDelta.
/// Nodes are sorted, symmetric, and node j pairs with node n-1-j.
struct DetuningGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    std::size_t mirror(std::size_t j) const { return nodes.size() - 1 - j; }
};

/// Gauss-Legendre over the span for smooth shapes; uniform trapezoid over the
/// support for flat-top. `n` must be even and >= 2.
DetuningGrid sample_profile(const InhomogeneousProfile& profile, std::size_t n);

/// Atomic medium of normalized length L = 1. Positions are reported as
/// optical distance alpha z where alpha is the line-center amplitude
/// absorption coefficient fixed by `optical_depth`.
struct MediumSpec {
    PhaseoniumPreparation preparation;
    InhomogeneousProfile profile;
    double optical_depth;

    MediumSpec(PhaseoniumPreparation prep, InhomogeneousProfile prof, double od);
};

}  // namespace phaseonium
