#pragma once

#include "phaseonium/common.hpp"

#include <cstddef>
#include <vector>

namespace phaseonium {

/// Density-matrix elements of a set of detuning classes at one z node, as
/// structure-of-arrays views. Coherences are split into re/im arrays; the
/// optical coherences are those of the currently active direction.
struct ClassArrays {
    double* p11;
    double* p22;
    double* p33;
    double* x12;
    double* y12;
    double* x13;
    double* y13;
    double* x23;
    double* y23;
    const double* delta;   // detuning of each class (after any switch)
    const double* weight;  // quadrature weight of each class
    std::size_t n;
};

/// Field samples driving one z slice: values at t_i for i in [0, steps] and
/// at the midpoints t_i + dt/2 for i in [0, steps).
struct SliceDrive {
    const cplx* field13;
    const cplx* field23;
    const cplx* mid13;
    const cplx* mid23;
    std::size_t steps;
    double dt;
};

/// Reference values of the prepared state for the weak-field diagnostics.
struct PreparedState {
    double p11 = 1.0;
    double p22 = 0.0;
    cplx s12{};
};

struct SliceDiagnostics {
    double population_deviation = 0.0;  // max |sigma_ii - sigma_ii(0)|
    double coherence12_deviation = 0.0;  // max |sigma12 - sigma12(0)|
    double invariant_violation = 0.0;    // trace, bounds and Cauchy-Schwarz excess
    bool finite = true;

    void merge(const SliceDiagnostics& o);
};

/// Polarization sums P_mu3(t_i) = sum_j w_j sigma_mu3,j(t_i) for i in [0, steps].
struct SlicePolarization {
    std::vector<cplx> p13;
    std::vector<cplx> p23;
};

/// Advances every class through the slice with an integrating-factor RK4
/// step (the detuning rotation of the optical coherences is exact).
/// Single-threaded, one class at a time; kept as the reference for the
/// blocked kernel.
SliceDiagnostics evolve_classes_serial(const ClassArrays& a, const SliceDrive& drive, const PreparedState& ref,
                                       SlicePolarization& out);

/// Same scheme, vectorized over fixed blocks of classes and parallel over
/// blocks. Block partial sums are reduced in block order, so the result does
/// not depend on the thread count.
SliceDiagnostics evolve_classes_blocked(const ClassArrays& a, const SliceDrive& drive, const PreparedState& ref,
                                        SlicePolarization& out);

inline constexpr std::size_t class_block_size = 64;

}  // namespace phaseonium
