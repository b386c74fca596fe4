#pragma once

#include "phaseonium/common.hpp"
#include "phaseonium/medium.hpp"
#include "phaseonium/qubit.hpp"
#include "phaseonium/spectral.hpp"

#include <limits>

namespace phaseonium {

/// S is absorbed and re-emitted backward; A passes the medium unchanged.
struct NormalModePair {
    PolarizationQubit symmetric;
    PolarizationQubit antisymmetric;
};

/// S = (c1, c2), A = (c2*, -c1*) with c1 = sqrt(sigma11) e^{i phi12}, c2 = sqrt(sigma22).
NormalModePair normal_modes(const PhaseoniumPreparation& prep);

struct ChannelOutput {
    PolarizationQubit state;  // subnormalized
    double probability = 0.0;
    /// Incoherent preparation: each component was treated as a two-level line.
    bool decoupled = false;
};

/// Forward output <A|psi> A in the large-depth limit. Incoherent
/// preparations give per-component Beer-Lambert attenuation at `optical_depth`.
ChannelOutput filter_output(const PolarizationQubit& input, const PhaseoniumPreparation& prep,
                            double optical_depth = std::numeric_limits<double>::infinity());

/// Backward output -<S|psi> S in the large-depth limit.
ChannelOutput sieve_output(const PolarizationQubit& input, const PhaseoniumPreparation& prep,
                           double optical_depth = std::numeric_limits<double>::infinity());

struct ProtocolResult {
    PolarizationQubit forward_state;
    PolarizationQubit backward_state;
    double p_forward = 0.0;
    double p_backward = 0.0;
    double efficiency = 0.0;  // backward probability
    double fidelity = 0.0;    // backward state against the input; 0 when nothing is retrieved
    bool decoupled = false;
};

/// Filter and sieve together. For coherent preparations checks that the
/// probabilities sum to one and that the two outputs are orthogonal.
ProtocolResult splitter(const PolarizationQubit& input, const PhaseoniumPreparation& prep,
                        double optical_depth = std::numeric_limits<double>::infinity());

struct MemoryMetrics {
    double efficiency = 0.0;
    double fidelity = 0.0;     // undefined (0) when nothing is retrieved
    double mode_overlap = 0.0;  // fraction of the retrieved energy in the time-reversed input mode
    PolarizationQubit retrieved;  // mode-matched amplitudes divided by the input peak Rabi frequency
};

/// |<a|b>|^2 / (|a|^2 |b|^2); zero when either is zero.
double qubit_fidelity(const PolarizationQubit& a, const PolarizationQubit& b);

/// Efficiency and fidelity of a retrieved field at the output surface. The
/// retrieved qubit is the projection onto the input envelope mirrored about
/// `t_switch`; its global sign does not enter the fidelity.
MemoryMetrics memory_fidelity(const PulseSpec& input, const TimeField& retrieved, double t_switch);
MemoryMetrics memory_fidelity(const PulseSpec& input, const SpectralField& retrieved);

}  // namespace phaseonium
