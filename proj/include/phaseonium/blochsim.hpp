#pragma once

#include "phaseonium/common.hpp"
#include "phaseonium/ensemble.hpp"
#include "phaseonium/medium.hpp"
#include "phaseonium/spectral.hpp"

#include <string>
#include <vector>

namespace phaseonium {

/// Discretization of the Maxwell-Bloch run. Lengths are in units of L,
/// times in pulse durations. Vacuum transit times are neglected, so the
/// retarded and advanced frames coincide with lab time.
struct SimGrid {
    std::size_t n_z = 400;
    std::size_t n_t = 4096;
    std::size_t n_delta = 1024;
    double t_start = -16.0;
    double t_end = 16.0;
    double t_switch = 0.0;
    /// Keep full envelopes at every k-th z node (0: only the two faces).
    std::size_t field_snapshot_stride = 0;

    double dz() const { return 1.0 / static_cast<double>(n_z); }
    double dt() const { return (t_end - t_start) / static_cast<double>(n_t); }
    /// Centred grid covering [t_start, t_end).
    TimeGrid time_grid() const;
    std::size_t switch_index() const;

    /// Throws ConfigError for malformed grids and ResolutionError when dt
    /// gives fewer than 20 samples per period of the largest detuning.
    void validate(const InhomogeneousProfile& profile) const;
};

enum class KernelChoice { blocked, serial };

/// Density matrix of every (z node, detuning class). Optical coherences are
/// kept for both propagation directions; the stage integrates the active pair.
class AtomicState {
public:
    AtomicState(const MediumSpec& medium, const DetuningGrid& classes, std::size_t z_nodes);

    std::size_t nodes() const { return nodes_; }
    std::size_t classes() const { return detuning.size(); }
    std::size_t index(std::size_t node, std::size_t j) const { return node * classes() + j; }

    cplx sigma12(std::size_t node, std::size_t j) const;
    cplx sigma13(Direction d, std::size_t node, std::size_t j) const;
    cplx sigma23(Direction d, std::size_t node, std::size_t j) const;

    /// Views of one node with the coherences of `active`.
    ClassArrays view(std::size_t node);

    std::vector<double> detuning;
    std::vector<double> weight;
    std::vector<double> p11, p22, p33, x12, y12;
    std::vector<double> x13f, y13f, x23f, y23f;
    std::vector<double> x13b, y13b, x23b, y23b;
    Direction active = Direction::forward;
    /// Prepared state per node, for the weak-field diagnostics.
    std::vector<PreparedState> prepared;
    double input_energy = 0.0;

private:
    std::size_t nodes_;
};

/// Flips every detuning and exchanges forward and backward optical
/// coherences. Populations and sigma12 are untouched. Applying it twice
/// restores the original state.
AtomicState apply_crib_switch(const AtomicState& state);

struct FieldSnapshot {
    std::size_t node = 0;
    double z = 0.0;  // z / L
    std::vector<cplx> comp13;  // stage samples, t_i for i in [i0, i1]
    std::vector<cplx> comp23;
};

struct SimDiagnostics {
    double population_deviation = 0.0;
    double coherence12_deviation = 0.0;
    double invariant_violation = 0.0;
    double input_energy = 0.0;
    double output_energy = 0.0;  // transmitted (forward) or retrieved (backward)
    double stored_energy = 0.0;  // left in the atoms at the end of the stage
    std::vector<std::string> warnings;

    double output_fraction() const { return input_energy > 0.0 ? output_energy / input_energy : 0.0; }
    double stored_fraction() const { return input_energy > 0.0 ? stored_energy / input_energy : 0.0; }
};

struct SimulationRecord {
    SimulationRecord(AtomicState s, const SimGrid& g);

    Direction stage = Direction::forward;
    SimGrid grid;
    TimeGrid time;
    std::size_t first_index = 0;  // stage covers t_i for i in [first_index, last_index]
    std::size_t last_index = 0;
    std::vector<double> z;                // node positions z / L
    std::vector<FieldSummary> profile;    // the stage's field at every node
    TimeField output;                     // z = L (forward) or z = 0 (backward), zero outside the stage
    std::vector<FieldSnapshot> snapshots;
    AtomicState state;
    SimDiagnostics diagnostics;
    double wall_seconds = 0.0;
};

struct SimOptions {
    KernelChoice kernel = KernelChoice::blocked;
    /// Invariant violation that aborts the run.
    double instability_threshold = 1e-2;
};

/// Forward stage from t_start to t_switch with the pulse entering at z = 0.
SimulationRecord run_absorption_stage(const PulseSpec& pulse, const MediumSpec& medium, const SimGrid& grid,
                                      const SimOptions& options = {});

/// Backward stage from t_switch to the end of the window, marching from
/// z = L (where the backward field vanishes) to z = 0.
SimulationRecord run_retrieval_stage(const AtomicState& switched, const MediumSpec& medium, const SimGrid& grid,
                                     const SimOptions& options = {});

struct WeakFieldReport {
    double population_deviation = 0.0;
    double coherence12_deviation = 0.0;
};

WeakFieldReport check_weak_field(const SimulationRecord& record);
WeakFieldReport check_weak_field(const SimulationRecord& absorption, const SimulationRecord& retrieval);

struct SimulationResult {
    SimulationRecord absorption;
    SimulationRecord retrieval;
};

/// Absorption, switch and retrieval.
SimulationResult run_simulation(const PulseSpec& pulse, const MediumSpec& medium, const SimGrid& grid,
                                const SimOptions& options = {});

}  // namespace phaseonium
