#pragma once

#include "phaseonium/blochsim.hpp"
#include "phaseonium/medium.hpp"
#include "phaseonium/protocols.hpp"
#include "phaseonium/spectral.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace phaseonium {

inline constexpr const char* version_string = "1.0.0";

enum class Protocol { filter, sieve, splitter, memory, custom };
enum class Engine { analytic, numeric, both };

std::string to_string(Protocol p);
std::string to_string(Engine e);
Engine engine_from_string(const std::string& s);

struct AnalyticGrid {
    std::size_t n = 8192;
    double half_window = 32.0;  // around t_switch
};

/// Declarative description of one run. Angles in the file may be numbers or
/// strings such as "pi/3" or "3*pi".
struct ScenarioConfig {
    std::string name = "custom";
    Protocol protocol = Protocol::custom;
    Engine engine = Engine::analytic;

    PhaseoniumPreparation preparation;
    ProfileShape shape = ProfileShape::flat_top;
    double width = InhomogeneousProfile::default_flat_top().width();
    std::optional<double> span;  // derived from the shape and the pulse when absent
    PulseSpec pulse;
    double optical_depth = 10.0;

    SimGrid grid;
    AnalyticGrid analytic_grid;
    std::size_t profile_points = 101;
    double tolerance = 0.02;
    double weak_field_tolerance = 1e-6;
    std::string output_dir = "out";

    double resolved_span() const;
    InhomogeneousProfile profile() const;
    MediumSpec medium() const;
};

/// Throws ConfigError naming the offending field ("preparation.pop1: ...").
ScenarioConfig parse_scenario(const nlohmann::json& j);
/// Reads a file; syntax errors report line and column.
ScenarioConfig load_scenario(const std::string& path);
/// Fully resolved configuration; parse_scenario(to_json(c)) reproduces c.
nlohmann::json to_json(const ScenarioConfig& c);

double parse_angle(const nlohmann::json& v, const std::string& where);

std::vector<std::string> preset_names();
ScenarioConfig preset(const std::string& name);

struct ProfileRow {
    double alpha_z = 0.0;
    double i13_fwd = 0.0;  // peak |Omega|^2 over the input total peak intensity
    double i23_fwd = 0.0;
    double i13_bwd = 0.0;
    double i23_bwd = 0.0;
    double phase_fwd = 0.0;  // arg Omega_13 - arg Omega_23, intensity weighted
    double phase_bwd = 0.0;
};

struct EngineResult {
    std::string engine;
    std::vector<ProfileRow> rows;
    double transmitted_fraction = 0.0;  // forward energy at z = L over input energy
    double retrieved_fraction = 0.0;    // backward energy at z = 0 over input energy
    std::array<double, 2> forward_intensities{};   // local fractions I_mu / (I_13 + I_23) at z = L
    std::array<double, 2> backward_intensities{};  // same at z = 0
    double forward_phase = 0.0;
    double backward_phase = 0.0;
    MemoryMetrics memory;
    TimeField retrieved;  // backward field at z = 0
    std::optional<WeakFieldReport> weak_field;
    double energy_balance = 0.0;  // (transmitted + retrieved) / input, numeric only
    std::vector<std::string> warnings;
    std::string notice;
    double wall_seconds = 0.0;

    explicit EngineResult(TimeGrid g) : retrieved(g) {}
};

EngineResult run_analytic(const ScenarioConfig& c);
EngineResult run_numeric(const ScenarioConfig& c, const SimOptions& options = {});

struct ValidationReport {
    bool analytic_available = true;
    double max_deviation = 0.0;  // largest profile deviation relative to the column peak
    std::string worst_column;
    WeakFieldReport weak_field;
    bool passed = false;
    std::vector<std::string> messages;
};

ValidationReport compare_engines(const ScenarioConfig& c, const std::optional<EngineResult>& analytic,
                                 const EngineResult& numeric);

/// Large-depth protocol predictions; empty when the preparation has no normal modes.
std::optional<ProtocolResult> protocol_prediction(const ScenarioConfig& c);

enum class SweepParameter { optical_depth, theta, phi12, mixing_angle };
SweepParameter sweep_parameter_from_string(const std::string& s);
std::string to_string(SweepParameter p);
ScenarioConfig with_parameter(ScenarioConfig c, SweepParameter p, double value);

struct SweepRow {
    double value = 0.0;
    double transmitted_fraction = 0.0;
    double retrieved_fraction = 0.0;
    double efficiency = 0.0;
    double fidelity = 0.0;
    double p_forward = 0.0;   // protocol layer; NaN when undefined
    double p_backward = 0.0;
};

// Output writers. Tables use a commented header; numbers are printed with a
// fixed format so identical runs give identical bytes.
void write_profile_table(const std::string& path, const ScenarioConfig& c, const EngineResult& r);
void write_sweep_table(const std::string& path, const ScenarioConfig& c, SweepParameter p,
                       const std::vector<SweepRow>& rows);
nlohmann::json summary_json(const ScenarioConfig& c, const std::vector<const EngineResult*>& results,
                            const std::optional<ValidationReport>& validation);

std::string sha256_file(const std::string& path);

struct OutputFile {
    std::string path;
    std::string sha256;
};

/// Configuration echo, versions, timings and checksums of the written files.
nlohmann::json manifest_json(const ScenarioConfig& c, const std::string& verb,
                             const std::vector<std::pair<std::string, double>>& timings,
                             const std::vector<OutputFile>& files);

/// Writes JSON with two-space indent and a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace phaseonium
