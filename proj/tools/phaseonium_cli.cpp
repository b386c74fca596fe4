// phaseonium: scenario runner for phaseonium splitter and memory studies.
//
//   phaseonium run      --preset fig2 --out out_fig2
//   phaseonium validate --config scenario.json --tolerance 0.02
//   phaseonium sweep    --preset fig3 --param optical_depth --values 5,10,20,40
//   phaseonium presets  [--out DIR]
//
// Exit codes: 0 success, 1 validation failure, 2 configuration error, 3 engine error.

#include "phaseonium/analytic.hpp"
#include "phaseonium/scenario.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace phaseonium;

namespace {

struct Options {
    std::string config;
    std::string preset;
    std::string engine;
    std::string out;
    int threads = 0;
    std::optional<double> tolerance;
    std::string param;
    std::string values;
};

enum Exit { ok = 0, validation_failed = 1, config_error = 2, engine_error = 3 };

ScenarioConfig resolve(const Options& o)
{
    if (o.config.empty() == o.preset.empty()) throw ConfigError("give exactly one of --config or --preset");
    ScenarioConfig c = o.config.empty() ? preset(o.preset) : load_scenario(o.config);
    if (!o.engine.empty()) c.engine = engine_from_string(o.engine);
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.tolerance) {
        if (!(*o.tolerance > 0.0)) throw ConfigError("--tolerance must be positive");
        c.tolerance = *o.tolerance;
    }
    return c;
}

class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }
    void add(const std::string& name) { files_.push_back({name, sha256_file(path(name))}); }
    const std::vector<OutputFile>& files() const { return files_; }

private:
    std::string dir_;
    std::vector<OutputFile> files_;
};

void report(const EngineResult& r)
{
    std::cout << r.engine << ": transmitted " << r.transmitted_fraction << ", retrieved " << r.retrieved_fraction
              << ", fidelity " << r.memory.fidelity << " (" << r.wall_seconds << " s)\n";
    for (const auto& w : r.warnings) std::cout << "  warning: " << w << '\n';
}

int finish(const ScenarioConfig& c, const std::string& verb, Outputs& out, const std::vector<const EngineResult*>& results,
           const std::optional<ValidationReport>& validation, std::vector<std::pair<std::string, double>> timings)
{
    write_json(out.path("summary.json"), summary_json(c, results, validation));
    out.add("summary.json");
    write_json(out.path("manifest.json"), manifest_json(c, verb, timings, out.files()));
    if (validation) {
        for (const auto& m : validation->messages) std::cout << "  " << m << '\n';
        std::cout << (validation->passed ? "validation passed" : "validation FAILED") << " (max deviation "
                  << validation->max_deviation << ", tolerance " << c.tolerance << ")\n";
        if (!validation->passed) return validation_failed;
    }
    return ok;
}

int run(const Options& o, bool validate)
{
    ScenarioConfig c = resolve(o);
    if (validate) c.engine = Engine::both;
    Outputs out(c.output_dir);
    std::vector<std::pair<std::string, double>> timings;
    std::optional<EngineResult> analytic, numeric;

    if (c.engine != Engine::numeric) {
        if (c.engine == Engine::analytic || analytic_supported(c.preparation)) {
            analytic = run_analytic(c);
        } else {
            std::cout << "notice: closed forms need theta = 0, or a coherent preparation with sigma11 = sigma22 = "
                         "1/2; running the numeric engine only\n";
        }
    }
    if (c.engine != Engine::analytic) numeric = run_numeric(c);

    std::vector<const EngineResult*> results;
    for (auto* r : {&analytic, &numeric}) {
        if (!*r) continue;
        report(**r);
        const std::string name = "profile_" + (*r)->engine + ".tsv";
        write_profile_table(out.path(name), c, **r);
        out.add(name);
        results.push_back(&**r);
        timings.emplace_back((*r)->engine, (*r)->wall_seconds);
    }

    std::optional<ValidationReport> validation;
    if (numeric) validation = compare_engines(c, analytic, *numeric);
    return finish(c, validate ? "validate" : "run", out, results, validation, timings);
}

std::vector<double> parse_values(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(parse_angle(nlohmann::json(item), "--values"));
    if (v.empty()) throw ConfigError("--values: give a comma separated list");
    return v;
}

SweepRow sweep_row(const ScenarioConfig& c, double value, const EngineResult& r)
{
    SweepRow row;
    row.value = value;
    row.transmitted_fraction = r.transmitted_fraction;
    row.retrieved_fraction = r.retrieved_fraction;
    row.efficiency = r.memory.efficiency;
    row.fidelity = r.memory.fidelity;
    row.p_forward = row.p_backward = std::numeric_limits<double>::quiet_NaN();
    if (const auto p = protocol_prediction(c)) {
        row.p_forward = p->p_forward;
        row.p_backward = p->p_backward;
    }
    return row;
}

int sweep(const Options& o)
{
    const ScenarioConfig base = resolve(o);
    if (o.param.empty()) throw ConfigError("sweep needs --param");
    const SweepParameter p = sweep_parameter_from_string(o.param);
    const std::vector<double> values = parse_values(o.values);
    Outputs out(base.output_dir);

    std::vector<Engine> engines;
    if (base.engine != Engine::numeric) engines.push_back(Engine::analytic);
    if (base.engine != Engine::analytic) engines.push_back(Engine::numeric);

    std::vector<std::pair<std::string, double>> timings;
    nlohmann::json rows_json;
    for (Engine e : engines) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<SweepRow> rows;
        for (double v : values) {
            const ScenarioConfig c = with_parameter(base, p, v);
            const EngineResult r = e == Engine::analytic ? run_analytic(c) : run_numeric(c);
            rows.push_back(sweep_row(c, v, r));
            std::cout << to_string(p) << " = " << v << ": ";
            report(r);
        }
        const std::string name = "sweep_" + to_string(e) + ".tsv";
        write_sweep_table(out.path(name), base, p, rows);
        out.add(name);
        for (const SweepRow& r : rows) {
            rows_json[to_string(e)].push_back({{"value", r.value},
                                               {"transmitted_fraction", r.transmitted_fraction},
                                               {"retrieved_fraction", r.retrieved_fraction},
                                               {"efficiency", r.efficiency},
                                               {"fidelity", r.fidelity},
                                               {"p_forward", r.p_forward},
                                               {"p_backward", r.p_backward}});
        }
        timings.emplace_back(to_string(e), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    nlohmann::json summary{{"scenario", base.name}, {"parameter", to_string(p)}, {"rows", rows_json}};
    write_json(out.path("summary.json"), summary);
    out.add("summary.json");
    nlohmann::json manifest = manifest_json(base, "sweep", timings, out.files());
    manifest["sweep"] = {{"parameter", to_string(p)}, {"values", values}};
    write_json(out.path("manifest.json"), manifest);
    return ok;
}

int presets(const Options& o)
{
    for (const std::string& name : preset_names()) {
        std::cout << name << '\n';
        if (!o.out.empty()) {
            fs::create_directories(o.out);
            write_json((fs::path(o.out) / (name + ".json")).string(), to_json(preset(name)));
        }
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Phaseonium polarization splitter and quantum memory scenarios"};
    app.set_version_flag("--version", std::string(version_string));
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config, "Scenario file (JSON)");
        cmd->add_option("--preset", o.preset, "Built-in scenario: fig2, fig3, fig4");
        cmd->add_option("--engine", o.engine, "analytic, numeric or both")
            ->check(CLI::IsMember({"analytic", "numeric", "both"}));
        cmd->add_option("--out", o.out, "Output directory");
        cmd->add_option("--threads", o.threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
        cmd->add_option("--tolerance", o.tolerance, "Profile agreement tolerance, fraction of peak");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "Run the configured engines and write tables");
    CLI::App* validate_cmd = app.add_subcommand("validate", "Compare the analytic and numeric engines");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Scan one parameter");
    CLI::App* presets_cmd = app.add_subcommand("presets", "List presets; with --out, write them as JSON");
    common(run_cmd);
    common(validate_cmd);
    common(sweep_cmd);
    sweep_cmd->add_option("--param", o.param, "optical_depth, theta, phi12 or mixing_angle")->required();
    sweep_cmd->add_option("--values", o.values, "Comma separated values; angles may use pi")->required();
    presets_cmd->add_option("--out", o.out, "Directory for the preset files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (o.threads > 0) omp_set_num_threads(o.threads);
        if (*run_cmd) return run(o, false);
        if (*validate_cmd) return run(o, true);
        if (*sweep_cmd) return sweep(o);
        return presets(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const Error& e) {
        std::cerr << "engine error: " << e.what() << '\n';
        return engine_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return engine_error;
    }
}
