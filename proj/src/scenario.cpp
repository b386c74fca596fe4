#include "phaseonium/scenario.hpp"

#include "phaseonium/analytic.hpp"

#include <openssl/evp.h>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace phaseonium {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) fail(where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!ok.count(key)) fail(where.empty() ? key : where + "." + key, "unknown field");
    }
}

std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double get_number(const json& obj, const std::string& where, const char* key, double fallback)
{
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(join(where, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(join(where, key), "must be finite");
    return x;
}

std::size_t get_count(const json& obj, const std::string& where, const char* key, std::size_t fallback)
{
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(join(where, key), "expected a non-negative integer");
    return v.get<std::size_t>();
}

double get_angle(const json& obj, const std::string& where, const char* key, double fallback)
{
    if (!obj.contains(key)) return fallback;
    return parse_angle(obj.at(key), join(where, key));
}

cplx get_complex(const json& v, const std::string& where)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    fail(where, "expected a number or [re, im]");
}

double parse_factor(const std::string& f, const std::string& where)
{
    if (f == "pi") return pi;
    std::string s = f;
    double scale = 1.0;
    if (s.size() > 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        scale = pi;
        s.erase(s.size() - 2);
    }
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        fail(where, "cannot parse angle term '" + f + "'");
    }
    if (used != s.size()) fail(where, "cannot parse angle term '" + f + "'");
    return x * scale;
}

double parse_product(const std::string& p, const std::string& where)
{
    if (p.empty()) fail(where, "empty angle expression");
    double x = 1.0;
    std::size_t start = 0;
    while (true) {
        const std::size_t star = p.find('*', start);
        x *= parse_factor(p.substr(start, star - start), where);
        if (star == std::string::npos) break;
        start = star + 1;
    }
    return x;
}

double peak_input_intensity(const PulseSpec& p) { return p.peak_rabi * p.peak_rabi * p.qubit.norm2(); }

std::array<double, 2> local_fractions(const FieldSummary& s)
{
    const double t = s.peak13 + s.peak23;
    if (t == 0.0) return {0.0, 0.0};
    return {s.peak13 / t, s.peak23 / t};
}

/// Profile positions z / L, aligned with the numeric z nodes.
std::vector<std::size_t> profile_nodes(const ScenarioConfig& c)
{
    const std::size_t p = std::max<std::size_t>(c.profile_points, 2);
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < p; ++k) {
        const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(c.grid.n_z) /
                                                             static_cast<double>(p - 1)));
        if (nodes.empty() || nodes.back() != n) nodes.push_back(n);
    }
    return nodes;
}

ProfileRow make_row(double alpha_z, const FieldSummary& f, const FieldSummary& b, double peak_in)
{
    const double s = peak_in > 0.0 ? 1.0 / peak_in : 0.0;
    return {alpha_z, f.peak13 * s, f.peak23 * s, b.peak13 * s, b.peak23 * s, f.relative_phase(), b.relative_phase()};
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", x);
    return buf;
}

}  // namespace

std::string to_string(Protocol p)
{
    switch (p) {
    case Protocol::filter: return "filter";
    case Protocol::sieve: return "sieve";
    case Protocol::splitter: return "splitter";
    case Protocol::memory: return "memory";
    case Protocol::custom: return "custom";
    }
    return "custom";
}

std::string to_string(Engine e)
{
    switch (e) {
    case Engine::analytic: return "analytic";
    case Engine::numeric: return "numeric";
    case Engine::both: return "both";
    }
    return "analytic";
}

Engine engine_from_string(const std::string& s)
{
    if (s == "analytic") return Engine::analytic;
    if (s == "numeric") return Engine::numeric;
    if (s == "both") return Engine::both;
    throw ConfigError("engine: expected analytic, numeric or both, got '" + s + "'");
}

double parse_angle(const json& v, const std::string& where)
{
    if (v.is_number()) {
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(where, "must be finite");
        return x;
    }
    if (!v.is_string()) fail(where, "expected a number or an expression such as \"pi/3\"");
    std::string s;
    for (char ch : v.get<std::string>())
        if (ch != ' ') s += ch;
    double sign = 1.0;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        if (s[0] == '-') sign = -1.0;
        s.erase(0, 1);
    }
    const std::size_t slash = s.find('/');
    if (slash == std::string::npos) return sign * parse_product(s, where);
    if (s.find('/', slash + 1) != std::string::npos) fail(where, "at most one '/' allowed");
    const double den = parse_product(s.substr(slash + 1), where);
    if (den == 0.0) fail(where, "division by zero");
    return sign * parse_product(s.substr(0, slash), where) / den;
}

double ScenarioConfig::resolved_span() const
{
    if (span) return *span;
    const double pulse_extent = pulse.spectral_extent(1e-13);
    switch (shape) {
    case ProfileShape::flat_top: return std::max(0.5 * width, pulse_extent);
    case ProfileShape::gaussian:
    case ProfileShape::lorentzian: return std::max(5.0 * width, pulse_extent);
    }
    return 5.0 * width;
}

InhomogeneousProfile ScenarioConfig::profile() const { return {shape, width, resolved_span()}; }

MediumSpec ScenarioConfig::medium() const { return {preparation, profile(), optical_depth}; }

ScenarioConfig parse_scenario(const json& j)
{
    check_keys(j, "", {"name", "protocol", "engine", "preparation", "profile", "pulse", "medium", "grid",
                       "analytic_grid", "output", "tolerance", "weak_field_tolerance"});
    ScenarioConfig c;
    if (j.contains("name")) {
        if (!j["name"].is_string()) fail("name", "expected a string");
        c.name = j["name"].get<std::string>();
    }
    if (j.contains("protocol")) {
        const json& v = j["protocol"];
        const std::string s = v.is_string() ? v.get<std::string>() : "";
        if (s == "filter") c.protocol = Protocol::filter;
        else if (s == "sieve") c.protocol = Protocol::sieve;
        else if (s == "splitter") c.protocol = Protocol::splitter;
        else if (s == "memory") c.protocol = Protocol::memory;
        else if (s == "custom") c.protocol = Protocol::custom;
        else fail("protocol", "expected filter, sieve, splitter, memory or custom");
    }
    if (j.contains("engine")) {
        if (!j["engine"].is_string()) fail("engine", "expected a string");
        c.engine = engine_from_string(j["engine"].get<std::string>());
    }

    if (j.contains("preparation")) {
        const json& p = j["preparation"];
        check_keys(p, "preparation", {"pop1", "phi12", "theta", "incoherent"});
        const double pop1 = get_number(p, "preparation", "pop1", 1.0);
        const double phi12 = get_angle(p, "preparation", "phi12", 0.0);
        const double theta = get_angle(p, "preparation", "theta", 0.0);
        bool incoherent = false;
        if (p.contains("incoherent")) {
            if (!p["incoherent"].is_boolean()) fail("preparation.incoherent", "expected true or false");
            incoherent = p["incoherent"].get<bool>();
        }
        try {
            c.preparation = make_phaseonium(pop1, phi12, theta, incoherent);
        } catch (const DomainError& e) {
            fail("preparation", e.what());
        }
    }

    if (j.contains("profile")) {
        const json& p = j["profile"];
        check_keys(p, "profile", {"shape", "width", "span"});
        if (p.contains("shape")) {
            if (!p["shape"].is_string()) fail("profile.shape", "expected a string");
            try {
                c.shape = profile_shape_from_string(p["shape"].get<std::string>());
            } catch (const ConfigError& e) {
                fail("profile.shape", e.what());
            }
            if (!p.contains("width") && c.shape != ProfileShape::flat_top) fail("profile.width", "required for this shape");
        }
        c.width = get_number(p, "profile", "width", c.width);
        if (p.contains("span") && !p["span"].is_null()) c.span = get_number(p, "profile", "span", 0.0);
    }

    if (j.contains("pulse")) {
        const json& p = j["pulse"];
        check_keys(p, "pulse", {"a_L", "a_R", "intensity_L", "intensity_R", "mixing_angle", "relative_phase",
                                "duration", "center", "peak_rabi"});
        const bool amplitudes = p.contains("a_L") || p.contains("a_R");
        const bool intensities = p.contains("intensity_L") || p.contains("intensity_R");
        const bool mixing = p.contains("mixing_angle");
        if (int(amplitudes) + int(intensities) + int(mixing) > 1)
            fail("pulse", "give the qubit as amplitudes, intensities or a mixing angle, not several");
        const double rel = get_angle(p, "pulse", "relative_phase", 0.0);
        if (amplitudes) {
            if (p.contains("relative_phase")) fail("pulse.relative_phase", "not used with explicit amplitudes");
            c.pulse.qubit.a_L = p.contains("a_L") ? get_complex(p["a_L"], "pulse.a_L") : cplx{};
            c.pulse.qubit.a_R = p.contains("a_R") ? get_complex(p["a_R"], "pulse.a_R") : cplx{};
        } else if (intensities) {
            const double il = get_number(p, "pulse", "intensity_L", 0.0);
            const double ir = get_number(p, "pulse", "intensity_R", 0.0);
            if (il < 0.0 || ir < 0.0) fail("pulse", "intensities must be non-negative");
            c.pulse.qubit = qubit_from_intensities(il, ir, rel);
        } else if (mixing) {
            const double chi = get_angle(p, "pulse", "mixing_angle", 0.0);
            c.pulse.qubit = {std::polar(std::cos(chi), rel), cplx{std::sin(chi), 0.0}};
        }
        if (std::abs(c.pulse.qubit.norm2() - 1.0) > 1e-9)
            fail("pulse", "qubit must be normalized (|a_L|^2 + |a_R|^2 = " + std::to_string(c.pulse.qubit.norm2()) + ")");
        c.pulse.duration = get_number(p, "pulse", "duration", c.pulse.duration);
        c.pulse.center = get_number(p, "pulse", "center", c.pulse.center);
        c.pulse.peak_rabi = get_number(p, "pulse", "peak_rabi", c.pulse.peak_rabi);
        if (!(c.pulse.duration > 0.0)) fail("pulse.duration", "must be positive");
        if (c.pulse.peak_rabi < 0.0) fail("pulse.peak_rabi", "must be non-negative");
    }

    if (j.contains("medium")) {
        const json& m = j["medium"];
        check_keys(m, "medium", {"optical_depth"});
        c.optical_depth = get_number(m, "medium", "optical_depth", c.optical_depth);
    }
    if (!(c.optical_depth > 0.0)) fail("medium.optical_depth", "must be positive");

    if (j.contains("grid")) {
        const json& g = j["grid"];
        check_keys(g, "grid", {"n_z", "n_t", "n_delta", "t_start", "t_end", "t_switch", "snapshot_stride"});
        c.grid.n_z = get_count(g, "grid", "n_z", c.grid.n_z);
        c.grid.n_t = get_count(g, "grid", "n_t", c.grid.n_t);
        c.grid.n_delta = get_count(g, "grid", "n_delta", c.grid.n_delta);
        c.grid.t_start = get_number(g, "grid", "t_start", c.grid.t_start);
        c.grid.t_end = get_number(g, "grid", "t_end", c.grid.t_end);
        c.grid.t_switch = get_number(g, "grid", "t_switch", c.grid.t_switch);
        c.grid.field_snapshot_stride = get_count(g, "grid", "snapshot_stride", 0);
    }
    if (j.contains("analytic_grid")) {
        const json& g = j["analytic_grid"];
        check_keys(g, "analytic_grid", {"n", "half_window"});
        c.analytic_grid.n = get_count(g, "analytic_grid", "n", c.analytic_grid.n);
        c.analytic_grid.half_window = get_number(g, "analytic_grid", "half_window", c.analytic_grid.half_window);
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, "output", {"dir", "profile_points"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) fail("output.dir", "expected a string");
            c.output_dir = o["dir"].get<std::string>();
        }
        c.profile_points = get_count(o, "output", "profile_points", c.profile_points);
        if (c.profile_points < 2) fail("output.profile_points", "must be at least 2");
    }
    c.tolerance = get_number(j, "", "tolerance", c.tolerance);
    c.weak_field_tolerance = get_number(j, "", "weak_field_tolerance", c.weak_field_tolerance);
    if (!(c.tolerance > 0.0)) fail("tolerance", "must be positive");
    if (!(c.weak_field_tolerance > 0.0)) fail("weak_field_tolerance", "must be positive");

    // Cross-module constraints.
    try {
        (void)c.profile();
    } catch (const ConfigError& e) {
        fail("profile", e.what());
    }
    try {
        c.grid.validate(c.profile());
    } catch (const Error& e) {
        fail("grid", e.what());
    }
    if (c.analytic_grid.n < 16 || c.analytic_grid.n % 2 != 0) fail("analytic_grid.n", "must be even and at least 16");
    if (!(c.analytic_grid.half_window > 0.0)) fail("analytic_grid.half_window", "must be positive");
    const double reach = std::abs(c.pulse.center - c.grid.t_switch) + 8.0 * c.pulse.duration;
    if (reach > c.analytic_grid.half_window)
        fail("analytic_grid.half_window", "window around t_switch must contain the pulse and its echo (need >= " +
                                              std::to_string(reach) + ")");
    if (c.pulse.center - 8.0 * c.pulse.duration < c.grid.t_start || c.pulse.center + 8.0 * c.pulse.duration > c.grid.t_switch)
        fail("pulse.center", "pulse must lie within [grid.t_start, grid.t_switch] with 8 durations of margin");
    if (c.grid.t_end - c.grid.t_switch < c.grid.t_switch - c.grid.t_start)
        fail("grid.t_end", "retrieval stage must be at least as long as the absorption stage");
    return c;
}

ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open configuration");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << path << ":" << line << ":" << col << ": syntax error";
        throw ConfigError(msg.str());
    }
    try {
        return parse_scenario(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

json to_json(const ScenarioConfig& c)
{
    json j;
    j["name"] = c.name;
    j["protocol"] = to_string(c.protocol);
    j["engine"] = to_string(c.engine);
    j["preparation"] = {{"pop1", c.preparation.pop1},
                        {"phi12", c.preparation.phi12},
                        {"theta", c.preparation.theta},
                        {"incoherent", c.preparation.incoherent}};
    j["profile"] = {{"shape", std::string(to_string(c.shape))}, {"width", c.width}, {"span", c.resolved_span()}};
    j["pulse"] = {{"a_L", {c.pulse.qubit.a_L.real(), c.pulse.qubit.a_L.imag()}},
                  {"a_R", {c.pulse.qubit.a_R.real(), c.pulse.qubit.a_R.imag()}},
                  {"duration", c.pulse.duration},
                  {"center", c.pulse.center},
                  {"peak_rabi", c.pulse.peak_rabi}};
    j["medium"] = {{"optical_depth", c.optical_depth}};
    j["grid"] = {{"n_z", c.grid.n_z},         {"n_t", c.grid.n_t},           {"n_delta", c.grid.n_delta},
                 {"t_start", c.grid.t_start}, {"t_end", c.grid.t_end},       {"t_switch", c.grid.t_switch},
                 {"snapshot_stride", c.grid.field_snapshot_stride}};
    j["analytic_grid"] = {{"n", c.analytic_grid.n}, {"half_window", c.analytic_grid.half_window}};
    j["output"] = {{"dir", c.output_dir}, {"profile_points", c.profile_points}};
    j["tolerance"] = c.tolerance;
    j["weak_field_tolerance"] = c.weak_field_tolerance;
    return j;
}

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4"}; }

ScenarioConfig preset(const std::string& name)
{
    ScenarioConfig c;
    c.name = name;
    c.pulse.qubit = qubit_from_intensities(0.9, 0.1, 0.0);
    c.optical_depth = 10.0;
    if (name == "fig2") {
        c.protocol = Protocol::splitter;
        c.engine = Engine::analytic;
        c.preparation = make_phaseonium(0.6, pi / 3.0, 0.0);
    } else if (name == "fig3" || name == "fig4") {
        c.protocol = Protocol::memory;
        c.engine = name == "fig3" ? Engine::analytic : Engine::numeric;
        c.preparation = make_phaseonium(0.5, 0.0, 3.0 * pi);
    } else {
        throw ConfigError("unknown preset '" + name + "' (available: fig2, fig3, fig4)");
    }
    c.output_dir = "out_" + name;
    return c;
}

EngineResult run_analytic(const ScenarioConfig& c)
{
    const auto t0 = Clock::now();
    if (!analytic_supported(c.preparation))
        throw WrongSolverError("closed forms need theta = 0, or a coherent preparation with sigma11 = sigma22 = 1/2");
    const TimeGrid tg = TimeGrid::centered(c.analytic_grid.n, c.analytic_grid.half_window, c.grid.t_switch);
    EngineResult r(tg);
    r.engine = "analytic";
    const SpectralMedium medium(c.medium(), tg);
    const TimeField input = sample_pulse(c.pulse, tg);
    const SpectralField spectrum = to_spectrum(input);
    const double peak_in = peak_input_intensity(c.pulse);
    const double e_in = input.energy();

    for (std::size_t node : profile_nodes(c)) {
        const double az = c.optical_depth * static_cast<double>(node) / static_cast<double>(c.grid.n_z);
        const TimeField f = to_time(propagate_forward(spectrum, medium, az));
        const TimeField b = to_time(retrieve_backward(spectrum, medium, az));
        const FieldSummary fs = summarize(f);
        const FieldSummary bs = summarize(b);
        r.rows.push_back(make_row(az, fs, bs, peak_in));
        if (node == c.grid.n_z) {
            r.transmitted_fraction = e_in > 0.0 ? fs.energy() / e_in : 0.0;
            r.forward_intensities = local_fractions(fs);
            r.forward_phase = fs.relative_phase();
        }
        if (node == 0) {
            r.retrieved_fraction = e_in > 0.0 ? bs.energy() / e_in : 0.0;
            r.backward_intensities = local_fractions(bs);
            r.backward_phase = bs.relative_phase();
            r.retrieved = b;
        }
    }
    if (e_in > 0.0) r.memory = memory_fidelity(c.pulse, r.retrieved, c.grid.t_switch);
    r.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

EngineResult run_numeric(const ScenarioConfig& c, const SimOptions& options)
{
    const auto t0 = Clock::now();
    const SimulationResult sim = run_simulation(c.pulse, c.medium(), c.grid, options);
    EngineResult r(sim.retrieval.time);
    r.engine = "numeric";
    const double peak_in = peak_input_intensity(c.pulse);
    for (std::size_t node : profile_nodes(c)) {
        const double az = c.optical_depth * sim.absorption.z[node];
        r.rows.push_back(make_row(az, sim.absorption.profile[node], sim.retrieval.profile[node], peak_in));
    }
    const FieldSummary& out_f = sim.absorption.profile.back();
    const FieldSummary& out_b = sim.retrieval.profile.front();
    r.transmitted_fraction = sim.absorption.diagnostics.output_fraction();
    r.retrieved_fraction = sim.retrieval.diagnostics.output_fraction();
    r.forward_intensities = local_fractions(out_f);
    r.backward_intensities = local_fractions(out_b);
    r.forward_phase = out_f.relative_phase();
    r.backward_phase = out_b.relative_phase();
    r.retrieved = sim.retrieval.output;
    if (sim.absorption.diagnostics.input_energy > 0.0) r.memory = memory_fidelity(c.pulse, r.retrieved, c.grid.t_switch);
    r.weak_field = check_weak_field(sim.absorption, sim.retrieval);
    r.energy_balance = r.transmitted_fraction + r.retrieved_fraction;
    for (const auto* rec : {&sim.absorption, &sim.retrieval})
        for (const std::string& w : rec->diagnostics.warnings) r.warnings.push_back(w);
    r.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

ValidationReport compare_engines(const ScenarioConfig& c, const std::optional<EngineResult>& analytic,
                                 const EngineResult& numeric)
{
    ValidationReport v;
    v.weak_field = numeric.weak_field.value_or(WeakFieldReport{});
    bool ok = true;
    if (v.weak_field.population_deviation > c.weak_field_tolerance) {
        ok = false;
        std::ostringstream m;
        m << "weak-field approximation violated: max population deviation " << v.weak_field.population_deviation
          << " exceeds " << c.weak_field_tolerance << "; lower pulse.peak_rabi";
        v.messages.push_back(m.str());
    }
    if (v.weak_field.coherence12_deviation > c.weak_field_tolerance) {
        ok = false;
        std::ostringstream m;
        m << "weak-field approximation violated: max |sigma12 - sigma12(0)| " << v.weak_field.coherence12_deviation
          << " exceeds " << c.weak_field_tolerance;
        v.messages.push_back(m.str());
    }

    if (!analytic) {
        v.analytic_available = false;
        v.messages.push_back(analytic_supported(c.preparation)
                                 ? "analytic engine not run; numeric-only report"
                                 : "closed forms do not cover this preparation; numeric-only report");
        v.passed = ok;
        return v;
    }
    if (analytic->rows.size() != numeric.rows.size()) throw Error("engine profiles are sampled differently");

    const std::array<const char*, 4> names{"I13_fwd", "I23_fwd", "I13_bwd", "I23_bwd"};
    auto column = [](const ProfileRow& r, std::size_t k) {
        switch (k) {
        case 0: return r.i13_fwd;
        case 1: return r.i23_fwd;
        case 2: return r.i13_bwd;
        default: return r.i23_bwd;
        }
    };
    for (std::size_t k = 0; k < 4; ++k) {
        double peak = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < analytic->rows.size(); ++i) {
            peak = std::max(peak, column(analytic->rows[i], k));
            worst = std::max(worst, std::abs(column(analytic->rows[i], k) - column(numeric.rows[i], k)));
        }
        // Columns that stay below 1e-3 of the input are judged on that scale.
        const double dev = worst / std::max(peak, 1e-3);
        if (dev > v.max_deviation || v.worst_column.empty()) {
            v.max_deviation = std::max(v.max_deviation, dev);
            if (dev >= v.max_deviation) v.worst_column = names[k];
        }
    }
    if (v.max_deviation > c.tolerance) {
        ok = false;
        std::ostringstream m;
        m << "intensity profiles differ by " << v.max_deviation << " of the column peak in " << v.worst_column
          << " (tolerance " << c.tolerance << ")";
        v.messages.push_back(m.str());
    }
    v.passed = ok;
    return v;
}

std::optional<ProtocolResult> protocol_prediction(const ScenarioConfig& c)
{
    if (!c.preparation.uniform()) return std::nullopt;
    const double depth = c.preparation.incoherent ? c.optical_depth : std::numeric_limits<double>::infinity();
    return splitter(c.pulse.qubit, c.preparation, depth);
}

SweepParameter sweep_parameter_from_string(const std::string& s)
{
    if (s == "optical_depth") return SweepParameter::optical_depth;
    if (s == "theta") return SweepParameter::theta;
    if (s == "phi12") return SweepParameter::phi12;
    if (s == "mixing_angle") return SweepParameter::mixing_angle;
    throw ConfigError("sweep parameter must be optical_depth, theta, phi12 or mixing_angle, got '" + s + "'");
}

std::string to_string(SweepParameter p)
{
    switch (p) {
    case SweepParameter::optical_depth: return "optical_depth";
    case SweepParameter::theta: return "theta";
    case SweepParameter::phi12: return "phi12";
    case SweepParameter::mixing_angle: return "mixing_angle";
    }
    return "?";
}

ScenarioConfig with_parameter(ScenarioConfig c, SweepParameter p, double value)
{
    switch (p) {
    case SweepParameter::optical_depth:
        if (!(value > 0.0)) throw ConfigError("optical_depth values must be positive");
        c.optical_depth = value;
        break;
    case SweepParameter::theta: c.preparation.theta = value; break;
    case SweepParameter::phi12: c.preparation.phi12 = value; break;
    case SweepParameter::mixing_angle: {
        const double rel = c.pulse.qubit.norm2() > 0.0 ? c.pulse.qubit.relative_phase() : 0.0;
        c.pulse.qubit = {std::polar(std::cos(value), rel), cplx{std::sin(value), 0.0}};
        break;
    }
    }
    return c;
}

void write_profile_table(const std::string& path, const ScenarioConfig& c, const EngineResult& r)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    os << "# phaseonium z-profile, scenario=" << c.name << ", engine=" << r.engine << '\n';
    os << "# alpha_z: optical distance (line-centre alpha times z); I*: peak |Omega|^2 over the input total peak "
          "intensity; phases in rad\n";
    os << "# alpha_z\tI13_fwd\tI23_fwd\tI13_bwd\tI23_bwd\tphase13_minus_phase23\tphase13_minus_phase23_bwd\n";
    for (const ProfileRow& row : r.rows) {
        os << fmt(row.alpha_z) << '\t' << fmt(row.i13_fwd) << '\t' << fmt(row.i23_fwd) << '\t' << fmt(row.i13_bwd)
           << '\t' << fmt(row.i23_bwd) << '\t' << fmt(row.phase_fwd) << '\t' << fmt(row.phase_bwd) << '\n';
    }
}

void write_sweep_table(const std::string& path, const ScenarioConfig& c, SweepParameter p,
                       const std::vector<SweepRow>& rows)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    os << "# phaseonium sweep, scenario=" << c.name << ", parameter=" << to_string(p) << '\n';
    os << "# fractions are energies over the input energy; p_* from the large-depth protocol layer (nan if "
          "undefined)\n";
    os << "# " << to_string(p) << "\ttransmitted_fraction\tretrieved_fraction\tefficiency\tfidelity\tp_forward\tp_backward\n";
    for (const SweepRow& r : rows) {
        os << fmt(r.value) << '\t' << fmt(r.transmitted_fraction) << '\t' << fmt(r.retrieved_fraction) << '\t'
           << fmt(r.efficiency) << '\t' << fmt(r.fidelity) << '\t' << fmt(r.p_forward) << '\t' << fmt(r.p_backward)
           << '\n';
    }
}

json summary_json(const ScenarioConfig& c, const std::vector<const EngineResult*>& results,
                  const std::optional<ValidationReport>& validation)
{
    json j;
    j["scenario"] = c.name;
    j["protocol"] = to_string(c.protocol);
    for (const EngineResult* r : results) {
        json e;
        e["transmitted_fraction"] = r->transmitted_fraction;
        e["retrieved_fraction"] = r->retrieved_fraction;
        e["forward_intensities_at_L"] = {r->forward_intensities[0], r->forward_intensities[1]};
        e["backward_intensities_at_0"] = {r->backward_intensities[0], r->backward_intensities[1]};
        e["forward_relative_phase"] = r->forward_phase;
        e["backward_relative_phase"] = r->backward_phase;
        e["efficiency"] = r->memory.efficiency;
        e["fidelity"] = r->memory.fidelity;
        e["mode_overlap"] = r->memory.mode_overlap;
        if (r->weak_field) {
            e["max_population_deviation"] = r->weak_field->population_deviation;
            e["max_coherence12_deviation"] = r->weak_field->coherence12_deviation;
            e["energy_balance"] = r->energy_balance;
        }
        if (!r->warnings.empty()) e["warnings"] = r->warnings;
        j["engines"][r->engine] = e;
    }
    if (const auto pred = protocol_prediction(c)) {
        j["protocol_prediction"] = {{"p_forward", pred->p_forward},
                                    {"p_backward", pred->p_backward},
                                    {"forward_state", {{"a_L", {pred->forward_state.a_L.real(), pred->forward_state.a_L.imag()}},
                                                       {"a_R", {pred->forward_state.a_R.real(), pred->forward_state.a_R.imag()}}}},
                                    {"backward_state", {{"a_L", {pred->backward_state.a_L.real(), pred->backward_state.a_L.imag()}},
                                                        {"a_R", {pred->backward_state.a_R.real(), pred->backward_state.a_R.imag()}}}},
                                    {"fidelity", pred->fidelity},
                                    {"decoupled", pred->decoupled}};
    }
    if (validation) {
        json v;
        v["analytic_available"] = validation->analytic_available;
        v["max_profile_deviation"] = validation->max_deviation;
        v["worst_column"] = validation->worst_column;
        v["tolerance"] = c.tolerance;
        v["max_population_deviation"] = validation->weak_field.population_deviation;
        v["max_coherence12_deviation"] = validation->weak_field.coherence12_deviation;
        v["weak_field_tolerance"] = c.weak_field_tolerance;
        v["passed"] = validation->passed;
        v["messages"] = validation->messages;
        j["validation"] = v;
    }
    return j;
}

std::string sha256_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char h[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(h, sizeof h, "%02x", md[i]);
        hex += h;
    }
    return hex;
}

json manifest_json(const ScenarioConfig& c, const std::string& verb,
                   const std::vector<std::pair<std::string, double>>& timings, const std::vector<OutputFile>& files)
{
    json j;
    j["tool"] = "phaseonium";
    j["version"] = version_string;
    j["engine_versions"] = {{"analytic", version_string}, {"numeric", version_string}};
    j["verb"] = verb;
    j["threads"] = omp_get_max_threads();
    j["config"] = to_json(c);
    json t = json::object();
    for (const auto& [k, v] : timings) t[k] = v;
    j["timings_seconds"] = t;
    json f = json::array();
    for (const OutputFile& o : files) f.push_back({{"path", o.path}, {"sha256", o.sha256}});
    j["files"] = f;
    return j;
}

void write_json(const std::string& path, const json& j)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    os << j.dump(2) << '\n';
}

}  // namespace phaseonium
