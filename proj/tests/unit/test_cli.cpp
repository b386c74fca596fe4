#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path work{PHASEONIUM_WORK_DIR};
const fs::path golden{PHASEONIUM_GOLDEN_DIR};

int cli(const std::string& args)
{
    fs::create_directories(work);
    const std::string cmd = std::string("\"") + PHASEONIUM_CLI + "\" " + args + " >> \"" +
                            (work / "cli.log").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<double>> table(const fs::path& p)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(read(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        rows.push_back(row);
    }
    return rows;
}

// Columns 5 and 6 are phases; intensities are compared relative to the column peak.
void compare_tables(const fs::path& got, const fs::path& want, double tol_intensity, double tol_phase)
{
    const auto a = table(got), b = table(want);
    REQUIRE(a.size() == b.size());
    REQUIRE_FALSE(a.empty());
    const std::size_t cols = b[0].size();
    for (std::size_t k = 0; k < cols; ++k) {
        double peak = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            REQUIRE(a[i].size() == cols);
            peak = std::max(peak, std::abs(b[i][k]));
            const double d = a[i][k] - b[i][k];
            worst = std::max(worst, k >= 5 ? std::abs(std::remainder(d, 2.0 * M_PI)) : std::abs(d));
        }
        CAPTURE(got.string());
        CAPTURE(k);
        if (k == 0) CHECK(worst == 0.0);
        else if (k >= 5) CHECK(worst < tol_phase);
        else CHECK(worst <= tol_intensity * std::max(peak, 1e-300));
    }
}

void compare_summaries(const fs::path& got, const fs::path& want, double tol)
{
    const json a = json::parse(read(got)), b = json::parse(read(want));
    for (const auto& [engine, metrics] : b["engines"].items()) {
        for (const auto& [key, value] : metrics.items()) {
            if (!value.is_number()) continue;
            CAPTURE(engine);
            CAPTURE(key);
            const double w = value.get<double>(), g = a["engines"][engine][key].get<double>();
            CHECK(std::abs(g - w) <= tol * std::max(1.0, std::abs(w)));
        }
    }
    CHECK(a.contains("validation") == b.contains("validation"));
    if (b.contains("validation")) CHECK(a["validation"]["passed"] == b["validation"]["passed"]);
}

}  // namespace

TEST_CASE("exit codes")
{
    CHECK(cli("presets") == 0);
    CHECK(cli("") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("run --preset fig9 --out " + (work / "x").string()) == 2);
    CHECK(cli("run --config " + (work / "absent.json").string()) == 2);
    CHECK(cli("sweep --preset fig2 --param width --values 1,2") == 2);

    const fs::path bad = work / "bad.json";
    std::ofstream(bad) << "{\"medium\": {\"optical_depth\": -1}}";
    CHECK(cli("run --config " + bad.string()) == 2);

    // closed forms requested outside their domain
    const fs::path graded = work / "graded.json";
    std::ofstream(graded) << R"({"engine": "analytic", "preparation": {"pop1": 0.7, "theta": "pi"}})";
    CHECK(cli("run --config " + graded.string() + " --out " + (work / "graded").string()) == 3);

    // strong probe: the weak-field diagnostics fail validation
    const fs::path strong = work / "strong.json";
    std::ofstream(strong) << R"({"preparation": {"pop1": 0.6, "phi12": "pi/3"},
        "profile": {"shape": "flat_top", "width": 8, "span": 8},
        "pulse": {"intensity_L": 0.9, "intensity_R": 0.1, "peak_rabi": 0.3},
        "medium": {"optical_depth": 4},
        "grid": {"n_z": 50, "n_t": 1024, "n_delta": 64}})";
    CHECK(cli("validate --config " + strong.string() + " --out " + (work / "strong").string()) == 1);
    const json s = json::parse(read(work / "strong" / "summary.json"));
    CHECK(s["validation"]["passed"] == false);
}

TEST_CASE("preset files re-parse to the same run")
{
    REQUIRE(cli("presets --out " + (work / "presets").string()) == 0);
    for (const char* name : {"fig2", "fig3", "fig4"}) CHECK(fs::exists(work / "presets" / (std::string(name) + ".json")));
    REQUIRE(cli("run --config " + (work / "presets" / "fig2.json").string() + " --out " + (work / "fig2_cfg").string()) ==
            0);
    REQUIRE(cli("run --preset fig2 --out " + (work / "fig2_preset").string()) == 0);
    CHECK(read(work / "fig2_cfg" / "profile_analytic.tsv") == read(work / "fig2_preset" / "profile_analytic.tsv"));
}

TEST_CASE("golden fig2 and fig3")
{
    for (const char* name : {"fig2", "fig3"}) {
        const fs::path out = work / (std::string("golden_") + name);
        REQUIRE(cli(std::string("run --preset ") + name + " --out " + out.string()) == 0);
        compare_tables(out / "profile_analytic.tsv", golden / name / "profile_analytic.tsv", 1e-9, 1e-8);
        compare_summaries(out / "summary.json", golden / name / "summary.json", 1e-9);
    }
}

TEST_CASE("golden fig4 and repeatability")
{
    const fs::path a = work / "fig4_a", b = work / "fig4_b";
    REQUIRE(cli("run --preset fig4 --out " + a.string()) == 0);
    compare_tables(a / "profile_numeric.tsv", golden / "fig4" / "profile_numeric.tsv", 1e-7, 1e-6);
    compare_summaries(a / "summary.json", golden / "fig4" / "summary.json", 1e-7);

    REQUIRE(cli("run --preset fig4 --threads 2 --out " + b.string()) == 0);
    CHECK(read(a / "profile_numeric.tsv") == read(b / "profile_numeric.tsv"));
    CHECK(read(a / "summary.json") == read(b / "summary.json"));

    const json m = json::parse(read(a / "manifest.json"));
    CHECK(m["verb"] == "run");
    CHECK(m["config"]["name"] == "fig4");
    bool listed = false;
    for (const json& f : m["files"]) listed = listed || f["path"] == "profile_numeric.tsv";
    CHECK(listed);
    CHECK(m["files"] == json::parse(read(b / "manifest.json"))["files"]);
}

TEST_CASE("sweep output")
{
    const fs::path out = work / "sweep_theta";
    REQUIRE(cli("sweep --preset fig3 --param theta --values 0,pi,3pi,10pi --out " + out.string()) == 0);
    const auto rows = table(out / "sweep_analytic.tsv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[2][0] == doctest::Approx(3.0 * M_PI));
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][1] < rows[i - 1][1]);
    const json s = json::parse(read(out / "summary.json"));
    CHECK(s["rows"]["analytic"].size() == 4);
    CHECK(json::parse(read(out / "manifest.json"))["sweep"]["parameter"] == "theta");
}
