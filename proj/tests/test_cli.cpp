#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "hystersolve/cli.hpp"
#include "hystersolve/config.hpp"
#include "hystersolve/csv.hpp"

using namespace hyst;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path configs{HYST_CONFIG_DIR};

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("hystersolve_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p;
}

std::size_t distinct_steps(const CsvTable& t) {
    const auto steps = t.column_values("step");
    std::size_t n = 0;
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (i == 0 || steps[i] != steps[i - 1]) ++n;
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run writes the outputs") {
    for (const std::string name : {"steady", "ramp"}) {
        CAPTURE(name);
        TempDir dir("run_" + name);
        const auto cfg = parse_config((configs / (name + ".cfg")).string());
        std::ostringstream out, err;
        const int code = cmd_run((configs / (name + ".cfg")).string(), {false, dir.path.string()}, out, err);
        CHECK(code == exit_code::ok);
        CHECK(err.str().empty());

        const auto diag = read_csv((dir.path / "diagnostics.csv").string());
        CHECK(diag.rows.size() == cfg.steps);
        CHECK(diag.header.size() == 10);
        const auto fields = read_csv((dir.path / "fields.csv").string());
        CHECK(distinct_steps(fields) == (cfg.steps + cfg.stride - 1) / cfg.stride + 1);
        CHECK(fields.rows.size() == distinct_steps(fields) * cfg.nodes);

        std::ifstream js(dir.path / "summary.json");
        const auto summary = json::parse(js);
        CHECK(summary["schema_version"] == 1);
        CHECK(summary["exit_code"] == 0);
        CHECK(summary["steps"] == cfg.steps);
        CHECK(fs::exists(dir.path / "estimates.csv"));
    }
}

TEST_CASE("run rejects broken configs") {
    TempDir dir("bad");
    std::ostringstream out, err;
    const auto bad = write_text(dir.path / "bad.cfg", "mesh.nodes = 11\nmesh.nodez = 3\n");
    CHECK(cmd_run(bad.string(), {}, out, err) == exit_code::config_failure);
    CHECK(err.str().find("bad.cfg:2:") != std::string::npos);

    const auto gamma = write_text(dir.path / "gamma.cfg", "laws.gamma.left = 0\nlaws.gamma.right = 0\n");
    CHECK(cmd_run(gamma.string(), {}, out, err) == exit_code::config_failure);
    CHECK(err.str().find("hy2") != std::string::npos);
}

TEST_CASE("incompatible initial data") {
    TempDir dir("compat");
    auto cfg = parse_config((configs / "quadratic.cfg").string());
    std::ostringstream out, err;
    CHECK(cmd_check_compat((configs / "quadratic.cfg").string(), out, err) == exit_code::ok);
    const auto ok = json::parse(out.str());
    CHECK(ok["passed"] == true);
    CHECK(ok["items"].size() >= 5);

    cfg.lambda.kind = MemorySpec::Kind::virgin;
    cfg.output_directory = (dir.path / "out").string();
    const auto p = write_text(dir.path / "virgin.cfg", write_config(cfg));
    out.str("");
    CHECK(cmd_check_compat(p.string(), out, err) == exit_code::estimate_failure);
    CHECK(json::parse(out.str())["passed"] == false);
    CHECK(cmd_run(p.string(), {}, out, err) == exit_code::config_failure);
    CHECK_FALSE(fs::exists(dir.path / "out" / "summary.json"));
}

TEST_CASE("refine") {
    TempDir dir("refine");
    auto cfg = parse_config((configs / "ramp.cfg").string());
    cfg.nodes = 21;
    cfg.steps = 20;
    const auto p = write_text(dir.path / "r.cfg", write_config(cfg));
    std::ostringstream out, err;
    CHECK(cmd_refine(p.string(), 3, {false, dir.path.string()}, out, err) == exit_code::ok);
    const auto j = json::parse(out.str());
    REQUIRE(j["levels"].size() == 3);
    CHECK(j["levels"][1]["steps"] == 40);
    CHECK(read_csv((dir.path / "refinement.csv").string()).rows.size() == 3);
}

TEST_CASE("norms") {
    TempDir dir("norms");
    std::ostringstream ones;
    ones << "t,value\n";
    for (int i = 0; i <= 10; ++i) ones << 0.1 * i << ",1\n";
    const auto one = write_text(dir.path / "one.csv", ones.str());
    std::ostringstream out, err;
    REQUIRE(cmd_norms(one.string(), {"luxemburg:power=2", "luxemburg:power=3.5"}, out, err) == exit_code::ok);
    auto j = json::parse(out.str());
    CHECK(j["norms"]["luxemburg:power=2"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j["norms"]["luxemburg:power=3.5"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

    const double T = 2.0;
    std::ostringstream ell;
    ell << "t,value\n";
    for (int i = 0; i <= 100; ++i) {
        const double t = T * i / 100.0;
        ell << format_double(t) << ',' << format_double(std::sqrt(2.0 / T) * std::sin(std::numbers::pi * t / T)) << '\n';
    }
    const auto e = write_text(dir.path / "ell.csv", ell.str());
    out.str("");
    REQUIRE(cmd_norms(e.string(), {"H", "Vstar"}, out, err) == exit_code::ok);
    j = json::parse(out.str());
    CHECK(j["norms"]["H"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j["norms"]["Vstar"].get<double>() == doctest::Approx(T / std::numbers::pi).epsilon(1e-10));

    std::ostringstream xt;
    xt << "x,t,value\n";
    for (int i = 0; i <= 20; ++i)
        for (int k = 0; k <= 4; ++k)
            xt << format_double(0.25 * k) << "," << format_double(0.05 * i) << ","
               << format_double(std::sqrt(2.0) * std::sin(std::numbers::pi * 0.05 * i)) << "\n";
    const auto g = write_text(dir.path / "xt.csv", xt.str());
    out.str("");
    REQUIRE(cmd_norms(g.string(), {"X", "Y"}, out, err) == exit_code::ok);
    j = json::parse(out.str());
    CHECK(j["norms"]["X"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j["norms"]["Y"].get<double>() == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-10));

    CHECK(cmd_norms(one.string(), {"bogus"}, out, err) == exit_code::config_failure);
    CHECK(cmd_norms(one.string(), {"X"}, out, err) == exit_code::config_failure);
    CHECK(cmd_norms(g.string(), {"H"}, out, err) == exit_code::config_failure);
    const auto empty = write_text(dir.path / "empty.csv", "t,value\n");
    err.str("");
    CHECK(cmd_norms(empty.string(), {"H"}, out, err) == exit_code::config_failure);
    CHECK(err.str().find("empty") != std::string::npos);
}

}  // TEST_SUITE
