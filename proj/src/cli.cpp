#include "hystersolve/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "hystersolve/config.hpp"
#include "hystersolve/csv.hpp"
#include "hystersolve/diagnostics.hpp"
#include "hystersolve/errors.hpp"
#include "hystersolve/function_spaces.hpp"

namespace hyst {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json to_json(const CompatReport& rep) {
    json items = json::array();
    for (const auto& it : rep.items)
        items.push_back({{"name", it.name},
                         {"status", std::string(to_string(it.status))},
                         {"measured", it.measured},
                         {"bound", it.bound},
                         {"detail", it.detail}});
    return {{"passed", !rep.failed()}, {"L", rep.L},           {"items", items},
            {"x", rep.x},             {"divergence", rep.divergence}, {"r0", rep.r0}};
}

json to_json(const std::vector<EstimateReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        json j{{"name", r.name},
               {"measured", r.measured},
               {"status", std::string(to_string(r.status))},
               {"context", r.context},
               {"detail", r.detail}};
        j["bound"] = r.bound ? json(*r.bound) : json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

json config_echo(const SimulationConfig& cfg) {
    json j = json::object();
    std::istringstream in(write_config(cfg));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

struct Loaded {
    SimulationConfig cfg;
    Scenario scenario;
};

// Parses and builds the scenario; prints the error and returns nullopt on failure.
std::optional<Loaded> load(const std::string& path, std::ostream& err) {
    try {
        auto cfg = parse_config(path);
        auto sc = make_scenario(cfg);
        return Loaded{std::move(cfg), std::move(sc)};
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    }
    return std::nullopt;
}

std::filesystem::path output_dir(const SimulationConfig& cfg, const CliOptions& opts) {
    std::filesystem::path dir(opts.out_dir ? *opts.out_dir : cfg.output_directory);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write " + p.string());
    os << content;
}

bool near_uniform(const std::vector<double>& g) {
    if (g.size() < 2) return false;
    const double h = (g.back() - g.front()) / static_cast<double>(g.size() - 1);
    if (!(h > 0.0)) return false;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g[i] - (g.front() + h * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::abs(g.back())))
            return false;
    return true;
}

std::optional<YoungFunction> young_by_name(const std::string& name) {
    const std::string prefix = "luxemburg:";
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const auto rest = name.substr(prefix.size());
    if (rest == "philog") return YoungFunction::philog();
    if (rest == "orlicz-log") return YoungFunction::orlicz_log();
    if (rest == "exp") return YoungFunction::exp_minus_linear();
    if (rest.rfind("power=", 0) == 0) {
        std::size_t used = 0;
        const double p = std::stod(rest.substr(6), &used);
        if (used != rest.size() - 6) throw Error("bad exponent in '" + name + "'");
        return YoungFunction::power(p);
    }
    return std::nullopt;
}

}  // namespace

RefinementStudy run_refinement(const Scenario& base, int levels) {
    if (levels < 2) throw Error("a refinement study needs at least 2 levels");
    std::vector<std::future<Trajectory>> jobs;
    for (int l = 0; l < levels; ++l) {
        Scenario sc = base;
        sc.steps = base.steps << l;
        jobs.push_back(std::async(std::launch::async, [sc] { return run_simulation(sc); }));
    }
    std::vector<Trajectory> trajs;
    for (auto& j : jobs) trajs.push_back(j.get());

    const auto sigma = TimeProfile::sine_squared(base.final_time);
    const std::vector<double> theta(base.mesh.nodes(), 1.0);
    RefinementStudy study;
    for (int l = 0; l < levels; ++l) {
        const auto& t = trajs[static_cast<std::size_t>(l)];
        RefinementLevel lv;
        lv.steps = t.scenario.steps;
        lv.tau = t.scenario.tau();
        lv.philog_sum = philog_increment_sum(t);
        lv.energy = energy_sum(t);
        const auto gap = interpolant_gap(t);
        lv.gap_u = gap.gap_u;
        lv.alpha = gap.alpha;
        lv.weak_residual = weak_residual(t, sigma, theta);
        if (l + 1 < levels) {
            const auto& fine = trajs[static_cast<std::size_t>(l + 1)];
            const auto& uc = t.states.back().u;
            const auto& uf = fine.states.back().u;
            for (std::size_t k = 0; k < uc.size(); ++k)
                lv.final_sup_diff = std::max(lv.final_sup_diff, std::abs(uc[k] - uf[k]));
            const Interpolants hat{&t, Interpolants::Mode::hat, Interpolants::Field::u};
            std::vector<std::vector<double>> diff(fine.states.size(), std::vector<double>(uc.size()));
            for (std::size_t i = 0; i < fine.states.size(); ++i)
                for (std::size_t k = 0; k < uc.size(); ++k)
                    diff[i][k] = interpolant_eval(hat, k, fine.scenario.time(i)) - fine.states[i].u[k];
            lv.Y_diff = space_time_norms(diff, base.mesh, base.final_time).Y;
        }
        study.levels.push_back(lv);
    }
    for (int l = 0; l + 2 < levels; ++l) {
        const auto& a = study.levels[static_cast<std::size_t>(l)];
        const auto& b = study.levels[static_cast<std::size_t>(l + 1)];
        study.sup_orders.push_back(std::log2(a.final_sup_diff / b.final_sup_diff));
        study.Y_orders.push_back(std::log2(a.Y_diff / b.Y_diff));
    }
    return study;
}

int cmd_run(const std::string& config_path, const CliOptions& opts, std::ostream& out, std::ostream& err) {
    auto loaded = load(config_path, err);
    if (!loaded) return exit_code::config_failure;
    const auto& cfg = loaded->cfg;
    const auto& sc = loaded->scenario;

    CompatReport compat;
    try {
        compat = check_initial_compatibility(sc);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::config_failure;
    }
    if (compat.failed()) {
        for (const auto& it : compat.items)
            if (it.status == Status::fail) err << "hy1: " << it.name << " failed: " << it.detail << '\n';
        if (!opts.force) return exit_code::config_failure;
        err << "continuing because of --force\n";
    }

    std::vector<std::vector<double>> snapshots;
    std::size_t seen = 0;
    const auto xs = sc.mesh.coordinates();
    const auto collect = [&](const StepState& st) {
        const std::size_t i = seen++;
        if (i % cfg.stride != 0 && i != sc.steps) return;
        for (std::size_t k = 0; k < xs.size(); ++k)
            snapshots.push_back({static_cast<double>(i), st.time, xs[k], st.u[k], st.s[k]});
    };

    Trajectory traj;
    try {
        traj = run_simulation(sc, collect);
    } catch (const StepFailure& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::step_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::step_failure;
    }
    const auto reports = run_estimate_suite(traj);
    const int code = any_failed(reports) ? exit_code::estimate_failure : exit_code::ok;

    const auto dir = output_dir(cfg, opts);
    {
        std::vector<std::vector<double>> rows;
        for (const auto& r : traj.rows)
            rows.push_back({static_cast<double>(r.step), r.time, r.max_abs_u, r.mass_residual, r.energy_grad,
                            r.energy_boundary, r.psi_total, r.philog_increment, static_cast<double>(r.solver_iters),
                            r.solver_residual});
        std::ofstream os(dir / "diagnostics.csv", std::ios::binary);
        write_csv(os,
                  {"step", "time", "max_abs_u", "mass_residual", "energy_grad", "energy_boundary", "psi_total",
                   "philog_increment", "solver_iters", "solver_residual"},
                  rows);
    }
    {
        std::ofstream os(dir / "fields.csv", std::ios::binary);
        write_csv(os, {"step", "time", "x", "u", "s"}, snapshots);
    }
    if (cfg.write_memory) {
        const auto& mem = traj.states.back().memory;
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < mem.nodes(); ++k)
            for (std::size_t j = 0; j < mem.thresholds(); ++j) rows.push_back({xs[k], sc.op.grid.r(j), mem(k, j)});
        std::ofstream os(dir / "memory.csv", std::ios::binary);
        write_csv(os, {"x", "r", "xi"}, rows);
    }
    const json summary{{"schema_version", kSchemaVersion},
                       {"exit_code", code},
                       {"steps", sc.steps},
                       {"compatibility", to_json(compat)},
                       {"estimates", to_json(reports)},
                       {"config", config_echo(cfg)}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    {
        std::string csv = "name,measured,bound,status\n";
        for (const auto& r : reports)
            csv += r.name + "," + format_double(r.measured) + "," + (r.bound ? format_double(*r.bound) : "") + "," +
                   std::string(to_string(r.status)) + "\n";
        write_file(dir / "estimates.csv", csv);
    }

    for (const auto& r : reports) {
        out << to_string(r.status) << "  " << r.name << " = " << r.measured;
        if (r.bound) out << "  (bound " << *r.bound << ")";
        out << '\n';
    }
    out << "wrote " << (dir / "summary.json").string() << '\n';
    return code;
}

int cmd_refine(const std::string& config_path, int levels, const CliOptions& opts, std::ostream& out,
               std::ostream& err) {
    auto loaded = load(config_path, err);
    if (!loaded) return exit_code::config_failure;
    if (levels < 2) {
        err << "error: --levels must be at least 2\n";
        return exit_code::config_failure;
    }
    RefinementStudy study;
    try {
        study = run_refinement(loaded->scenario, levels);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::step_failure;
    }

    bool y_monotone = true, philog_uniform = true;
    const auto& lv = study.levels;
    for (std::size_t l = 0; l + 2 < lv.size(); ++l) y_monotone = y_monotone && lv[l + 1].Y_diff <= lv[l].Y_diff;
    for (const auto& l : lv) philog_uniform = philog_uniform && l.philog_sum <= 3.0 * lv.front().philog_sum + 1e-300;

    json jl = json::array();
    std::vector<std::vector<double>> rows;
    for (std::size_t l = 0; l < lv.size(); ++l) {
        const auto& v = lv[l];
        jl.push_back({{"steps", v.steps},
                      {"tau", v.tau},
                      {"philog_sum", v.philog_sum},
                      {"energy", v.energy},
                      {"gap_u", v.gap_u},
                      {"alpha", v.alpha},
                      {"weak_residual", v.weak_residual},
                      {"final_sup_diff", v.final_sup_diff},
                      {"Y_diff", v.Y_diff}});
        rows.push_back({static_cast<double>(l), static_cast<double>(v.steps), v.tau, v.philog_sum, v.energy, v.gap_u,
                        v.alpha, v.weak_residual, v.final_sup_diff, v.Y_diff});
    }
    const json report{{"schema_version", kSchemaVersion}, {"levels", jl},
                      {"sup_orders", study.sup_orders},    {"Y_orders", study.Y_orders},
                      {"Y_monotone", y_monotone},          {"philog_uniform", philog_uniform}};
    const auto dir = output_dir(loaded->cfg, opts);
    {
        std::ofstream os(dir / "refinement.csv", std::ios::binary);
        write_csv(os,
                  {"level", "steps", "tau", "philog_sum", "energy", "gap_u", "alpha", "weak_residual",
                   "final_sup_diff", "Y_diff"},
                  rows);
    }
    write_file(dir / "refinement.json", report.dump(2) + "\n");
    out << report.dump(2) << '\n';
    return y_monotone && philog_uniform ? exit_code::ok : exit_code::estimate_failure;
}

int cmd_check_compat(const std::string& config_path, std::ostream& out, std::ostream& err) {
    auto loaded = load(config_path, err);
    if (!loaded) return exit_code::config_failure;
    CompatReport rep;
    try {
        rep = check_initial_compatibility(loaded->scenario);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::config_failure;
    }
    json j = to_json(rep);
    j["schema_version"] = kSchemaVersion;
    out << j.dump(2) << '\n';
    return rep.failed() ? 2 : exit_code::ok;
}

int cmd_norms(const std::string& csv_path, const std::vector<std::string>& names, std::ostream& out,
              std::ostream& err) {
    try {
        if (names.empty()) throw Error("no norm requested");
        const auto tab = read_csv(csv_path);
        if (tab.rows.empty()) throw Error("empty sample set");
        json result = json::object();
        const bool grid2d = tab.header.size() == 3;
        if (!grid2d && tab.header.size() != 2)
            throw Error("expected columns (coordinate, value) or (x, t, value)");

        for (const auto& name : names) {
            const bool spacetime = name == "X" || name == "Y";
            if (spacetime != grid2d)
                throw Error("grid mismatch: norm " + name + " needs " +
                            (spacetime ? "columns x, t, value" : "two columns (coordinate, value)"));
            if (spacetime) {
                const auto cx = tab.column("x"), ct = tab.column("t"), cv = tab.column("value");
                std::vector<double> xs, ts;
                for (const auto& r : tab.rows) {
                    xs.push_back(r[cx]);
                    ts.push_back(r[ct]);
                }
                for (auto* g : {&xs, &ts}) {
                    std::sort(g->begin(), g->end());
                    g->erase(std::unique(g->begin(), g->end()), g->end());
                }
                if (xs.size() * ts.size() != tab.rows.size() || !near_uniform(xs) || !near_uniform(ts))
                    throw Error("grid mismatch: x and t must form a full uniform grid");
                std::vector<std::vector<double>> field(ts.size(), std::vector<double>(xs.size()));
                for (const auto& r : tab.rows) {
                    const auto i = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), r[ct]) - ts.begin());
                    const auto k = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), r[cx]) - xs.begin());
                    field[i][k] = r[cv];
                }
                const auto n = space_time_norms(field, Mesh1D(xs.back() - xs.front(), xs.size()), ts.back() - ts.front());
                result[name] = name == "X" ? n.X : n.Y;
                continue;
            }
            std::vector<double> coord, values;
            for (const auto& r : tab.rows) {
                coord.push_back(r[0]);
                values.push_back(r[1]);
            }
            if (!std::is_sorted(coord.begin(), coord.end()) ||
                std::adjacent_find(coord.begin(), coord.end()) != coord.end() || coord.size() < 2)
                throw Error("grid mismatch: coordinates must be strictly increasing with at least 2 samples");
            if (name == "H" || name == "V" || name == "Vstar") {
                if (!near_uniform(coord)) throw Error("grid mismatch: " + name + " needs uniform samples");
                const auto n = sobolev_time_norms(values, coord.back() - coord.front());
                result[name] = name == "H" ? n.H : name == "V" ? n.V : n.Vstar;
                continue;
            }
            const auto phi = young_by_name(name);
            if (!phi) throw Error("unknown norm '" + name + "'");
            SampledFunction f{values, std::vector<double>(values.size(), 0.0)};
            for (std::size_t i = 0; i + 1 < coord.size(); ++i) {
                const double h = coord[i + 1] - coord[i];
                f.weights[i] += h / 2.0;
                f.weights[i + 1] += h / 2.0;
            }
            result[name] = luxemburg_norm(f, *phi);
        }
        out << json{{"schema_version", kSchemaVersion}, {"samples", tab.rows.size()}, {"norms", result}}.dump(2)
            << '\n';
        return exit_code::ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::config_failure;
    }
}

}  // namespace hyst
