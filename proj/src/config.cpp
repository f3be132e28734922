#include "hystersolve/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "hystersolve/csv.hpp"
#include "hystersolve/errors.hpp"

namespace hyst {

namespace {

struct Bad {
    std::string what;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) throw Bad{"not a finite number: '" + s + "'"};
    return v;
}

template <class Int>
Int to_int(const std::string& s) {
    Int v{};
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw Bad{"not an integer: '" + s + "'"};
    return v;
}

std::vector<double> to_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
    return out;
}

std::string from_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
}

template <class E, std::size_t N>
using Names = std::array<std::pair<E, const char*>, N>;

constexpr Names<DensitySpec::Kind, 3> kDensityKinds{{{DensitySpec::Kind::constant, "constant"},
                                                    {DensitySpec::Kind::separable, "separable"},
                                                    {DensitySpec::Kind::tabulated, "tabulated"}}};
constexpr Names<OuterSpec::Kind, 3> kOuterKinds{
    {{OuterSpec::Kind::none, "none"}, {OuterSpec::Kind::arctan, "arctan"}, {OuterSpec::Kind::cubic, "cubic"}}};
constexpr Names<BoundaryFormula::Kind, 3> kFormulaKinds{{{BoundaryFormula::Kind::constant, "constant"},
                                                        {BoundaryFormula::Kind::ramp, "ramp"},
                                                        {BoundaryFormula::Kind::sinusoid, "sinusoid"}}};
constexpr Names<ProfileSpec::Kind, 3> kProfileKinds{{{ProfileSpec::Kind::constant, "constant"},
                                                    {ProfileSpec::Kind::quadratic, "quadratic"},
                                                    {ProfileSpec::Kind::cosine, "cosine"}}};
constexpr Names<MemorySpec::Kind, 4> kMemoryKinds{{{MemorySpec::Kind::monotone, "monotone"},
                                                  {MemorySpec::Kind::virgin, "virgin"},
                                                  {MemorySpec::Kind::peak, "peak"},
                                                  {MemorySpec::Kind::file, "file"}}};

struct Entry {
    std::string key;
    std::function<std::optional<std::string>(const SimulationConfig&)> get;
    std::function<void(SimulationConfig&, const std::string&, const std::string& base_dir)> set;
};

template <class F>
Entry real(std::string key, F field) {
    return {std::move(key), [field](const SimulationConfig& c) { return std::optional(format_double(field(c))); },
            [field](SimulationConfig& c, const std::string& v, const std::string&) { field(c) = to_double(v); }};
}

template <class F>
Entry optional_real(std::string key, F field) {
    return {std::move(key),
            [field](const SimulationConfig& c) -> std::optional<std::string> {
                if (!field(c)) return std::nullopt;
                return format_double(*field(c));
            },
            [field](SimulationConfig& c, const std::string& v, const std::string&) { field(c) = to_double(v); }};
}

template <class F>
Entry integer(std::string key, F field) {
    return {std::move(key), [field](const SimulationConfig& c) { return std::optional(std::to_string(field(c))); },
            [field](SimulationConfig& c, const std::string& v, const std::string&) {
                field(c) = to_int<std::remove_reference_t<decltype(field(c))>>(v);
            }};
}

template <class F>
Entry boolean(std::string key, F field) {
    return {std::move(key),
            [field](const SimulationConfig& c) { return std::optional<std::string>(field(c) ? "true" : "false"); },
            [field](SimulationConfig& c, const std::string& v, const std::string&) {
                if (v == "true") field(c) = true;
                else if (v == "false") field(c) = false;
                else throw Bad{"expected true or false, got '" + v + "'"};
            }};
}

template <class F>
Entry list(std::string key, F field) {
    return {std::move(key),
            [field](const SimulationConfig& c) -> std::optional<std::string> {
                if (field(c).empty()) return std::nullopt;
                return from_list(field(c));
            },
            [field](SimulationConfig& c, const std::string& v, const std::string&) { field(c) = to_list(v); }};
}

template <class F>
Entry text(std::string key, F field) {
    return {std::move(key),
            [field](const SimulationConfig& c) -> std::optional<std::string> {
                if (field(c).empty()) return std::nullopt;
                return field(c);
            },
            [field](SimulationConfig& c, const std::string& v, const std::string&) { field(c) = v; }};
}

template <class F>
Entry path(std::string key, F field) {
    auto e = text(std::move(key), field);
    e.set = [field](SimulationConfig& c, const std::string& v, const std::string& base) {
        std::filesystem::path p(v);
        if (p.is_relative()) p = std::filesystem::path(base) / p;
        field(c) = std::filesystem::absolute(p).lexically_normal().string();
    };
    return e;
}

template <class F, class E, std::size_t N>
Entry choice(std::string key, F field, const Names<E, N>& names) {
    return {std::move(key),
            [field, &names](const SimulationConfig& c) -> std::optional<std::string> {
                for (const auto& [k, n] : names)
                    if (k == field(c)) return std::string(n);
                return std::nullopt;
            },
            [field, &names](SimulationConfig& c, const std::string& v, const std::string&) {
                for (const auto& [k, n] : names)
                    if (v == n) {
                        field(c) = k;
                        return;
                    }
                std::string allowed;
                for (const auto& [k, n] : names) allowed += std::string(allowed.empty() ? "" : ", ") + n;
                throw Bad{"unknown kind '" + v + "' (expected one of " + allowed + ")"};
            }};
}

#define FIELD(expr) [](auto& c) -> auto& { return c.expr; }

void add_formula(std::vector<Entry>& t, const std::string& prefix, BoundaryFormula SimulationConfig::*member) {
    const auto f = [member](auto& c) -> auto& { return c.*member; };
    t.push_back(choice(prefix + ".kind", [f](auto& c) -> auto& { return f(c).kind; }, kFormulaKinds));
    t.push_back(real(prefix + ".value", [f](auto& c) -> auto& { return f(c).value; }));
    t.push_back(real(prefix + ".to", [f](auto& c) -> auto& { return f(c).to; }));
    t.push_back(real(prefix + ".duration", [f](auto& c) -> auto& { return f(c).duration; }));
    t.push_back(real(prefix + ".amplitude", [f](auto& c) -> auto& { return f(c).amplitude; }));
    t.push_back(real(prefix + ".period", [f](auto& c) -> auto& { return f(c).period; }));
}

const std::vector<Entry>& table() {
    static const std::vector<Entry> t = [] {
        std::vector<Entry> t;
        t.push_back(real("mesh.length", FIELD(length)));
        t.push_back(integer("mesh.nodes", FIELD(nodes)));
        t.push_back(real("time.final", FIELD(final_time)));
        t.push_back(integer("time.steps", FIELD(steps)));

        t.push_back(integer("preisach.thresholds", FIELD(thresholds)));
        t.push_back(real("preisach.lambda", FIELD(Lambda)));
        t.push_back(real("preisach.offset", FIELD(offset)));
        t.push_back(choice("preisach.density.kind", FIELD(density.kind), kDensityKinds));
        t.push_back(real("preisach.density.value", FIELD(density.value)));
        t.push_back(real("preisach.density.scale", FIELD(density.scale)));
        t.push_back(real("preisach.density.x_slope", FIELD(density.x_slope)));
        t.push_back(real("preisach.density.r_decay", FIELD(density.r_decay)));
        t.push_back(list("preisach.density.v_breaks", FIELD(density.v_breaks)));
        t.push_back(list("preisach.density.v_values", FIELD(density.v_values)));
        t.push_back(path("preisach.density.file", FIELD(density.file)));
        t.push_back(integer("preisach.density.panels", FIELD(density.panels)));
        t.push_back(choice("preisach.outer.kind", FIELD(outer.kind), kOuterKinds));
        t.push_back(real("preisach.outer.c", FIELD(outer.c)));
        t.push_back(real("preisach.outer.a", FIELD(outer.a)));
        t.push_back(real("preisach.outer.b", FIELD(outer.b)));

        t.push_back(real("laws.kappa.base", FIELD(kappa.base)));
        t.push_back(real("laws.kappa.x_coeff", FIELD(kappa.x_coeff)));
        t.push_back(real("laws.kappa.s_coeff", FIELD(kappa.s_coeff)));
        t.push_back(real("laws.kappa.exponent", FIELD(kappa.exponent)));
        t.push_back(real("laws.gamma.left", FIELD(gamma_left)));
        t.push_back(real("laws.gamma.right", FIELD(gamma_right)));
        add_formula(t, "laws.u_star.left", &SimulationConfig::u_star_left);
        add_formula(t, "laws.u_star.right", &SimulationConfig::u_star_right);
        t.push_back(path("laws.u_star.file", FIELD(u_star_file)));
        t.push_back(real("laws.u_star.bound", FIELD(u_star_bound)));

        t.push_back(choice("initial.u0.kind", FIELD(u0.kind), kProfileKinds));
        t.push_back(real("initial.u0.base", FIELD(u0.base)));
        t.push_back(real("initial.u0.amplitude", FIELD(u0.amplitude)));
        t.push_back(choice("initial.lambda.kind", FIELD(lambda.kind), kMemoryKinds));
        t.push_back(real("initial.lambda.peak", FIELD(lambda.peak)));
        t.push_back(path("initial.lambda.file", FIELD(lambda.file)));
        t.push_back(optional_real("initial.compat_L", FIELD(compat_L)));
        t.push_back(optional_real("initial.r0", FIELD(r0)));

        t.push_back(real("solver.tol", FIELD(solver.tol)));
        t.push_back(integer("solver.max_iter", FIELD(solver.max_iter)));
        t.push_back(real("solver.relaxation", FIELD(solver.relaxation)));
        t.push_back(integer("solver.retries", FIELD(solver.retries)));

        t.push_back(path("output.directory", FIELD(output_directory)));
        t.push_back(integer("output.stride", FIELD(stride)));
        t.push_back(boolean("output.memory", FIELD(write_memory)));
        return t;
    }();
    return t;
}

#undef FIELD

std::function<double(double)> profile(const ProfileSpec& p, double L) {
    switch (p.kind) {
        case ProfileSpec::Kind::quadratic:
            return [p, L](double x) { return p.base + p.amplitude * 4.0 * (x / L) * (1.0 - x / L); };
        case ProfileSpec::Kind::cosine:
            return [p, L](double x) { return p.base + p.amplitude * std::cos(std::numbers::pi * x / L); };
        case ProfileSpec::Kind::constant:
            break;
    }
    return [b = p.base](double) { return b; };
}

std::function<double(double)> profile_dx(const ProfileSpec& p, double L) {
    switch (p.kind) {
        case ProfileSpec::Kind::quadratic:
            return [p, L](double x) { return p.amplitude * 4.0 * (1.0 - 2.0 * x / L) / L; };
        case ProfileSpec::Kind::cosine:
            return [p, L](double x) {
                return -p.amplitude * std::numbers::pi / L * std::sin(std::numbers::pi * x / L);
            };
        case ProfileSpec::Kind::constant:
            break;
    }
    return [](double) { return 0.0; };
}

double profile_sup(const ProfileSpec& p, double L) {
    const auto f = profile(p, L);
    double m = 0.0;
    const int samples = 4096;
    for (int i = 0; i <= samples; ++i) m = std::max(m, std::abs(f(L * i / samples)));
    return m;
}

// Bilinear table lambda(x, r), clamped at the edges.
std::function<double(double, double)> memory_table(const std::string& file) {
    const auto tab = read_csv(file);
    const auto cx = tab.column("x"), cr = tab.column("r"), cl = tab.column("lambda");
    std::vector<double> xs, rs;
    for (const auto& row : tab.rows) {
        xs.push_back(row[cx]);
        rs.push_back(row[cr]);
    }
    const auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(xs);
    uniq(rs);
    if (xs.size() * rs.size() != tab.rows.size() || xs.size() < 2 || rs.size() < 2)
        throw ParseError(file, 0, "memory table must cover a full rectangular (x, r) grid");
    std::vector<double> values(tab.rows.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : tab.rows) {
        const auto i = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), row[cx]) - xs.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(rs.begin(), rs.end(), row[cr]) - rs.begin());
        values[i * rs.size() + j] = row[cl];
    }
    if (std::any_of(values.begin(), values.end(), [](double v) { return std::isnan(v); }))
        throw ParseError(file, 0, "memory table has duplicate (x, r) entries");
    return [xs, rs, values](double x, double r) {
        const auto locate = [](const std::vector<double>& g, double v, std::size_t& i) {
            v = std::clamp(v, g.front(), g.back());
            i = std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), v) - g.begin()),
                                      g.size() - 1) - 1;
            return (v - g[i]) / (g[i + 1] - g[i]);
        };
        std::size_t i = 0, j = 0;
        const double a = locate(xs, x, i), b = locate(rs, r, j);
        const auto at = [&](std::size_t p, std::size_t q) { return values[p * rs.size() + q]; };
        return (1 - a) * ((1 - b) * at(i, j) + b * at(i, j + 1)) + a * ((1 - b) * at(i + 1, j) + b * at(i + 1, j + 1));
    };
}

std::optional<OuterFunction> make_outer(const OuterSpec& o) {
    switch (o.kind) {
        case OuterSpec::Kind::arctan:
            return OuterFunction::arctan(o.c);
        case OuterSpec::Kind::cubic:
            return OuterFunction::cubic(o.a, o.b);
        case OuterSpec::Kind::none:
            break;
    }
    return std::nullopt;
}

PreisachDensity make_density(const DensitySpec& d) {
    switch (d.kind) {
        case DensitySpec::Kind::separable:
            return PreisachDensity(SeparableDensity{d.scale, d.x_slope, d.r_decay, d.v_breaks, d.v_values});
        case DensitySpec::Kind::tabulated:
            return PreisachDensity::from_csv(d.file, d.panels);
        case DensitySpec::Kind::constant:
            break;
    }
    return PreisachDensity::constant(d.value);
}

MaterialLaws make_laws(const SimulationConfig& c) {
    MaterialLaws laws;
    laws.kappa = c.kappa;
    laws.gamma_left = c.gamma_left;
    laws.gamma_right = c.gamma_right;
    laws.u_star = c.u_star_file.empty() ? BoundaryData(c.u_star_left, c.u_star_right)
                                        : BoundaryData::from_csv(c.u_star_file);
    laws.u_star_bound = c.u_star_bound;
    return laws;
}

}  // namespace

SimulationConfig parse_config_text(const std::string& text, const std::string& source, const std::string& base_dir) {
    std::map<std::string, const Entry*> index;
    for (const auto& e : table()) index[e.key] = &e;
    SimulationConfig cfg;
    std::map<std::string, std::size_t> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ParseError(source, line, "expected 'key = value'");
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end()) throw ParseError(source, line, "unknown key '" + key + "'");
        if (const auto s = seen.find(key); s != seen.end())
            throw ParseError(source, line, "duplicate key '" + key + "' (first on line " + std::to_string(s->second) + ")");
        seen[key] = line;
        if (value.empty()) throw ParseError(source, line, "missing value for '" + key + "'");
        try {
            it->second->set(cfg, value, base_dir);
        } catch (const Bad& b) {
            throw ParseError(source, line, key + ": " + b.what);
        }
    }
    return cfg;
}

SimulationConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto base = std::filesystem::absolute(std::filesystem::path(path)).parent_path().string();
    auto cfg = parse_config_text(ss.str(), path, base);
    if (auto v = validate_config(cfg); !v.empty()) throw ConfigError(std::move(v));
    return cfg;
}

std::string write_config(const SimulationConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& e : table()) {
        const auto value = e.get(cfg);
        if (!value) continue;
        const auto sec = e.key.substr(0, e.key.find('.'));
        if (sec != section) {
            if (!section.empty()) out += '\n';
            section = sec;
        }
        out += e.key + " = " + *value + '\n';
    }
    return out;
}

std::vector<std::string> validate_config(const SimulationConfig& c) {
    std::vector<std::string> v;
    if (!(c.length > 0.0)) v.push_back("mesh: length must be positive");
    if (c.nodes < 3) v.push_back("mesh: at least 3 nodes required");
    if (!(c.final_time > 0.0)) v.push_back("time: final time must be positive");
    if (c.steps < 1) v.push_back("time: at least one step required");
    if (c.thresholds < 1) v.push_back("preisach: at least one threshold required");
    if (!(c.Lambda > 0.0)) v.push_back("hy1: Lambda must be positive");
    if (c.solver.tol <= 0.0) v.push_back("solver: tol must be positive");
    if (c.solver.max_iter < 1) v.push_back("solver: max_iter must be at least 1");
    if (!(c.solver.relaxation > 0.0 && c.solver.relaxation <= 1.0)) v.push_back("solver: relaxation must be in (0, 1]");
    if (c.solver.retries < 0) v.push_back("solver: retries must be nonnegative");
    if (c.stride < 1) v.push_back("output: stride must be at least 1");
    if (c.density.kind == DensitySpec::Kind::tabulated && c.density.file.empty())
        v.push_back("irho: tabulated density needs preisach.density.file");
    if (c.lambda.kind == MemorySpec::Kind::file && c.lambda.file.empty())
        v.push_back("hy1: file memory needs initial.lambda.file");
    if (c.compat_L && !(*c.compat_L > 0.0)) v.push_back("hy1: compat_L must be positive");
    if (c.r0 && !(*c.r0 >= 0.0)) v.push_back("hy1: r0 must be nonnegative");
    if (!v.empty()) return v;  // the remaining checks need a usable geometry

    try {
        const auto laws = make_laws(c);
        for (auto& s : laws.validate(c.length, c.final_time)) v.push_back(std::move(s));
    } catch (const Error& e) {
        v.push_back(std::string("hy2: ") + e.what());
    }
    const double U = std::max(c.u_star_bound, c.Lambda);
    if (profile_sup(c.u0, c.length) > c.Lambda * (1.0 + 1e-12)) v.push_back("hy1: sup|u0| > Lambda");

    std::optional<OuterFunction> outer;
    try {
        outer = make_outer(c.outer);
        if (outer)
            for (auto& s : verify_outer(*outer, U)) v.push_back(std::move(s));
    } catch (const Error& e) {
        v.push_back(std::string("dpc: ") + e.what());
    }
    try {
        const auto density = make_density(c.density);
        Mesh1D mesh(c.length, c.nodes);
        const auto xs = mesh.coordinates();
        const double w_range = outer ? std::max({U, std::abs((*outer)(U)), std::abs((*outer)(-U))}) : U;
        if (!density_bounds(density, w_range, xs, 16).regular()) v.push_back("irho: density must be positive");
    } catch (const Error& e) {
        v.push_back(std::string("irho: ") + e.what());
    }
    return v;
}

Scenario make_scenario(const SimulationConfig& c) {
    Scenario sc;
    sc.mesh = Mesh1D(c.length, c.nodes);
    sc.laws = make_laws(c);
    sc.Lambda = c.Lambda;
    sc.final_time = c.final_time;
    sc.steps = c.steps;
    sc.solver = c.solver;
    sc.compat_L = c.compat_L;
    sc.r0 = c.r0;
    const double U = sc.U();
    const auto outer = make_outer(c.outer);
    const double w_range = outer ? std::max({U, std::abs((*outer)(U)), std::abs((*outer)(-U))}) : U;
    sc.op = PreisachOperator(ThresholdGrid(c.thresholds, w_range), make_density(c.density), c.offset, outer);
    sc.op.range = U;

    sc.u0 = profile(c.u0, c.length);
    sc.u0_dx = profile_dx(c.u0, c.length);
    const auto g = [outer](double u) { return outer ? (*outer)(u) : u; };
    const auto u0 = sc.u0;
    switch (c.lambda.kind) {
        case MemorySpec::Kind::monotone:
            sc.lambda = [u0, g](double x, double r) {
                const double w0 = g(u0(x));
                return std::clamp(0.0, w0 - r, w0 + r);
            };
            break;
        case MemorySpec::Kind::virgin:
            sc.lambda = [](double, double) { return 0.0; };
            break;
        case MemorySpec::Kind::peak: {
            const double wp = g(c.lambda.peak);
            sc.lambda = [u0, g, wp](double x, double r) {
                const double w0 = g(u0(x));
                const double loaded = std::clamp(0.0, wp - r, wp + r);
                return std::clamp(loaded, w0 - r, w0 + r);
            };
            break;
        }
        case MemorySpec::Kind::file:
            sc.lambda = memory_table(c.lambda.file);
            break;
    }
    return sc;
}

}  // namespace hyst
