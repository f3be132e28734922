#include "hystersolve/hysteresis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "hystersolve/csv.hpp"
#include "hystersolve/errors.hpp"

namespace hyst {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// integral of v^p V(v) over [a, b] for the piecewise-constant V, p in {0, 1}
double piecewise_moment(const SeparableDensity& d, double a, double b, int p) {
    if (a == b) return 0.0;
    if (a > b) return -piecewise_moment(d, b, a, p);
    double sum = 0.0;
    const std::size_t pieces = d.v_values.size();
    for (std::size_t k = 0; k < pieces; ++k) {
        const double lo = k == 0 ? -kInf : d.v_breaks[k - 1];
        const double hi = k + 1 == pieces ? kInf : d.v_breaks[k];
        const double seg_lo = std::max(a, lo);
        const double seg_hi = std::min(b, hi);
        if (seg_hi <= seg_lo) continue;
        sum += p == 0 ? d.v_values[k] * (seg_hi - seg_lo)
                      : d.v_values[k] * 0.5 * (seg_hi * seg_hi - seg_lo * seg_lo);
    }
    return sum;
}

double separable_prefactor(const SeparableDensity& d, double x, double r) {
    return d.scale * (1.0 + d.x_slope * x) * std::exp(-d.r_decay * r);
}

double piecewise_value(const SeparableDensity& d, double v) {
    const auto it = std::upper_bound(d.v_breaks.begin(), d.v_breaks.end(), v);
    return d.v_values[static_cast<std::size_t>(it - d.v_breaks.begin())];
}

// index i with nodes[i] <= t <= nodes[i+1] and the local coordinate in [0, 1]
std::pair<std::size_t, double> locate(const std::vector<double>& nodes, double t) {
    if (nodes.size() == 1) return {0, 0.0};
    if (t <= nodes.front()) return {0, 0.0};
    if (t >= nodes.back()) return {nodes.size() - 2, 1.0};
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return {i, (t - nodes[i]) / (nodes[i + 1] - nodes[i])};
}

double tabulated_value(const TabulatedDensity& d, double r, double v) {
    if (v < d.v_nodes.front() || v > d.v_nodes.back())
        throw RangeError("density evaluated at v = " + std::to_string(v) + " outside table range [" +
                         std::to_string(d.v_nodes.front()) + ", " + std::to_string(d.v_nodes.back()) + "]");
    const auto [i, a] = locate(d.r_nodes, r);
    const auto [k, b] = locate(d.v_nodes, v);
    const std::size_t nv = d.v_nodes.size();
    const auto at = [&](std::size_t ii, std::size_t kk) {
        return d.values[std::min(ii, d.r_nodes.size() - 1) * nv + std::min(kk, nv - 1)];
    };
    return (1 - a) * (1 - b) * at(i, k) + a * (1 - b) * at(i + 1, k) + (1 - a) * b * at(i, k + 1) +
           a * b * at(i + 1, k + 1);
}

void validate_model(const PreisachDensity::Model& model) {
    std::visit(overloaded{
                   [](const ConstantDensity& c) {
                       if (!(c.value >= 0.0)) throw Error("constant density must be nonnegative");
                   },
                   [](const SeparableDensity& s) {
                       if (s.v_values.size() != s.v_breaks.size() + 1)
                           throw Error("separable density needs one more v value than v breaks");
                       if (!std::is_sorted(s.v_breaks.begin(), s.v_breaks.end()) ||
                           std::adjacent_find(s.v_breaks.begin(), s.v_breaks.end()) != s.v_breaks.end())
                           throw Error("separable density v breaks must be strictly increasing");
                       if (!(s.scale >= 0.0)) throw Error("separable density scale must be nonnegative");
                       for (double v : s.v_values)
                           if (!(v >= 0.0)) throw Error("separable density values must be nonnegative");
                   },
                   [](const TabulatedDensity& t) {
                       if (t.r_nodes.empty() || t.v_nodes.size() < 2)
                           throw Error("tabulated density needs at least one r node and two v nodes");
                       if (t.values.size() != t.r_nodes.size() * t.v_nodes.size())
                           throw DimensionError("tabulated density value count does not match its grid");
                       if (!std::is_sorted(t.r_nodes.begin(), t.r_nodes.end()) ||
                           !std::is_sorted(t.v_nodes.begin(), t.v_nodes.end()))
                           throw Error("tabulated density nodes must be increasing");
                       if (t.simpson_panels < 2 || t.simpson_panels % 2)
                           throw Error("Simpson panel count must be even and positive");
                       for (double v : t.values)
                           if (!(v >= 0.0)) throw Error("tabulated density values must be nonnegative");
                   },
               },
               model);
}

}  // namespace

// ---------------------------------------------------------------------------
// ThresholdGrid

ThresholdGrid::ThresholdGrid(std::size_t count, double lambda_max)
    : count_(count), lambda_max_(lambda_max), dr_(lambda_max / static_cast<double>(count)) {
    if (count == 0) throw Error("threshold grid needs at least one node");
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) throw Error("threshold grid bound must be positive");
}

std::vector<double> ThresholdGrid::nodes() const {
    std::vector<double> out(count_);
    for (std::size_t j = 0; j < count_; ++j) out[j] = r(j);
    return out;
}

// ---------------------------------------------------------------------------
// PreisachDensity

PreisachDensity::PreisachDensity() : model_(ConstantDensity{}) {}

PreisachDensity::PreisachDensity(Model model) : model_(std::move(model)) { validate_model(model_); }

PreisachDensity PreisachDensity::constant(double value) { return PreisachDensity(ConstantDensity{value}); }

PreisachDensity PreisachDensity::from_csv(const std::string& path, int simpson_panels) {
    const auto table = read_csv(path);
    const auto rc = table.column("r");
    const auto vc = table.column("v");
    const auto dc = table.column("rho");
    std::map<std::pair<double, double>, double> cells;
    std::vector<double> rs, vs;
    for (const auto& row : table.rows) {
        cells[{row[rc], row[vc]}] = row[dc];
        rs.push_back(row[rc]);
        vs.push_back(row[vc]);
    }
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    if (cells.size() != rs.size() * vs.size() || cells.size() != table.rows.size())
        throw ParseError(path, 0, "density table must cover a full (r, v) grid without duplicates");
    TabulatedDensity t;
    t.r_nodes = rs;
    t.v_nodes = vs;
    t.simpson_panels = simpson_panels;
    t.values.reserve(cells.size());
    for (double r : rs)
        for (double v : vs) t.values.push_back(cells.at({r, v}));
    return PreisachDensity(std::move(t));
}

double PreisachDensity::operator()(double x, double r, double v) const {
    return std::visit(overloaded{
                          [](const ConstantDensity& c) { return c.value; },
                          [&](const SeparableDensity& s) { return separable_prefactor(s, x, r) * piecewise_value(s, v); },
                          [&](const TabulatedDensity& t) { return tabulated_value(t, r, v); },
                      },
                      model_);
}

PsiPair PreisachDensity::psi(double x, double r, double xi) const {
    return std::visit(
        overloaded{
            [&](const ConstantDensity& c) { return PsiPair{c.value * xi, 0.5 * c.value * xi * xi}; },
            [&](const SeparableDensity& s) {
                const double f = separable_prefactor(s, x, r);
                return PsiPair{f * piecewise_moment(s, 0.0, xi, 0), f * piecewise_moment(s, 0.0, xi, 1)};
            },
            [&](const TabulatedDensity& t) {
                if (xi < t.v_nodes.front() || xi > t.v_nodes.back() || 0.0 < t.v_nodes.front() ||
                    0.0 > t.v_nodes.back())
                    throw RangeError("psi requested at xi = " + std::to_string(xi) + " outside the density table");
                if (xi == 0.0) return PsiPair{};
                const int n = t.simpson_panels;
                const double h = xi / n;
                double s0 = 0.0, s1 = 0.0;
                for (int k = 0; k <= n; ++k) {
                    const double v = k * h;
                    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                    const double rho = tabulated_value(t, r, v);
                    s0 += w * rho;
                    s1 += w * v * rho;
                }
                return PsiPair{s0 * h / 3.0, s1 * h / 3.0};
            },
        },
        model_);
}

std::pair<double, double> PreisachDensity::v_range() const {
    if (const auto* t = std::get_if<TabulatedDensity>(&model_)) return {t->v_nodes.front(), t->v_nodes.back()};
    return {-kInf, kInf};
}

bool PreisachDensity::v_independent() const {
    return std::visit(overloaded{
                          [](const ConstantDensity&) { return true; },
                          [](const SeparableDensity& s) {
                              return std::all_of(s.v_values.begin(), s.v_values.end(),
                                                 [&](double v) { return v == s.v_values.front(); });
                          },
                          [](const TabulatedDensity& t) {
                              const std::size_t nv = t.v_nodes.size();
                              for (std::size_t i = 0; i < t.r_nodes.size(); ++i)
                                  for (std::size_t k = 1; k < nv; ++k)
                                      if (t.values[i * nv + k] != t.values[i * nv]) return false;
                              return true;
                          },
                      },
                      model_);
}

DensityBounds density_bounds(const PreisachDensity& density, double U, std::span<const double> xs,
                             std::size_t samples) {
    const std::vector<double> origin{0.0};
    if (xs.empty()) xs = origin;
    const auto [vmin, vmax] = density.v_range();
    const double lo = std::max(-U, vmin);
    const double hi = std::min(U, vmax);
    DensityBounds b{kInf, 0.0, 0.0};
    const double n = static_cast<double>(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double r = (i + 0.5) * U / n;
        for (std::size_t k = 0; k < samples; ++k) {
            const double v = lo + (k + 0.5) * (hi - lo) / n;
            double prev = 0.0;
            for (std::size_t m = 0; m < xs.size(); ++m) {
                const double rho = density(xs[m], r, v);
                b.rho0 = std::min(b.rho0, rho);
                b.rho1 = std::max(b.rho1, rho);
                if (m > 0 && xs[m] != xs[m - 1])
                    b.rho_bar = std::max(b.rho_bar, std::abs(rho - prev) / std::abs(xs[m] - xs[m - 1]));
                prev = rho;
            }
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// OuterFunction

OuterFunction OuterFunction::arctan(double c) {
    if (!(c > 0.0)) throw Error("arctan outer function needs a positive scale");
    return {Kind::arctan, c, 0.0};
}

OuterFunction OuterFunction::cubic(double a, double b) {
    if (!(a > 0.0) || !(b >= 0.0)) throw Error("cubic outer function needs a > 0 and b >= 0");
    return {Kind::cubic, a, b};
}

double OuterFunction::operator()(double u) const {
    switch (kind_) {
        case Kind::arctan: return p1_ * std::atan(u / p1_);
        case Kind::cubic: return p1_ * u + p2_ * u * u * u;
    }
    return u;
}

double OuterFunction::derivative(double u) const {
    switch (kind_) {
        case Kind::arctan: {
            const double t = u / p1_;
            return 1.0 / (1.0 + t * t);
        }
        case Kind::cubic: return p1_ + 3.0 * p2_ * u * u;
    }
    return 1.0;
}

double OuterFunction::second_derivative(double u) const {
    switch (kind_) {
        case Kind::arctan: {
            const double t = u / p1_;
            const double q = 1.0 + t * t;
            return -2.0 * t / (p1_ * q * q);
        }
        case Kind::cubic: return 6.0 * p2_ * u;
    }
    return 0.0;
}

OuterBounds outer_bounds(const OuterFunction& g, double U) {
    switch (g.kind()) {
        case OuterFunction::Kind::arctan: {
            const double c = g.p1();
            const double t_crit = std::min(U, c / std::sqrt(3.0));
            return {g.derivative(U), 1.0, std::abs(g.second_derivative(t_crit))};
        }
        case OuterFunction::Kind::cubic: return {g.p1(), g.derivative(U), 6.0 * g.p2() * U};
    }
    return {};
}

std::vector<std::string> verify_outer(const OuterFunction& g, double U) {
    std::vector<std::string> issues;
    if (g(0.0) != 0.0) issues.push_back("dpc: g(0) != 0");
    const auto b = outer_bounds(g, U);
    if (!(b.g_star > 0.0)) issues.push_back("dpc: g' not bounded away from zero");
    const double h1 = 1e-5 * std::max(1.0, U);
    const double h2 = 1e-3 * std::max(1.0, U);
    const int n = 200;
    double worst_d1 = 0.0, worst_d2 = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double u = -U + 2.0 * U * k / n;
        const double d1 = (g(u + h1) - g(u - h1)) / (2.0 * h1);
        const double d2 = (g(u + h2) - 2.0 * g(u) + g(u - h2)) / (h2 * h2);
        worst_d1 = std::max({worst_d1, b.g_star - d1, d1 - b.g_sup});
        worst_d2 = std::max(worst_d2, std::abs(d2) - b.g_bar);
    }
    if (worst_d1 > 1e-6) issues.push_back("dpc: sampled g' leaves [g_*, g^*]");
    if (worst_d2 > 1e-3 * std::max(1.0, b.g_bar)) issues.push_back("dpc: sampled |g''| exceeds its bound");
    return issues;
}

// ---------------------------------------------------------------------------
// PreisachOperator and memory

PreisachOperator::PreisachOperator(ThresholdGrid grid_, PreisachDensity density_, double offset_,
                                   std::optional<OuterFunction> outer_)
    : grid(grid_),
      density(std::move(density_)),
      offset(offset_),
      outer(outer_),
      range(grid_.lambda_max()) {}

MemoryState::MemoryState(std::size_t nodes, std::size_t thresholds, double fill)
    : nodes_(nodes), thresholds_(thresholds), values_(nodes * thresholds, fill) {}

double play_update(double u, double xi_prev, double r) {
    if (!(r >= 0.0)) throw InvalidThreshold(r);
    return std::min(u + r, std::max(u - r, xi_prev));
}

std::vector<double> play_sequence(std::span<const double> inputs, double xi0, double r) {
    std::vector<double> out;
    out.reserve(inputs.size());
    double xi = xi0;
    for (double u : inputs) {
        xi = play_update(u, xi, r);
        out.push_back(xi);
    }
    return out;
}

PsiPair psi_and_Psi(double x, double r, double xi, const PreisachDensity& density) {
    return density.psi(x, r, xi);
}

double preisach_output(std::span<const double> memory_row, double x, const PreisachOperator& op) {
    if (memory_row.size() != op.grid.count())
        throw DimensionError("memory row has " + std::to_string(memory_row.size()) + " entries, grid has " +
                             std::to_string(op.grid.count()));
    double sum = 0.0;
    for (std::size_t j = 0; j < memory_row.size(); ++j) sum += op.density.psi(x, op.grid.r(j), memory_row[j]).psi;
    return op.offset + sum * op.grid.dr();
}

double preisach_step_into(double u, std::span<const double> memory_row, std::span<double> out, double x,
                          const PreisachOperator& op) {
    const std::size_t m = op.grid.count();
    if (memory_row.size() != m || out.size() != m) throw DimensionError("memory row does not match the threshold grid");
    if (!(std::abs(u) <= op.range * (1.0 + 1e-9) + 1e-12))
        throw RangeError("input u = " + std::to_string(u) + " exceeds the operator range " + std::to_string(op.range));
    const double w = op.play_input(u);
    const double dr = op.grid.dr();
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double r = op.grid.r(j);
        const double xi = std::min(w + r, std::max(w - r, memory_row[j]));
        out[j] = xi;
        sum += op.density.psi(x, r, xi).psi;
    }
    return op.offset + sum * dr;
}

PreisachStep preisach_step(double u, std::span<const double> memory_row, double x, const PreisachOperator& op) {
    PreisachStep step{0.0, std::vector<double>(op.grid.count())};
    step.s = preisach_step_into(u, memory_row, step.memory, x, op);
    return step;
}

double branch_slope(std::span<const double> memory_row, double u, int direction, double x,
                    const PreisachOperator& op) {
    if (direction != 1 && direction != -1) throw Error("branch direction must be +1 or -1");
    if (memory_row.size() != op.grid.count()) throw DimensionError("memory row does not match the threshold grid");
    const double w = op.play_input(u);
    const double tol = 1e-12 * std::max(1.0, std::abs(w));
    double sum = 0.0;
    for (std::size_t j = 0; j < memory_row.size(); ++j) {
        const double r = op.grid.r(j);
        const double edge = direction > 0 ? w - r : w + r;
        if (std::abs(memory_row[j] - edge) <= tol) sum += op.density(x, r, memory_row[j]);
    }
    const double chain = op.outer ? op.outer->derivative(u) : 1.0;
    return sum * op.grid.dr() * chain;
}

SaturationReport saturation_range_check(const PreisachOperator& op, std::span<const double> xs) {
    const std::vector<double> origin{0.0};
    if (xs.empty()) xs = origin;
    const auto [vmin, vmax] = op.density.v_range();
    const double U = op.grid.lambda_max();
    SaturationReport report;
    for (double x : xs) {
        double pos = 0.0, neg = 0.0;
        for (std::size_t j = 0; j < op.grid.count(); ++j) {
            const double r = op.grid.r(j);
            const double reach = std::max(U - r, 0.0);
            pos += op.density.psi(x, r, std::min(reach, std::max(vmax, 0.0))).psi;
            neg -= op.density.psi(x, r, std::max(-reach, std::min(vmin, 0.0))).psi;
        }
        pos *= op.grid.dr();
        neg *= op.grid.dr();
        const double slack = 1e-12;
        const bool ok = pos <= 1.0 - op.offset + slack && neg <= op.offset + slack;
        report.samples.push_back({x, pos, neg, ok});
        report.passed = report.passed && ok;
    }
    return report;
}

MemoryCheck check_memory_row(std::span<const double> row, double w, const ThresholdGrid& grid, double U) {
    MemoryCheck c;
    for (std::size_t j = 0; j < row.size(); ++j) {
        const double r = grid.r(j);
        c.admissibility = std::max(c.admissibility, std::abs(w - row[j]) - r);
        c.support = std::max(c.support, std::abs(row[j]) - std::max(U - r, 0.0));
        if (j + 1 < row.size()) c.lipschitz = std::max(c.lipschitz, std::abs(row[j + 1] - row[j]) - grid.dr());
    }
    c.admissibility = std::max(c.admissibility, 0.0);
    c.support = std::max(c.support, 0.0);
    c.lipschitz = std::max(c.lipschitz, 0.0);
    return c;
}

}  // namespace hyst
