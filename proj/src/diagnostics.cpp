#include "hystersolve/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hystersolve/errors.hpp"
#include "hystersolve/function_spaces.hpp"

namespace hyst {

namespace {

// 5-point Gauss-Legendre on [0, 1]
constexpr std::array<double, 5> kGaussX{0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842,
                                        0.953089922969332};
constexpr std::array<double, 5> kGaussW{0.118463442528095, 0.239314335249683, 0.284444444444444,
                                        0.239314335249683, 0.118463442528095};

double phi_log(double v) { return v * std::log1p(v); }

double state_energy(const Scenario& sc, const StepState& st) {
    double e = 0.0;
    for (std::size_t k = 0; k + 1 < st.u.size(); ++k) {
        const double du = st.u[k + 1] - st.u[k];
        e += du * du / sc.mesh.h();
    }
    return e + sc.laws.gamma_left * st.u.front() * st.u.front() + sc.laws.gamma_right * st.u.back() * st.u.back();
}

std::string context_of(const Trajectory& traj) {
    std::ostringstream os;
    os << "tau=" << traj.scenario.tau() << " n=" << traj.scenario.steps << " nodes=" << traj.scenario.mesh.nodes()
       << " thresholds=" << traj.scenario.op.grid.count();
    return os.str();
}

void check_theta(const Trajectory& traj, std::span<const double> theta) {
    if (theta.size() != traj.scenario.mesh.nodes()) throw DimensionError("test profile does not match the mesh");
    if (traj.states.size() < 2) throw Error("trajectory has no steps");
}

void check_sigma(const TimeProfile& sigma, double T) {
    if (!sigma.value || !sigma.derivative) throw Error("time profile needs a value and a derivative");
    const double tol = 1e-12;
    if (std::abs(sigma.value(0.0)) > tol || std::abs(sigma.value(T)) > tol)
        throw Error("time profile must vanish at both ends of [0, T]");
}

// Spatial part of the weak form: Robin and diffusion terms for given nodal
// u, s and boundary data.
double spatial_terms(const Scenario& sc, std::span<const double> u, std::span<const double> s,
                     std::pair<double, double> u_star, std::span<const double> theta) {
    const auto& mesh = sc.mesh;
    double b = 0.0;
    for (std::size_t e = 0; e + 1 < mesh.nodes(); ++e) {
        const double kappa = sc.laws.kappa(0.5 * (mesh.x(e) + mesh.x(e + 1)), 0.5 * (s[e] + s[e + 1]));
        b += kappa * (u[e + 1] - u[e]) * (theta[e + 1] - theta[e]) / mesh.h();
    }
    b += sc.laws.gamma_left * (u.front() - u_star.first) * theta.front();
    b += sc.laws.gamma_right * (u.back() - u_star.second) * theta.back();
    return b;
}

}  // namespace

bool any_failed(const std::vector<EstimateReport>& reports) {
    return std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.status == Status::fail; });
}

double philog_increment_sum(const Trajectory& traj) {
    const auto m = traj.scenario.mesh.lumped_mass();
    const double tau = traj.scenario.tau();
    double sum = 0.0;
    for (std::size_t i = 1; i < traj.states.size(); ++i)
        for (std::size_t k = 0; k < m.size(); ++k) {
            const double du = std::abs(traj.states[i].u[k] - traj.states[i - 1].u[k]);
            sum += m[k] * du * std::log1p(du / tau);
        }
    return sum;
}

double energy_sum(const Trajectory& traj) {
    double e = 0.0;
    for (const auto& st : traj.states) e += state_energy(traj.scenario, st);
    return traj.scenario.tau() * e;
}

double convexity_f(double w, double tau) { return w / (tau + std::abs(w)); }

double convexity_F(double w, double tau) {
    const double a = std::abs(w);
    return a - tau * std::log1p(a / tau);
}

double convexity_Gamma(double w, double tau) {
    const double a = std::abs(w);
    return tau * a * (std::log1p(a / tau) - a / (tau + a));
}

ConvexityReport convexity_inequality_check(const PreisachOperator& op_in, std::span<const double> w, double w_minus1,
                                           double tau, double x) {
    if (!op_in.density.v_independent()) throw Error("convexity check needs a density independent of v");
    if (!(tau > 0.0)) throw Error("time step must be positive");
    if (w.empty()) throw DimensionError("convexity check needs at least w_0");
    const auto b = density_bounds(op_in.density, op_in.grid.lambda_max(), std::span<const double>(&x, 1), 16);
    if (!(b.rho0 > 0.0)) throw Error("convexity check needs a positive density");

    PreisachOperator op(op_in.grid, op_in.density, op_in.offset);
    op.range = std::numeric_limits<double>::infinity();
    std::vector<double> mem(op.grid.count(), 0.0), next(op.grid.count());

    const double p_minus1 = preisach_step_into(w_minus1, mem, next, x, op);
    mem.swap(next);
    std::vector<double> P{p_minus1};
    std::vector<double> mem0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        P.push_back(preisach_step_into(w[i], mem, next, x, op));
        mem.swap(next);
        if (i == 0) mem0 = mem;
    }
    // P[i + 1] holds P[w]_i
    const auto Pw = [&](std::ptrdiff_t i) { return P[static_cast<std::size_t>(i + 1)]; };

    ConvexityReport r;
    const std::size_t n = w.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<std::ptrdiff_t>(i);
        const double dw = w[i + 1] - w[i];
        r.lhs += (Pw(ii + 1) - 2.0 * Pw(ii) + Pw(ii - 1)) * convexity_f(dw, tau);
        r.rhs += convexity_Gamma(dw, tau);
    }
    const double d0 = w[0] - w_minus1;
    if (d0 != 0.0) {
        r.quotient_term = (Pw(0) - Pw(-1)) / d0 * convexity_F(d0, tau);
    } else {
        int dir = 1;
        for (std::size_t i = 0; i < n; ++i)
            if (w[i + 1] != w[i]) {
                dir = w[i + 1] > w[i] ? 1 : -1;
                break;
            }
        r.quotient_term = branch_slope(mem0, w[0], dir, x, op) * convexity_F(0.0, tau);
    }
    r.lhs += r.quotient_term;
    r.beta_hat = r.rhs > 0.0 ? 2.0 * r.lhs / r.rhs : std::numeric_limits<double>::infinity();
    r.passed = r.beta_hat > 0.0;
    return r;
}

double alpha_tau(double tau, double U) {
    if (!(tau > 0.0 && tau < 1.0)) throw RangeError("alpha_tau needs 0 < tau < 1");
    if (!(U > 0.0)) throw RangeError("alpha_tau needs U > 0");
    const double st = std::sqrt(tau);
    const double a1 = std::log1p(2.0 * U) / std::log1p(1.0 / st);
    const double a2 = st / std::numbers::ln2;
    const double a3 = 2.0 * st;
    return std::max({a1, a2, a3});
}

double alpha_sweep(double tau, double U, std::size_t samples) {
    if (!(tau > 0.0 && tau < 1.0)) throw RangeError("alpha_sweep needs 0 < tau < 1");
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double v = 2.0 * U * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
        worst = std::max(worst, std::log1p(v) / std::log1p(v / tau));
    }
    return worst;
}

InterpolantGap interpolant_gap(const Trajectory& traj) {
    const auto& sc = traj.scenario;
    const auto m = sc.mesh.lumped_mass();
    InterpolantGap g;
    for (std::size_t k = 0; k < m.size(); ++k) {
        double max_u = 0.0, max_s = 0.0;
        for (std::size_t i = 1; i < traj.states.size(); ++i) {
            const double du = std::abs(traj.states[i].u[k] - traj.states[i - 1].u[k]);
            const double ds = std::abs(traj.states[i].s[k] - traj.states[i - 1].s[k]);
            max_u = std::max(max_u, du);
            max_s = std::max(max_s, ds);
            g.sum_u += m[k] * phi_log(du);
            g.sum_G += m[k] * phi_log(ds);
        }
        g.gap_u += m[k] * phi_log(max_u);
        g.gap_G += m[k] * phi_log(max_s);
    }
    const double tau = sc.tau();
    g.alpha = tau < 1.0 ? alpha_tau(tau, sc.U()) : std::numeric_limits<double>::quiet_NaN();
    const double slack = 1e-14;
    g.passed = g.gap_u <= g.sum_u * (1.0 + slack) + slack && g.gap_G <= g.sum_G * (1.0 + slack) + slack;
    return g;
}

TimeProfile TimeProfile::sine_squared(double T) {
    const double w = std::numbers::pi / T;
    return {[w](double t) { return std::pow(std::sin(w * t), 2); },
            [w](double t) { return w * std::sin(2.0 * w * t); }};
}

double weak_residual(const Trajectory& traj, const TimeProfile& sigma, std::span<const double> theta) {
    check_theta(traj, theta);
    const auto& sc = traj.scenario;
    check_sigma(sigma, sc.final_time);
    const auto& mesh = sc.mesh;
    const std::size_t nx = mesh.nodes();
    const auto m = mesh.lumped_mass();
    const double tau = sc.tau();
    std::vector<double> u(nx), s(nx), scratch(sc.op.grid.count());
    double total = 0.0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const auto& a = traj.states[i - 1];
        const auto& b = traj.states[i];
        const double t0 = sc.time(i - 1);
        for (std::size_t q = 0; q < kGaussX.size(); ++q) {
            const double theta_t = kGaussX[q];
            const double t = t0 + theta_t * tau;
            double mass_term = 0.0;
            for (std::size_t k = 0; k < nx; ++k) {
                u[k] = (1.0 - theta_t) * a.u[k] + theta_t * b.u[k];
                s[k] = preisach_step_into(u[k], a.memory.row(k), scratch, mesh.x(k), sc.op);
                mass_term += m[k] * s[k] * theta[k];
            }
            const double integrand =
                -sigma.derivative(t) * mass_term + sigma.value(t) * spatial_terms(sc, u, s, sc.laws.u_star.at(t), theta);
            total += kGaussW[q] * tau * integrand;
        }
    }
    return std::abs(total);
}

double discrete_weak_residual(const Trajectory& traj, const TimeProfile& sigma, std::span<const double> theta) {
    check_theta(traj, theta);
    const auto& sc = traj.scenario;
    check_sigma(sigma, sc.final_time);
    const auto m = sc.mesh.lumped_mass();
    const double tau = sc.tau();
    double total = 0.0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const auto& a = traj.states[i - 1];
        const auto& b = traj.states[i];
        const double t0 = sc.time(i - 1);
        double mass_a = 0.0, mass_b = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k) {
            mass_a += m[k] * a.s[k] * theta[k];
            mass_b += m[k] * b.s[k] * theta[k];
        }
        const double spatial = spatial_terms(sc, b.u, b.s, sc.laws.u_star.at(sc.time(i)), theta);
        for (std::size_t q = 0; q < kGaussX.size(); ++q) {
            const double theta_t = kGaussX[q];
            const double t = t0 + theta_t * tau;
            const double ghat = (1.0 - theta_t) * mass_a + theta_t * mass_b;
            total += kGaussW[q] * tau * (-sigma.derivative(t) * ghat + sigma.value(t) * spatial);
        }
    }
    return std::abs(total);
}

double philog_luxemburg_integral(const Trajectory& traj) {
    const auto& sc = traj.scenario;
    const auto m = sc.mesh.lumped_mass();
    const double tau = sc.tau();
    const auto plog = YoungFunction::philog();
    const std::size_t n = traj.states.size() - 1;
    double total = 0.0;
    std::vector<double> rate(n);
    for (std::size_t k = 0; k < m.size(); ++k) {
        for (std::size_t i = 1; i <= n; ++i) rate[i - 1] = (traj.states[i].u[k] - traj.states[i - 1].u[k]) / tau;
        total += m[k] * luxemburg_norm(SampledFunction::uniform(rate, sc.final_time), plog);
    }
    return total;
}

std::vector<EstimateReport> run_estimate_suite(const Trajectory& traj) {
    const auto& sc = traj.scenario;
    const std::string ctx = context_of(traj);
    const double tol = sc.solver.tol;
    std::vector<EstimateReport> out;
    const auto add = [&](std::string name, double measured, std::optional<double> bound, bool ok,
                         std::string detail = {}) {
        out.push_back({std::move(name), measured, bound, ok ? Status::pass : Status::fail, ctx, std::move(detail)});
    };

    const double U = sc.U();
    double max_u = 0.0, max_dev = 0.0;
    for (const auto& st : traj.states)
        for (std::size_t k = 0; k < st.u.size(); ++k) {
            max_u = std::max(max_u, std::abs(st.u[k]));
            max_dev = std::max(max_dev, std::abs(st.s[k] - sc.op.offset));
        }
    add("max_principle", max_u, U + 10.0 * tol, max_u <= U + 10.0 * tol);

    const auto xs = sc.mesh.coordinates();
    const double rho1 = density_bounds(sc.op.density, U, xs, 64).rho1;
    double Uw = U;
    if (sc.op.outer) Uw = std::max({U, std::abs((*sc.op.outer)(U)), std::abs((*sc.op.outer)(-U))});
    const double out_bound = rho1 * Uw * Uw / 2.0;
    add("output_bound", max_dev, out_bound, max_dev <= out_bound * (1.0 + 1e-12) + 1e-12);

    double mass = 0.0, diss = 0.0;
    for (const auto& row : traj.rows) {
        mass = std::max(mass, std::abs(row.mass_residual) / row.mass_scale);
        diss = std::max(diss, row.dissipation);
    }
    add("mass_balance", mass, 10.0 * tol, mass <= 10.0 * tol, "scaled by max(1, integral |s|)");
    add("dissipation", diss, 1e-12, diss <= 1e-12);

    add("energy", energy_sum(traj), std::nullopt, true);
    const double plsum = philog_increment_sum(traj);
    add("philog_sum", plsum, std::nullopt, true);

    const auto gap = interpolant_gap(traj);
    std::ostringstream gd;
    gd << "alpha=" << gap.alpha << " gap/alpha=" << gap.gap_u / gap.alpha;
    add("gap_u", gap.gap_u, gap.sum_u, gap.gap_u <= gap.sum_u * (1.0 + 1e-14) + 1e-14, gd.str());
    add("gap_G", gap.gap_G, gap.sum_G, gap.gap_G <= gap.sum_G * (1.0 + 1e-14) + 1e-14);

    const auto lux = philog_luxemburg_integral(traj);
    const double lux_bound = plsum + sc.mesh.length();
    add("philog_luxemburg", lux, lux_bound, lux <= lux_bound * (1.0 + 1e-12));

    const auto sigma = TimeProfile::sine_squared(sc.final_time);
    const std::vector<double> ones(sc.mesh.nodes(), 1.0);
    try {
        add("weak_residual", weak_residual(traj, sigma, ones), std::nullopt, true, "sigma=sin^2(pi t/T), theta=1");
    } catch (const Error& e) {
        add("weak_residual", std::numeric_limits<double>::quiet_NaN(), std::nullopt, false, e.what());
    }
    double mscale = 1.0;
    for (const auto& row : traj.rows) mscale = std::max(mscale, row.mass_scale);
    const double dbound = 10.0 * tol * mscale * sc.final_time / sc.tau();
    try {
        const double dres = discrete_weak_residual(traj, sigma, ones);
        add("discrete_weak_residual", dres, dbound, dres <= dbound);
    } catch (const Error& e) {
        add("discrete_weak_residual", std::numeric_limits<double>::quiet_NaN(), dbound, false, e.what());
    }
    return out;
}

}  // namespace hyst
