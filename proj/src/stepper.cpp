#include "hystersolve/stepper.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hystersolve/errors.hpp"

namespace hyst {

namespace {

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

struct Attempt {
    bool converged = false;
    StepState state;
    int iterations = 0;
    double last_update = 0.0;
    std::string why;
};

// Fills memory and s for the nodal pressures u, starting from prev.memory.
void evaluate_hysteresis(const StepState& prev, std::span<const double> u, const Mesh1D& mesh,
                         const PreisachOperator& op, MemoryState& memory, std::vector<double>& s) {
    for (std::size_t k = 0; k < mesh.nodes(); ++k)
        s[k] = preisach_step_into(u[k], prev.memory.row(k), memory.row(k), mesh.x(k), op);
}

Attempt iterate(const StepState& prev, std::pair<double, double> u_star_now, const Mesh1D& mesh,
                const MaterialLaws& laws, const PreisachOperator& op, double tau, const SolverConfig& cfg,
                double omega) {
    const std::size_t n = mesh.nodes();
    const double U = op.range;
    Attempt out;
    std::vector<double> u = prev.u;
    std::vector<double> s(n);
    MemoryState trial(n, op.grid.count());
    HysteresisLinearization lin{std::vector<double>(n), std::vector<double>(n)};
    double rhs_scale = 1.0;

    for (int it = 1; it <= cfg.max_iter; ++it) {
        evaluate_hysteresis(prev, u, mesh, op, trial, s);
        const auto res = step_residual(mesh, laws, s, prev.s, u, u_star_now, tau);
        for (std::size_t k = 0; k < n; ++k) {
            const double w = op.play_input(u[k]);
            const double w_prev = op.play_input(prev.u[k]);
            int dir = sign_of(w - w_prev);
            if (dir == 0) dir = res[k] > 0.0 ? -1 : 1;
            lin.slopes[k] = branch_slope(trial.row(k), u[k], dir, mesh.x(k), op);
            lin.intercepts[k] = s[k] - lin.slopes[k] * u[k];
        }
        const auto sys = assemble_step_system(mesh, laws, s, prev.s, u_star_now, tau, lin);
        rhs_scale = std::max(1.0, sup_norm(sys.rhs));
        const auto u_solve = solve_tridiagonal(sys);

        double delta = 0.0;
        double size = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double target = std::clamp(u_solve[k], -U, U);
            const double next = (1.0 - omega) * u[k] + omega * target;
            delta = std::max(delta, std::abs(next - u[k]));
            size = std::max(size, std::abs(next));
            u[k] = next;
        }
        const double update = delta / std::max(1.0, size);
        out.iterations = it;
        out.last_update = update;
        if (!std::isfinite(update)) {
            out.why = "non-finite iterate";
            return out;
        }
        if (update <= cfg.tol) {
            evaluate_hysteresis(prev, u, mesh, op, trial, s);
            const auto final_res = step_residual(mesh, laws, s, prev.s, u, u_star_now, tau);
            out.state.index = prev.index + 1;
            out.state.time = prev.time + tau;
            out.state.u = std::move(u);
            out.state.s = std::move(s);
            out.state.memory = std::move(trial);
            out.state.iterations = it;
            out.state.residual = sup_norm(final_res) / rhs_scale;
            out.converged = true;
            return out;
        }
    }
    out.why = "iteration limit reached";
    return out;
}

}  // namespace

StepState initial_state(const Scenario& sc) {
    if (!sc.u0 || !sc.lambda) throw Error("scenario needs an initial pressure and an initial memory");
    const std::size_t n = sc.mesh.nodes();
    StepState st;
    st.u.resize(n);
    st.s.resize(n);
    st.memory = MemoryState(n, sc.op.grid.count());
    for (std::size_t k = 0; k < n; ++k) {
        const double x = sc.mesh.x(k);
        st.u[k] = sc.u0(x);
        for (std::size_t j = 0; j < sc.op.grid.count(); ++j) st.memory(k, j) = sc.lambda(x, sc.op.grid.r(j));
        st.s[k] = preisach_output(st.memory.row(k), x, sc.op);
    }
    return st;
}

StepState solve_step(const StepState& prev, std::pair<double, double> u_star_now, const Mesh1D& mesh,
                     const MaterialLaws& laws, const PreisachOperator& op, double tau, const SolverConfig& cfg) {
    if (prev.u.size() != mesh.nodes() || prev.s.size() != mesh.nodes() || prev.memory.nodes() != mesh.nodes() ||
        prev.memory.thresholds() != op.grid.count())
        throw DimensionError("previous state does not match the mesh and threshold grid");
    double omega = cfg.relaxation;
    int total = 0;
    Attempt a;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt, omega *= 0.5) {
        a = iterate(prev, u_star_now, mesh, laws, op, tau, cfg, omega);
        total += a.iterations;
        if (a.converged) {
            a.state.iterations = total;
            return std::move(a.state);
        }
    }
    throw StepFailure(prev.index + 1, total, a.last_update, a.why);
}

DiagnosticsRow step_diagnostics(const Scenario& sc, const StepState& prev, const StepState& cur) {
    const auto& mesh = sc.mesh;
    const auto& op = sc.op;
    const double tau = sc.tau();
    const auto m = mesh.lumped_mass();
    DiagnosticsRow row;
    row.step = cur.index;
    row.time = cur.time;
    row.max_abs_u = sup_norm(cur.u);

    const auto res = step_residual(mesh, sc.laws, cur.s, prev.s, cur.u, sc.laws.u_star.at(cur.time), tau);
    double total = 0.0, mass = 0.0;
    for (std::size_t k = 0; k < res.size(); ++k) {
        total += res[k];
        mass += m[k] * std::abs(cur.s[k]);
    }
    row.mass_residual = tau * total;
    row.mass_scale = std::max(1.0, mass);

    for (std::size_t e = 0; e + 1 < mesh.nodes(); ++e) {
        const double du = cur.u[e + 1] - cur.u[e];
        row.energy_grad += du * du / mesh.h();
    }
    row.energy_boundary = sc.laws.gamma_left * cur.u.front() * cur.u.front() +
                          sc.laws.gamma_right * cur.u.back() * cur.u.back();

    const double dr = op.grid.dr();
    for (std::size_t k = 0; k < mesh.nodes(); ++k) {
        const double x = mesh.x(k);
        const double w = op.play_input(cur.u[k]);
        double node_Psi = 0.0;
        for (std::size_t j = 0; j < op.grid.count(); ++j) {
            const double r = op.grid.r(j);
            const auto now = op.density.psi(x, r, cur.memory(k, j));
            const auto before = op.density.psi(x, r, prev.memory(k, j));
            node_Psi += now.Psi;
            const double lhs = (now.psi - before.psi) * w;
            const double rhs = now.Psi - before.Psi;
            const double viol = (rhs - lhs) / std::max(1.0, std::abs(lhs) + std::abs(rhs));
            row.dissipation = std::max(row.dissipation, viol);
        }
        row.psi_total += m[k] * node_Psi * dr;
        const double du = std::abs(cur.u[k] - prev.u[k]);
        row.philog_increment += m[k] * du * std::log1p(du / tau);
    }
    row.solver_iters = cur.iterations;
    row.solver_residual = cur.residual;
    return row;
}

Trajectory run_simulation(const Scenario& sc, const StepCallback& on_step) {
    if (sc.steps == 0) throw Error("number of time steps must be positive");
    if (!(sc.final_time > 0.0)) throw Error("final time must be positive");
    Trajectory traj{sc, {}, {}};
    traj.states.reserve(sc.steps + 1);
    traj.rows.reserve(sc.steps);
    traj.states.push_back(initial_state(sc));
    if (on_step) on_step(traj.states.back());
    const double tau = sc.tau();
    for (std::size_t i = 1; i <= sc.steps; ++i) {
        const auto& prev = traj.states.back();
        auto next = solve_step(prev, sc.laws.u_star.at(sc.time(i)), sc.mesh, sc.laws, sc.op, tau, sc.solver);
        next.time = sc.time(i);
        traj.rows.push_back(step_diagnostics(sc, prev, next));
        traj.states.push_back(std::move(next));
        if (on_step) on_step(traj.states.back());
    }
    return traj;
}

// ---------------------------------------------------------------------------
// initial compatibility

bool CompatReport::failed() const {
    for (const auto& it : items)
        if (it.status == Status::fail) return true;
    return false;
}

const CompatItem* CompatReport::find(const std::string& name) const {
    for (const auto& it : items)
        if (it.name == name) return &it;
    return nullptr;
}

CompatReport check_initial_compatibility(const Scenario& sc) {
    const auto& mesh = sc.mesh;
    const auto& op = sc.op;
    const std::size_t n = mesh.nodes();
    const auto st = initial_state(sc);
    const auto m = mesh.lumped_mass();
    CompatReport rep;
    rep.x = mesh.coordinates();
    rep.L = sc.compat_L.value_or(1.0);

    const auto fmt_x = [](double x) {
        std::ostringstream os;
        os << "x = " << x;
        return os.str();
    };

    // c0: lambda(x, 0) = g(u0(x))
    {
        CompatItem c{"c0", Status::pass, 0.0, 1e-9, {}};
        std::size_t worst = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d = std::abs(sc.lambda(rep.x[k], 0.0) - op.play_input(st.u[k]));
            if (d > c.measured) {
                c.measured = d;
                worst = k;
            }
        }
        if (c.measured > c.bound * std::max(1.0, sc.U())) {
            c.status = Status::fail;
            c.detail = "lambda(x,0) differs from the initial input at " + fmt_x(rep.x[worst]);
        }
        rep.items.push_back(c);
    }

    // c0a: s0 through the density, compared against a 4x finer threshold grid
    {
        CompatItem c{"c0a", Status::pass, 0.0, 1e-3, {}};
        PreisachOperator fine(ThresholdGrid(4 * op.grid.count(), op.grid.lambda_max()), op.density, op.offset,
                              op.outer);
        std::vector<double> row(fine.grid.count());
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < row.size(); ++j) row[j] = sc.lambda(rep.x[k], fine.grid.r(j));
            c.measured = std::max(c.measured, std::abs(preisach_output(row, rep.x[k], fine) - st.s[k]));
        }
        if (c.measured > c.bound) {
            c.status = Status::warn;
            c.detail = "threshold grid under-resolves the initial memory";
        }
        rep.items.push_back(c);
    }

    // discrete divergence, Robin flux included at the endpoints
    const auto u_star0 = sc.laws.u_star.at(0.0);
    auto div = stiffness_action(mesh, sc.laws.kappa, st.s, st.u);
    div.front() += sc.laws.gamma_left * (st.u.front() - u_star0.first);
    div.back() += sc.laws.gamma_right * (st.u.back() - u_star0.second);
    for (std::size_t k = 0; k < n; ++k) div[k] = -div[k] / m[k];
    rep.divergence = div;
    rep.r0.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        rep.r0[k] = sc.r0 ? *sc.r0 : std::min(sc.Lambda, std::sqrt(std::abs(div[k])) / rep.L);

    // c1: sqrt|div| / L <= r0 <= Lambda
    {
        CompatItem c{"c1", Status::pass, 0.0, 0.0, {}};
        std::size_t worst = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double lower = std::sqrt(std::abs(div[k])) / rep.L;
            const double v = std::max(lower - rep.r0[k], rep.r0[k] - sc.Lambda);
            if (v > c.measured) {
                c.measured = v;
                worst = k;
            }
        }
        if (c.measured > 1e-12) {
            c.status = Status::fail;
            c.detail = "r0 outside [sqrt|div|/L, Lambda] at " + fmt_x(rep.x[worst]);
        }
        rep.items.push_back(c);
    }

    // c2: -d lambda / dr in sign(div) on (0, r0)
    {
        CompatItem c{"c2", Status::pass, 0.0, 1e-6, {}};
        const double delta = 1e-7 * std::max(1.0, sc.Lambda);
        const double dscale = std::max(1.0, sup_norm(div));
        const int samples = 32;
        std::size_t worst = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r0 = rep.r0[k];
            const int sd = std::abs(div[k]) <= 1e-10 * dscale ? 0 : sign_of(div[k]);
            for (int q = 0; q < samples && r0 > 0.0; ++q) {
                const double r = r0 * (q + 0.5) / samples;
                const double h = std::min(delta, 0.5 * r);
                const double slope = -(sc.lambda(rep.x[k], r + h) - sc.lambda(rep.x[k], r - h)) / (2.0 * h);
                const double miss = sd == 0 ? std::max(std::abs(slope) - 1.0, 0.0) : std::abs(slope - sd);
                if (miss > c.measured) {
                    c.measured = miss;
                    worst = k;
                }
            }
        }
        if (c.measured > c.bound) {
            c.status = Status::fail;
            c.detail = "memory slope does not match sign(div) at " + fmt_x(rep.x[worst]);
        }
        rep.items.push_back(c);
    }

    // c2a: -kappa u0' n = gamma (u0 - u*(0)) at both ends
    {
        CompatItem c{"c2a", Status::pass, 0.0, 1e-8, {}};
        const auto du = [&](double x) {
            if (sc.u0_dx) return sc.u0_dx(x);
            const double h = 1e-6 * mesh.length();
            const double a = std::clamp(x - h, 0.0, mesh.length());
            const double b = std::clamp(x + h, 0.0, mesh.length());
            return (sc.u0(b) - sc.u0(a)) / (b - a);
        };
        const double kl = sc.laws.kappa(0.0, st.s.front());
        const double kr = sc.laws.kappa(mesh.length(), st.s.back());
        const double left = std::abs(kl * du(0.0) - sc.laws.gamma_left * (st.u.front() - u_star0.first));
        const double right = std::abs(-kr * du(mesh.length()) - sc.laws.gamma_right * (st.u.back() - u_star0.second));
        c.measured = std::max(left, right);
        if (c.measured > c.bound * std::max(1.0, sc.U())) {
            c.status = Status::fail;
            c.detail = left >= right ? "Robin data incompatible at x = 0" : "Robin data incompatible at x = L";
        }
        rep.items.push_back(c);
    }

    // backward step: |u0 - u_{-1}| / tau ~ |div| / B'(u0)
    {
        CompatItem c{"inim", Status::pass, 0.0, 0.0, {}};
        const double dscale = std::max(1.0, sup_norm(div));
        for (std::size_t k = 0; k < n; ++k) {
            if (std::abs(div[k]) <= 1e-10 * dscale) continue;
            const double slope = branch_slope(st.memory.row(k), st.u[k], sign_of(div[k]), rep.x[k], op);
            if (!(slope > 0.0)) {
                c.status = Status::fail;
                c.measured = std::numeric_limits<double>::infinity();
                c.detail = "flat branch with nonzero divergence at " + fmt_x(rep.x[k]);
                break;
            }
            c.measured = std::max(c.measured, std::abs(div[k]) / slope);
        }
        const auto xs = mesh.coordinates();
        const double rho0 = density_bounds(op.density, sc.U(), xs, 32).rho0;
        c.bound = rho0 / (2.0 * rep.L * rep.L);
        if (c.status == Status::pass && sc.tau() >= c.bound) {
            c.status = Status::warn;
            c.detail = "tau not below rho0 / (2 L^2)";
        }
        rep.items.push_back(c);
    }
    return rep;
}

double interpolant_eval(const Interpolants& interp, std::size_t node, double t) {
    if (!interp.trajectory) throw Error("interpolant without trajectory");
    const auto& traj = *interp.trajectory;
    const auto& sc = traj.scenario;
    const double T = sc.final_time;
    if (!(t >= 0.0 && t <= T)) throw RangeError("interpolant evaluated outside [0, T]");
    const std::size_t n = traj.states.size() - 1;
    if (n == 0) throw Error("trajectory has no steps");
    const auto value = [&](std::size_t i) {
        const auto& st = traj.states[i];
        const auto& v = interp.field == Interpolants::Field::u ? st.u : st.s;
        if (node >= v.size()) throw DimensionError("node index outside the mesh");
        return v[node];
    };
    const double tau = T / static_cast<double>(n);
    std::size_t i = static_cast<std::size_t>(std::ceil(t / tau));
    i = std::clamp<std::size_t>(i, 1, n);
    if (i > 1 && t <= sc.final_time * static_cast<double>(i - 1) / static_cast<double>(n)) --i;
    if (interp.mode == Interpolants::Mode::bar) return t == 0.0 ? value(0) : value(i);
    const double t0 = T * static_cast<double>(i - 1) / static_cast<double>(n);
    const double a = std::clamp((t - t0) / tau, 0.0, 1.0);
    return (1.0 - a) * value(i - 1) + a * value(i);
}

}  // namespace hyst
