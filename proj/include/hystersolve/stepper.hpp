#pragma once

// Implicit time stepping: one quasilinear elliptic solve per step by damped
// fixed-point iteration on a branch-slope linearization of the hysteresis.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hystersolve/hysteresis.hpp"
#include "hystersolve/mesh.hpp"
#include "hystersolve/report.hpp"

namespace hyst {

struct SolverConfig {
    double tol = 1e-10;
    int max_iter = 200;
    double relaxation = 0.8;
    int retries = 3;

    bool operator==(const SolverConfig&) const = default;
};

struct Scenario {
    Mesh1D mesh{1.0, 101};
    MaterialLaws laws;
    PreisachOperator op{ThresholdGrid(128, 1.0), PreisachDensity()};
    std::function<double(double)> u0;
    std::function<double(double)> u0_dx;              ///< optional; finite differences when empty
    std::function<double(double, double)> lambda;     ///< initial memory of the play inputs, (x, r)
    double Lambda = 1.0;
    double final_time = 1.0;
    std::size_t steps = 200;
    SolverConfig solver;
    std::optional<double> compat_L;
    std::optional<double> r0;

    /// max(U*, Lambda): the a priori bound of |u|.
    double U() const { return std::max(laws.u_star_bound, Lambda); }
    double tau() const { return final_time / static_cast<double>(steps); }
    double time(std::size_t i) const { return final_time * static_cast<double>(i) / static_cast<double>(steps); }
};

struct StepState {
    std::size_t index = 0;
    double time = 0.0;
    std::vector<double> u;
    std::vector<double> s;
    MemoryState memory;
    int iterations = 0;
    double residual = 0.0;  ///< relative sup-norm of the nonlinear residual
};

struct DiagnosticsRow {
    std::size_t step = 0;
    double time = 0.0;
    double max_abs_u = 0.0;
    double mass_residual = 0.0;    ///< tau * sum of nodal residuals (signed)
    double mass_scale = 1.0;       ///< max(1, sum m |s_i|)
    double energy_grad = 0.0;      ///< integral of |u_x|^2
    double energy_boundary = 0.0;  ///< gamma_L u(0)^2 + gamma_R u(L)^2
    double psi_total = 0.0;        ///< integral over x and r of Psi(xi)
    double philog_increment = 0.0; ///< integral of |du| log(1 + |du| / tau)
    double dissipation = 0.0;      ///< largest scaled violation of the dissipation inequality
    int solver_iters = 0;
    double solver_residual = 0.0;
};

struct Trajectory {
    Scenario scenario;
    std::vector<StepState> states;
    std::vector<DiagnosticsRow> rows;
};

/// Memory, saturation and pressure at t = 0.
StepState initial_state(const Scenario& sc);

/// One implicit step from `prev` to time prev.time + tau. Throws StepFailure.
StepState solve_step(const StepState& prev, std::pair<double, double> u_star_now, const Mesh1D& mesh,
                     const MaterialLaws& laws, const PreisachOperator& op, double tau, const SolverConfig& cfg);

/// Per-step diagnostics of the transition prev -> cur.
DiagnosticsRow step_diagnostics(const Scenario& sc, const StepState& prev, const StepState& cur);

using StepCallback = std::function<void(const StepState&)>;

Trajectory run_simulation(const Scenario& sc, const StepCallback& on_step = {});

struct CompatItem {
    std::string name;
    Status status = Status::pass;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct CompatReport {
    std::vector<CompatItem> items;
    std::vector<double> x;
    std::vector<double> divergence;  ///< discrete div(kappa(x, s0) u0')
    std::vector<double> r0;
    double L = 1.0;

    bool failed() const;
    const CompatItem* find(const std::string& name) const;
};

/// Initial compatibility (c0, c0a, c1, c2, c2a) and the backward-step bound.
CompatReport check_initial_compatibility(const Scenario& sc);

/// hat: piecewise linear in time. bar: u_i on (t_{i-1}, t_i], u_0 at t = 0.
struct Interpolants {
    enum class Mode { hat, bar };
    enum class Field { u, s };
    const Trajectory* trajectory = nullptr;
    Mode mode = Mode::hat;
    Field field = Field::u;
};

double interpolant_eval(const Interpolants& interp, std::size_t node, double t);

}  // namespace hyst
