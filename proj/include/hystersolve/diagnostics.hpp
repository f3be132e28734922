#pragma once

// Post-processing of trajectories: uniform bounds, energy and Phi_log sums,
// the discrete convexity inequality, interpolant gaps and weak-form residuals.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hystersolve/hysteresis.hpp"
#include "hystersolve/report.hpp"
#include "hystersolve/stepper.hpp"

namespace hyst {

struct EstimateReport {
    std::string name;
    double measured = 0.0;
    std::optional<double> bound;
    Status status = Status::pass;
    std::string context;
    std::string detail;
};

bool any_failed(const std::vector<EstimateReport>& reports);

/// sum_i integral |u_{i+1} - u_i| log(1 + |u_{i+1} - u_i| / tau) dx, nodal quadrature.
double philog_increment_sum(const Trajectory& traj);

/// tau * sum_{i=0..n} (integral |u_i'|^2 + gamma_L u_i(0)^2 + gamma_R u_i(L)^2).
double energy_sum(const Trajectory& traj);

// f(w) = w / (tau + |w|) and its primitives
double convexity_f(double w, double tau);
double convexity_F(double w, double tau);
double convexity_Gamma(double w, double tau);

struct ConvexityReport {
    double lhs = 0.0;
    double rhs = 0.0;             ///< sum of Gamma(w_{i+1} - w_i)
    double quotient_term = 0.0;   ///< (P_0 - P_{-1}) / (w_0 - w_{-1}) F(w_0 - w_{-1})
    double beta_hat = 0.0;        ///< 2 lhs / rhs, infinite when rhs = 0
    bool passed = true;
};

/// Discrete convexity inequality for a Prandtl-Ishlinskii operator (density
/// independent of v, positive) driven from virgin memory by w_{-1}, w_0..w_n.
ConvexityReport convexity_inequality_check(const PreisachOperator& op, std::span<const double> w, double w_minus1,
                                           double tau, double x = 0.0);

/// max of log(1+2U)/log(1+tau^{-1/2}), tau^{1/2}/log 2 and 2 tau^{1/2}, 0 < tau < 1.
double alpha_tau(double tau, double U);

/// Largest sampled log(1+v)/log(1+v/tau) over `samples` midpoints of (0, 2U).
double alpha_sweep(double tau, double U, std::size_t samples = 10000);

struct InterpolantGap {
    double gap_u = 0.0;   ///< integral Phi_log(max_i |u_i - u_{i-1}|)
    double gap_G = 0.0;   ///< same for the saturations
    double sum_u = 0.0;   ///< sum_i integral Phi_log(|u_i - u_{i-1}|)
    double sum_G = 0.0;
    double alpha = 0.0;   ///< alpha_tau(tau, U), NaN when tau >= 1
    bool passed = true;   ///< gap <= sum for both fields
};

InterpolantGap interpolant_gap(const Trajectory& traj);

/// Smooth time profile with derivative; must vanish at 0 and T.
struct TimeProfile {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    /// sin^2(pi t / T).
    static TimeProfile sine_squared(double T);
};

/// Limit weak form evaluated on the computed interpolants: the Preisach
/// operator applied to the piecewise linear pressure, kappa at that
/// saturation, and the continuous boundary datum. Absolute value.
double weak_residual(const Trajectory& traj, const TimeProfile& sigma, std::span<const double> theta);

/// Weak form written with the scheme's own interpolants (Ghat, ubar, ubar*);
/// vanishes up to the nonlinear solver tolerance.
double discrete_weak_residual(const Trajectory& traj, const TimeProfile& sigma, std::span<const double> theta);

/// integral over x of the Luxemburg Phi_log norm in time of the piecewise
/// constant u_t; bounded by philog_increment_sum + |Omega|.
double philog_luxemburg_integral(const Trajectory& traj);

std::vector<EstimateReport> run_estimate_suite(const Trajectory& traj);

}  // namespace hyst
