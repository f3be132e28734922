#pragma once

// Command implementations behind the `hystersolve` executable. Each returns
// the process exit code and writes human output to `out`, errors to `err`.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hystersolve/stepper.hpp"

namespace hyst {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int step_failure = 1;
inline constexpr int estimate_failure = 2;
inline constexpr int config_failure = 3;
}  // namespace exit_code

struct CliOptions {
    bool force = false;                   ///< run even when the initial data are incompatible
    std::optional<std::string> out_dir;   ///< overrides output.directory
};

struct RefinementLevel {
    std::size_t steps = 0;
    double tau = 0.0;
    double philog_sum = 0.0;
    double energy = 0.0;
    double gap_u = 0.0;
    double alpha = 0.0;
    double weak_residual = 0.0;
    double final_sup_diff = 0.0;  ///< max_k |u_n(T) - u_{2n}(T)| against the next level; 0 on the last
    double Y_diff = 0.0;          ///< ||uhat_n - uhat_{2n}||_Y against the next level; 0 on the last
};

struct RefinementStudy {
    std::vector<RefinementLevel> levels;
    std::vector<double> sup_orders;  ///< log2 of consecutive final_sup_diff ratios
    std::vector<double> Y_orders;
};

/// Runs `base` with steps, 2 steps, ..., 2^{levels-1} steps (concurrently) and
/// compares consecutive levels. Propagates StepFailure.
RefinementStudy run_refinement(const Scenario& base, int levels);

int cmd_run(const std::string& config_path, const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_refine(const std::string& config_path, int levels, const CliOptions& opts, std::ostream& out,
               std::ostream& err);
int cmd_check_compat(const std::string& config_path, std::ostream& out, std::ostream& err);

/// Norms of a sampled function. Two columns (coordinate, value) for the
/// Luxemburg and H/V/Vstar norms; columns x, t, value on a full uniform grid
/// for X and Y. Names: luxemburg:power=P, luxemburg:philog,
/// luxemburg:orlicz-log, luxemburg:exp, H, V, Vstar, X, Y.
int cmd_norms(const std::string& csv_path, const std::vector<std::string>& names, std::ostream& out,
              std::ostream& err);

}  // namespace hyst
