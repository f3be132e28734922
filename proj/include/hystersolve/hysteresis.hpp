#pragma once

// Scalar hysteresis engine: discrete play operators, Preisach operators
// integrated over a threshold grid, the potentials psi/Psi, and the
// generalized Prandtl-Ishlinskii composition P o g.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hyst {

/// Midpoint grid of play thresholds r_j = (j - 1/2) * dr, dr = lambda_max / count.
class ThresholdGrid {
public:
    ThresholdGrid(std::size_t count, double lambda_max);

    std::size_t count() const noexcept { return count_; }
    double lambda_max() const noexcept { return lambda_max_; }
    double dr() const noexcept { return dr_; }
    double r(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * dr_; }
    std::vector<double> nodes() const;

    bool operator==(const ThresholdGrid&) const = default;

private:
    std::size_t count_;
    double lambda_max_;
    double dr_;
};

/// rho(x, r, v) = value.
struct ConstantDensity {
    double value = 1.0;
};

/// rho(x, r, v) = scale * (1 + x_slope * x) * exp(-r_decay * r) * V(v), where V
/// is piecewise constant: v_values[0] below v_breaks[0], v_values[k] on
/// [v_breaks[k-1], v_breaks[k]), v_values.back() above the last break.
struct SeparableDensity {
    double scale = 1.0;
    double x_slope = 0.0;
    double r_decay = 0.0;
    std::vector<double> v_breaks;
    std::vector<double> v_values{1.0};
};

/// x-independent table on a rectangular (r, v) grid, bilinear in between.
/// `values` is r-major: values[i * v_nodes.size() + k] = rho(r_nodes[i], v_nodes[k]).
/// r outside the table is clamped; v outside the table is a range error.
struct TabulatedDensity {
    std::vector<double> r_nodes;
    std::vector<double> v_nodes;
    std::vector<double> values;
    int simpson_panels = 64;
};

struct PsiPair {
    double psi = 0.0;  ///< integral of rho(x, r, v) dv over [0, xi]
    double Psi = 0.0;  ///< integral of v rho(x, r, v) dv over [0, xi]
};

class PreisachDensity {
public:
    using Model = std::variant<ConstantDensity, SeparableDensity, TabulatedDensity>;

    PreisachDensity();
    explicit PreisachDensity(Model model);

    static PreisachDensity constant(double value);
    /// Reads a CSV with header and columns (r, v, rho) covering a full grid.
    static PreisachDensity from_csv(const std::string& path, int simpson_panels = 64);

    double operator()(double x, double r, double v) const;
    PsiPair psi(double x, double r, double xi) const;

    /// Admissible v interval; infinite for the analytic kinds.
    std::pair<double, double> v_range() const;
    bool v_independent() const;
    const Model& model() const noexcept { return model_; }

private:
    Model model_;
};

/// Sampled bounds of a density on (0,U) x (-U,U) at the given positions.
struct DensityBounds {
    double rho0 = 0.0;     ///< smallest sampled value
    double rho1 = 0.0;     ///< largest sampled value
    double rho_bar = 0.0;  ///< largest sampled spatial difference quotient
    bool regular() const noexcept { return rho0 > 0.0; }
};

DensityBounds density_bounds(const PreisachDensity& density, double U, std::span<const double> xs,
                             std::size_t samples = 64);

/// Smooth increasing outer function of a generalized Prandtl-Ishlinskii operator.
class OuterFunction {
public:
    enum class Kind { arctan, cubic };

    /// g(u) = c * atan(u / c).
    static OuterFunction arctan(double c);
    /// g(u) = a u + b u^3, a > 0, b >= 0.
    static OuterFunction cubic(double a, double b);

    double operator()(double u) const;
    double derivative(double u) const;
    double second_derivative(double u) const;

    Kind kind() const noexcept { return kind_; }
    double p1() const noexcept { return p1_; }
    double p2() const noexcept { return p2_; }

    bool operator==(const OuterFunction&) const = default;

private:
    OuterFunction(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}
    Kind kind_;
    double p1_;
    double p2_;
};

struct OuterBounds {
    double g_star = 0.0;  ///< min g' on [-U, U]
    double g_sup = 0.0;   ///< max g' on [-U, U]
    double g_bar = 0.0;   ///< max |g''| on [-U, U]
};

/// Derivative bounds on [-U, U], from the closed-form derivatives.
OuterBounds outer_bounds(const OuterFunction& g, double U);

/// Finite-difference check of g(0) = 0, g_star <= g' <= g_sup and |g''| <= g_bar.
/// Returns the list of violated items (empty when all hold).
std::vector<std::string> verify_outer(const OuterFunction& g, double U);

/// G[u] = offset + integral over r of psi(x, r, xi^r) with input g(u) when
/// `outer` is present. `range` is the declared input bound U.
struct PreisachOperator {
    PreisachOperator(ThresholdGrid grid, PreisachDensity density, double offset = 0.0,
                     std::optional<OuterFunction> outer = std::nullopt);

    ThresholdGrid grid;
    PreisachDensity density;
    double offset;
    std::optional<OuterFunction> outer;
    double range;

    /// Input actually seen by the play operators.
    double play_input(double u) const { return outer ? (*outer)(u) : u; }
};

/// Dense per-node, per-threshold play states.
class MemoryState {
public:
    MemoryState() = default;
    MemoryState(std::size_t nodes, std::size_t thresholds, double fill = 0.0);

    std::size_t nodes() const noexcept { return nodes_; }
    std::size_t thresholds() const noexcept { return thresholds_; }

    std::span<double> row(std::size_t node) { return {values_.data() + node * thresholds_, thresholds_}; }
    std::span<const double> row(std::size_t node) const {
        return {values_.data() + node * thresholds_, thresholds_};
    }
    double operator()(std::size_t node, std::size_t j) const { return values_[node * thresholds_ + j]; }
    double& operator()(std::size_t node, std::size_t j) { return values_[node * thresholds_ + j]; }

    bool operator==(const MemoryState&) const = default;

private:
    std::size_t nodes_ = 0;
    std::size_t thresholds_ = 0;
    std::vector<double> values_;
};

/// Discrete play: min(u + r, max(u - r, xi_prev)). Throws InvalidThreshold for r < 0.
double play_update(double u, double xi_prev, double r);

/// Folds play_update over `inputs` starting from xi0.
std::vector<double> play_sequence(std::span<const double> inputs, double xi0, double r);

PsiPair psi_and_Psi(double x, double r, double xi, const PreisachDensity& density);

/// offset + sum_j psi(x, r_j, xi_j) dr.
double preisach_output(std::span<const double> memory_row, double x, const PreisachOperator& op);

struct PreisachStep {
    double s;
    std::vector<double> memory;
};

/// Updates every threshold with input u (through g when present) and
/// evaluates the output. Throws RangeError when |u| exceeds op.range.
PreisachStep preisach_step(double u, std::span<const double> memory_row, double x, const PreisachOperator& op);

/// Allocation-free form of preisach_step writing the new row into `out`.
double preisach_step_into(double u, std::span<const double> memory_row, std::span<double> out, double x,
                          const PreisachOperator& op);

/// One-sided derivative of the local Preisach branch at input u in the
/// direction +1 (ascending) or -1 (descending).
double branch_slope(std::span<const double> memory_row, double u, int direction, double x,
                    const PreisachOperator& op);

struct SaturationReport {
    struct Sample {
        double x;
        double positive;  ///< integral over the reachable set with v > 0
        double negative;  ///< same for v < 0
        bool passed;
    };
    std::vector<Sample> samples;
    bool passed = true;
};

/// Checks the physical range condition s in [0, 1] over the reachable
/// triangle r + |v| <= U at the sampled positions. Report only.
SaturationReport saturation_range_check(const PreisachOperator& op, std::span<const double> xs);

/// Violations of admissibility, r-Lipschitz continuity and the support bound
/// |xi^r| <= (U - r)^+ for one memory row after input w (already through g).
struct MemoryCheck {
    double admissibility = 0.0;  ///< max(|w - xi_j| - r_j, 0)
    double lipschitz = 0.0;      ///< max(|xi_{j+1} - xi_j| - dr, 0)
    double support = 0.0;       ///< max(|xi_j| - (U - r_j)^+, 0)
};

MemoryCheck check_memory_row(std::span<const double> row, double w, const ThresholdGrid& grid, double U);

}  // namespace hyst
