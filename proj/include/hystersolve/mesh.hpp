#pragma once

// P1 finite elements on a uniform 1-D mesh with a lumped mass matrix, a
// saturation dependent permeability and Robin data at both endpoints.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hyst {

class Mesh1D {
public:
    Mesh1D(double length, std::size_t nodes);

    double length() const noexcept { return length_; }
    std::size_t nodes() const noexcept { return nodes_; }
    double h() const noexcept { return h_; }
    double x(std::size_t k) const noexcept {
        return k + 1 == nodes_ ? length_ : static_cast<double>(k) * h_;
    }
    std::vector<double> coordinates() const;
    /// h/2 at the endpoints, h inside.
    std::vector<double> lumped_mass() const;

    bool operator==(const Mesh1D&) const = default;

private:
    double length_;
    std::size_t nodes_;
    double h_;
};

/// kappa(x, s) = base + x_coeff * x + s_coeff * clamp(s, 0, 1)^exponent.
struct KappaLaw {
    double base = 1.0;
    double x_coeff = 0.0;
    double s_coeff = 0.0;
    double exponent = 1.0;

    double operator()(double x, double s) const;

    // bounds over x in [0, L] and all s
    double kappa_star(double L) const;
    double kappa_sup(double L) const;
    double kappa_bar() const;

    bool operator==(const KappaLaw&) const = default;
};

/// Scalar boundary datum of time.
struct BoundaryFormula {
    enum class Kind { constant, ramp, sinusoid };
    Kind kind = Kind::constant;
    double value = 0.0;      // constant value, ramp start, sinusoid mean
    double to = 0.0;         // ramp end value
    double duration = 1.0;   // ramp duration, held afterwards
    double amplitude = 0.0;  // sinusoid amplitude
    double period = 1.0;     // sinusoid period

    double operator()(double t) const;
    double bound() const;  ///< sup over t >= 0 of |value|

    bool operator==(const BoundaryFormula&) const = default;
};

/// u* at the two endpoints: formulas, or a table (time, left, right) linear in t.
class BoundaryData {
public:
    BoundaryData() = default;
    BoundaryData(BoundaryFormula left, BoundaryFormula right);
    static BoundaryData from_table(std::vector<double> times, std::vector<double> left, std::vector<double> right);
    static BoundaryData from_csv(const std::string& path);

    std::pair<double, double> at(double t) const;
    double bound() const;
    bool tabulated() const noexcept { return !times_.empty(); }

    const BoundaryFormula& left_formula() const noexcept { return left_; }
    const BoundaryFormula& right_formula() const noexcept { return right_; }
    const std::vector<double>& times() const noexcept { return times_; }

    bool operator==(const BoundaryData&) const = default;

private:
    BoundaryFormula left_;
    BoundaryFormula right_;
    std::vector<double> times_, left_values_, right_values_;
};

struct MaterialLaws {
    KappaLaw kappa;
    double gamma_left = 1.0;
    double gamma_right = 1.0;
    BoundaryData u_star;
    double u_star_bound = 1.0;

    /// Violated hypotheses, each tagged "hy2: ...". Empty when valid.
    std::vector<std::string> validate(double length, double final_time) const;

    bool operator==(const MaterialLaws&) const = default;
};

struct TridiagonalSystem {
    std::vector<double> lower;  ///< lower[k] couples row k to k-1; lower[0] unused
    std::vector<double> diag;
    std::vector<double> upper;  ///< upper[k] couples row k to k+1; last unused
    std::vector<double> rhs;

    explicit TridiagonalSystem(std::size_t n = 0) : lower(n), diag(n), upper(n), rhs(n) {}
    std::size_t size() const noexcept { return diag.size(); }
    /// A * u.
    std::vector<double> apply(std::span<const double> u) const;
};

/// Nodal affine model s ~ slope * u + intercept of the hysteresis term.
struct HysteresisLinearization {
    std::vector<double> slopes;
    std::vector<double> intercepts;
};

/// Element permeabilities kappa(x_mid, (s_k + s_{k+1}) / 2).
std::vector<double> element_kappa(const Mesh1D& mesh, const KappaLaw& kappa, std::span<const double> s);

/// K(s) u: the stiffness action without boundary terms.
std::vector<double> stiffness_action(const Mesh1D& mesh, const KappaLaw& kappa, std::span<const double> s,
                                     std::span<const double> u);

/// Nodal residual m (s - s_prev) / tau + K(s) u + Robin flux of the fully
/// nonlinear discrete system.
std::vector<double> step_residual(const Mesh1D& mesh, const MaterialLaws& laws, std::span<const double> s,
                                  std::span<const double> s_prev, std::span<const double> u,
                                  std::pair<double, double> u_star_now, double tau);

TridiagonalSystem assemble_step_system(const Mesh1D& mesh, const MaterialLaws& laws, std::span<const double> s_field,
                                       std::span<const double> s_prev, std::pair<double, double> u_star_now,
                                       double tau, const HysteresisLinearization& lin);

/// Thomas algorithm. Throws SingularSystem on a vanishing pivot.
std::vector<double> solve_tridiagonal(const TridiagonalSystem& system);

}  // namespace hyst
