#pragma once

// Young functions, conjugates and Luxemburg norms, plus the sine/cosine series
// norms used for time and space-time fields.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hystersolve/mesh.hpp"

namespace hyst {

class YoungFunction {
public:
    enum class Kind { power, orlicz_log, exp_minus_linear, philog, custom, conjugate };

    /// Phi(u) = coefficient * u^p, p > 1.
    static YoungFunction power(double p, double coefficient = 1.0);
    /// Phi(u) = (1 + u) log(1 + u) - u, generator log(1 + u).
    static YoungFunction orlicz_log();
    /// Phi(u) = e^u - u - 1, generator e^u - 1.
    static YoungFunction exp_minus_linear();
    /// Phi(u) = u log(1 + u).
    static YoungFunction philog();
    /// Generator phi tabulated at increasing nodes starting at (0, 0); linear
    /// in between and extrapolated with the last slope.
    static YoungFunction custom(std::vector<double> u_nodes, std::vector<double> phi_values);
    /// Phi*(v) = v phi^{-1}(v) - Phi(phi^{-1}(v)).
    static YoungFunction conjugate_of(const YoungFunction& base);

    double operator()(double u) const;
    double generator(double u) const;
    double generator_inverse(double v) const;

    Kind kind() const noexcept { return kind_; }
    std::string name() const;

    /// Sampled check of convexity, Phi(0) = 0 and the limits of Phi(u)/u.
    bool looks_strict() const;

private:
    YoungFunction() = default;

    Kind kind_ = Kind::power;
    double p_ = 2.0;
    double coefficient_ = 1.0;
    std::vector<double> nodes_, phi_, cumulative_;
    std::shared_ptr<const YoungFunction> base_;
};

/// sup over u >= 0 of (u v - Phi(u)) through the inverse generator.
double young_conjugate(const YoungFunction& phi, double v);

/// Samples with positive quadrature weights summing to the domain measure.
struct SampledFunction {
    std::vector<double> values;
    std::vector<double> weights;

    static SampledFunction uniform(std::vector<double> values, double measure);
    static SampledFunction trapezoid(std::vector<double> values, double length);

    double measure() const;
    double integral() const;
};

double luxemburg_norm(const SampledFunction& f, const YoungFunction& phi);

struct HolderReport {
    double pairing = 0.0;  ///< integral of |f g|
    double norm_f = 0.0;
    double norm_g = 0.0;   ///< in the conjugate norm
    double bound = 0.0;    ///< 2 |f| |g|
    bool passed = true;
};

HolderReport holder_pairing_check(const SampledFunction& f, const SampledFunction& g, const YoungFunction& phi);

struct ScalingReport {
    bool applicable = false;
    double norm = 0.0;
    double bound = 0.0;   ///< a * integral Phi(|f| / a)
    double margin = 0.0;  ///< bound - norm
    bool passed = true;
};

ScalingReport scaling_bound_check(const SampledFunction& f, const YoungFunction& phi, double a);

struct TimeNorms {
    double H = 0.0;
    double V = 0.0;
    double Vstar = 0.0;
    std::vector<double> coefficients;  ///< v_1 .. v_J
};

/// Sine-series norms of uniform samples on [0, T] (trapezoid projection).
/// Modes 1..modes; modes = 0 means sample count - 1.
TimeNorms sobolev_time_norms(std::span<const double> samples, double T, std::size_t modes = 0);

struct SpaceTimeNorms {
    double X = 0.0;
    double Y = 0.0;
};

/// field[i][k]: time level i (uniform on [0, T]) at mesh node k. Neumann cosine
/// modes 0..nodes-2 in x, sine modes 1..levels-2 in t.
SpaceTimeNorms space_time_norms(const std::vector<std::vector<double>>& field, const Mesh1D& mesh, double T);

struct EquivalenceReport {
    double worst_lower = 0.0;  ///< max of Phi - Phi_log (should be <= 0)
    double worst_upper = 0.0;  ///< max of Phi_log - 2 Phi (should be <= 0)
    bool passed = true;
};

/// Phi <= Phi_log <= 2 Phi with Phi = (1 + u) log(1 + u) - u.
EquivalenceReport philog_equivalence_check(std::span<const double> samples);

}  // namespace hyst
