#pragma once

// Flat `section.key = value` configuration files. Every field has a fixed key;
// values are written with shortest round-trip formatting so that parsing a
// written config reproduces it exactly.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hystersolve/mesh.hpp"
#include "hystersolve/stepper.hpp"

namespace hyst {

struct DensitySpec {
    enum class Kind { constant, separable, tabulated };
    Kind kind = Kind::constant;
    double value = 1.0;  // constant
    double scale = 1.0;  // separable
    double x_slope = 0.0;
    double r_decay = 0.0;
    std::vector<double> v_breaks;
    std::vector<double> v_values{1.0};
    std::string file;  // tabulated, columns r, v, rho
    int panels = 64;

    bool operator==(const DensitySpec&) const = default;
};

struct OuterSpec {
    enum class Kind { none, arctan, cubic };
    Kind kind = Kind::none;
    double c = 1.0;  // arctan
    double a = 1.0;  // cubic
    double b = 0.0;

    bool operator==(const OuterSpec&) const = default;
};

/// constant: base. quadratic: base + amplitude 4 (x/L)(1 - x/L).
/// cosine: base + amplitude cos(pi x / L).
struct ProfileSpec {
    enum class Kind { constant, quadratic, cosine };
    Kind kind = Kind::constant;
    double base = 0.0;
    double amplitude = 0.0;

    bool operator==(const ProfileSpec&) const = default;
};

/// Initial play states lambda(x, r) in terms of w0 = g(u0(x)).
/// monotone: clamp(0; w0 - r, w0 + r), the state after loading from 0 to w0.
/// virgin: 0. peak: loaded to g(peak), then brought to w0.
/// file: bilinear table with columns x, r, lambda.
struct MemorySpec {
    enum class Kind { monotone, virgin, peak, file };
    Kind kind = Kind::monotone;
    double peak = 0.0;
    std::string file;

    bool operator==(const MemorySpec&) const = default;
};

struct SimulationConfig {
    double length = 1.0;
    std::size_t nodes = 101;
    double final_time = 1.0;
    std::size_t steps = 200;

    std::size_t thresholds = 128;
    double Lambda = 1.0;
    double offset = 0.0;
    DensitySpec density;
    OuterSpec outer;

    KappaLaw kappa;
    double gamma_left = 1.0;
    double gamma_right = 1.0;
    BoundaryFormula u_star_left;
    BoundaryFormula u_star_right;
    std::string u_star_file;  ///< columns time, left, right; overrides the formulas
    double u_star_bound = 1.0;

    ProfileSpec u0;
    MemorySpec lambda;
    std::optional<double> compat_L;
    std::optional<double> r0;

    SolverConfig solver;

    std::string output_directory = "out";
    std::size_t stride = 10;
    bool write_memory = false;

    bool operator==(const SimulationConfig&) const = default;
};

/// Parses without validating. Relative file paths are resolved against
/// `base_dir`. Throws ParseError with the offending line.
SimulationConfig parse_config_text(const std::string& text, const std::string& source = "<config>",
                                   const std::string& base_dir = ".");

/// Reads, parses and validates. Throws ParseError or ConfigError.
SimulationConfig parse_config(const std::string& path);

std::string write_config(const SimulationConfig& cfg);

/// Violated requirements, each tagged with the hypothesis it belongs to.
std::vector<std::string> validate_config(const SimulationConfig& cfg);

/// Builds the scenario; the threshold grid spans (0, max(U, |g(+-U)|)) with
/// U = max(U*, Lambda).
Scenario make_scenario(const SimulationConfig& cfg);

}  // namespace hyst
