#include "hystersolve/errors.hpp"

#include <sstream>

namespace hyst {

InvalidThreshold::InvalidThreshold(double r)
    : Error("invalid threshold: r = " + std::to_string(r) + " (must be >= 0)") {}

SingularSystem::SingularSystem(std::size_t row_, double pivot)
    : Error("singular tridiagonal system: pivot " + std::to_string(pivot) + " at row " +
            std::to_string(row_)),
      row(row_) {}

namespace {

std::string step_message(std::size_t step, int iterations, double last_update, const std::string& why) {
    std::ostringstream os;
    os << "step " << step << " failed after " << iterations << " iterations (last update "
       << last_update << ")";
    if (!why.empty()) os << ": " << why;
    return os.str();
}

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
}

}  // namespace

StepFailure::StepFailure(std::size_t step_, int iterations_, double last_update_, const std::string& why)
    : Error(step_message(step_, iterations_, last_update_, why)),
      step(step_),
      iterations(iterations_),
      last_update(last_update_) {}

ParseError::ParseError(const std::string& source, std::size_t line_, const std::string& what)
    : Error(source + (line_ ? ":" + std::to_string(line_) : std::string{}) + ": " + what), line(line_) {}

ConfigError::ConfigError(std::vector<std::string> v) : Error(join_violations(v)), violations(std::move(v)) {}

}  // namespace hyst
