#include "hystersolve/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hystersolve/csv.hpp"
#include "hystersolve/errors.hpp"

namespace hyst {

Mesh1D::Mesh1D(double length, std::size_t nodes) : length_(length), nodes_(nodes) {
    if (!(length > 0.0) || !std::isfinite(length)) throw Error("mesh length must be positive");
    if (nodes < 2) throw Error("mesh needs at least two nodes");
    h_ = length / static_cast<double>(nodes - 1);
}

std::vector<double> Mesh1D::coordinates() const {
    std::vector<double> out(nodes_);
    for (std::size_t k = 0; k < nodes_; ++k) out[k] = x(k);
    return out;
}

std::vector<double> Mesh1D::lumped_mass() const {
    std::vector<double> m(nodes_, h_);
    m.front() = m.back() = 0.5 * h_;
    return m;
}

double KappaLaw::operator()(double x, double s) const {
    const double sc = std::clamp(s, 0.0, 1.0);
    return base + x_coeff * x + s_coeff * (exponent == 1.0 ? sc : std::pow(sc, exponent));
}

double KappaLaw::kappa_star(double L) const {
    return base + std::min(0.0, x_coeff * L) + std::min(0.0, s_coeff);
}

double KappaLaw::kappa_sup(double L) const {
    return base + std::max(0.0, x_coeff * L) + std::max(0.0, s_coeff);
}

double KappaLaw::kappa_bar() const { return std::max(std::abs(x_coeff), std::abs(s_coeff) * exponent); }

double BoundaryFormula::operator()(double t) const {
    switch (kind) {
        case Kind::constant: return value;
        case Kind::ramp: return t >= duration ? to : value + (to - value) * t / duration;
        case Kind::sinusoid: return value + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
    }
    return value;
}

double BoundaryFormula::bound() const {
    switch (kind) {
        case Kind::constant: return std::abs(value);
        case Kind::ramp: return std::max(std::abs(value), std::abs(to));
        case Kind::sinusoid: return std::abs(value) + std::abs(amplitude);
    }
    return std::abs(value);
}

BoundaryData::BoundaryData(BoundaryFormula left, BoundaryFormula right) : left_(left), right_(right) {}

BoundaryData BoundaryData::from_table(std::vector<double> times, std::vector<double> left, std::vector<double> right) {
    if (times.empty() || times.size() != left.size() || times.size() != right.size())
        throw DimensionError("boundary table columns must be nonempty and of equal length");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw Error("boundary table times must be strictly increasing");
    BoundaryData d;
    d.times_ = std::move(times);
    d.left_values_ = std::move(left);
    d.right_values_ = std::move(right);
    return d;
}

BoundaryData BoundaryData::from_csv(const std::string& path) {
    const auto t = read_csv(path);
    return from_table(t.column_values("time"), t.column_values("left"), t.column_values("right"));
}

std::pair<double, double> BoundaryData::at(double t) const {
    if (times_.empty()) return {left_(t), right_(t)};
    if (t <= times_.front()) return {left_values_.front(), right_values_.front()};
    if (t >= times_.back()) return {left_values_.back(), right_values_.back()};
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double a = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return {(1 - a) * left_values_[i] + a * left_values_[i + 1], (1 - a) * right_values_[i] + a * right_values_[i + 1]};
}

double BoundaryData::bound() const {
    if (times_.empty()) return std::max(left_.bound(), right_.bound());
    double b = 0.0;
    for (double v : left_values_) b = std::max(b, std::abs(v));
    for (double v : right_values_) b = std::max(b, std::abs(v));
    return b;
}

std::vector<std::string> MaterialLaws::validate(double length, double final_time) const {
    std::vector<std::string> v;
    if (!(kappa.kappa_star(length) > 0.0)) v.push_back("hy2: kappa_* must be positive");
    if (!(kappa.exponent >= 1.0)) v.push_back("hy2: kappa not Lipschitz in s (exponent < 1)");
    if (gamma_left < 0.0 || gamma_right < 0.0) v.push_back("hy2: gamma must be nonnegative");
    if (!(gamma_left + gamma_right > 0.0)) v.push_back("hy2: gamma integral zero");
    if (!(u_star_bound > 0.0)) v.push_back("hy2: U* must be positive");
    if (u_star.tabulated()) {
        if (u_star.bound() > u_star_bound) v.push_back("hy2: |u*| exceeds U*");
    } else {
        // formulas: sample densely on [0, T] rather than trusting the global bound
        const int n = 4096;
        double worst = 0.0;
        for (int i = 0; i <= n; ++i) {
            const auto [l, r] = u_star.at(final_time * i / n);
            worst = std::max({worst, std::abs(l), std::abs(r)});
        }
        if (worst > u_star_bound * (1.0 + 1e-12)) v.push_back("hy2: |u*| exceeds U*");
    }
    return v;
}

std::vector<double> TridiagonalSystem::apply(std::span<const double> u) const {
    const std::size_t n = size();
    if (u.size() != n) throw DimensionError("vector length does not match the system");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double v = diag[k] * u[k];
        if (k > 0) v += lower[k] * u[k - 1];
        if (k + 1 < n) v += upper[k] * u[k + 1];
        out[k] = v;
    }
    return out;
}

std::vector<double> element_kappa(const Mesh1D& mesh, const KappaLaw& kappa, std::span<const double> s) {
    if (s.size() != mesh.nodes()) throw DimensionError("saturation field does not match the mesh");
    std::vector<double> out(mesh.nodes() - 1);
    for (std::size_t e = 0; e + 1 < mesh.nodes(); ++e)
        out[e] = kappa(0.5 * (mesh.x(e) + mesh.x(e + 1)), 0.5 * (s[e] + s[e + 1]));
    return out;
}

std::vector<double> stiffness_action(const Mesh1D& mesh, const KappaLaw& kappa, std::span<const double> s,
                                     std::span<const double> u) {
    if (u.size() != mesh.nodes()) throw DimensionError("pressure field does not match the mesh");
    const auto ke = element_kappa(mesh, kappa, s);
    std::vector<double> out(mesh.nodes(), 0.0);
    for (std::size_t e = 0; e < ke.size(); ++e) {
        const double flux = ke[e] * (u[e + 1] - u[e]) / mesh.h();
        out[e] -= flux;
        out[e + 1] += flux;
    }
    return out;
}

std::vector<double> step_residual(const Mesh1D& mesh, const MaterialLaws& laws, std::span<const double> s,
                                  std::span<const double> s_prev, std::span<const double> u,
                                  std::pair<double, double> u_star_now, double tau) {
    if (s_prev.size() != mesh.nodes()) throw DimensionError("previous saturation does not match the mesh");
    auto res = stiffness_action(mesh, laws.kappa, s, u);
    const auto m = mesh.lumped_mass();
    for (std::size_t k = 0; k < res.size(); ++k) res[k] += m[k] * (s[k] - s_prev[k]) / tau;
    res.front() += laws.gamma_left * (u.front() - u_star_now.first);
    res.back() += laws.gamma_right * (u.back() - u_star_now.second);
    return res;
}

TridiagonalSystem assemble_step_system(const Mesh1D& mesh, const MaterialLaws& laws, std::span<const double> s_field,
                                       std::span<const double> s_prev, std::pair<double, double> u_star_now,
                                       double tau, const HysteresisLinearization& lin) {
    const std::size_t n = mesh.nodes();
    if (s_prev.size() != n || lin.slopes.size() != n || lin.intercepts.size() != n)
        throw DimensionError("assembly inputs do not match the mesh");
    if (!(tau > 0.0)) throw Error("time step must be positive");
    const auto ke = element_kappa(mesh, laws.kappa, s_field);
    const auto m = mesh.lumped_mass();
    TridiagonalSystem sys(n);
    for (std::size_t e = 0; e + 1 < n; ++e) {
        const double a = ke[e] / mesh.h();
        sys.diag[e] += a;
        sys.diag[e + 1] += a;
        sys.upper[e] -= a;
        sys.lower[e + 1] -= a;
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!(lin.slopes[k] >= 0.0)) throw Error("hysteresis slope must be nonnegative");
        sys.diag[k] += m[k] * lin.slopes[k] / tau;
        sys.rhs[k] += m[k] * (s_prev[k] - lin.intercepts[k]) / tau;
    }
    sys.diag.front() += laws.gamma_left;
    sys.rhs.front() += laws.gamma_left * u_star_now.first;
    sys.diag.back() += laws.gamma_right;
    sys.rhs.back() += laws.gamma_right * u_star_now.second;

    for (std::size_t k = 0; k < n; ++k) {
        const double off = (k > 0 ? std::abs(sys.lower[k]) : 0.0) + (k + 1 < n ? std::abs(sys.upper[k]) : 0.0);
        if (!(sys.diag[k] > 0.0) || sys.diag[k] < off * (1.0 - 1e-12))
            throw Error("assembled system is not diagonally dominant at row " + std::to_string(k));
    }
    return sys;
}

std::vector<double> solve_tridiagonal(const TridiagonalSystem& system) {
    const std::size_t n = system.size();
    if (system.lower.size() != n || system.upper.size() != n || system.rhs.size() != n)
        throw DimensionError("tridiagonal bands have inconsistent lengths");
    if (n == 0) return {};
    double scale = 0.0;
    for (double d : system.diag) scale = std::max(scale, std::abs(d));
    const double tiny = 1e-14 * scale;
    std::vector<double> c(n), d(n);
    double pivot = system.diag[0];
    if (!(std::abs(pivot) > tiny)) throw SingularSystem(0, pivot);
    c[0] = system.upper[0] / pivot;
    d[0] = system.rhs[0] / pivot;
    for (std::size_t k = 1; k < n; ++k) {
        pivot = system.diag[k] - system.lower[k] * c[k - 1];
        if (!(std::abs(pivot) > tiny)) throw SingularSystem(k, pivot);
        c[k] = k + 1 < n ? system.upper[k] / pivot : 0.0;
        d[k] = (system.rhs[k] - system.lower[k] * d[k - 1]) / pivot;
    }
    std::vector<double> u(n);
    u[n - 1] = d[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) u[k] = d[k] - c[k] * u[k + 1];
    return u;
}

}  // namespace hyst
