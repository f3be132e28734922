#include "hystersolve/function_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hystersolve/errors.hpp"

namespace hyst {

namespace {

// (1 + u) log(1 + u) - u, series near 0 where the direct form cancels
double orlicz_log_value(double u) {
    if (u < 1e-3) {
        const double u2 = u * u;
        return u2 * (0.5 - u / 6.0 + u2 / 12.0 - u2 * u / 20.0 + u2 * u2 / 30.0);
    }
    return (1.0 + u) * std::log1p(u) - u;
}

// e^u - u - 1
double exp_minus_linear_value(double u) {
    if (std::abs(u) < 1e-3) {
        const double u2 = u * u;
        return u2 * (0.5 + u / 6.0 + u2 / 24.0 + u2 * u / 120.0 + u2 * u2 / 720.0);
    }
    return std::expm1(u) - u;
}

// smallest u >= 0 with phi(u) >= v for a nondecreasing generator
template <class F>
double invert_monotone(const F& phi, double v) {
    if (v <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 2100 && phi(hi) < v; ++i) hi *= 2.0;
    if (!(phi(hi) >= v)) return std::numeric_limits<double>::infinity();
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (phi(mid) < v ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

YoungFunction YoungFunction::power(double p, double coefficient) {
    if (!(p > 1.0)) throw Error("power Young function needs p > 1");
    if (!(coefficient > 0.0)) throw Error("power Young function needs a positive coefficient");
    YoungFunction f;
    f.kind_ = Kind::power;
    f.p_ = p;
    f.coefficient_ = coefficient;
    return f;
}

YoungFunction YoungFunction::orlicz_log() {
    YoungFunction f;
    f.kind_ = Kind::orlicz_log;
    return f;
}

YoungFunction YoungFunction::exp_minus_linear() {
    YoungFunction f;
    f.kind_ = Kind::exp_minus_linear;
    return f;
}

YoungFunction YoungFunction::philog() {
    YoungFunction f;
    f.kind_ = Kind::philog;
    return f;
}

YoungFunction YoungFunction::custom(std::vector<double> u_nodes, std::vector<double> phi_values) {
    if (u_nodes.size() < 2 || u_nodes.size() != phi_values.size())
        throw DimensionError("custom generator needs at least two (u, phi) pairs");
    if (u_nodes.front() != 0.0 || phi_values.front() != 0.0)
        throw Error("custom generator must start at (0, 0)");
    for (std::size_t i = 1; i < u_nodes.size(); ++i) {
        if (!(u_nodes[i] > u_nodes[i - 1])) throw Error("custom generator nodes must be strictly increasing");
        if (!(phi_values[i] > phi_values[i - 1])) throw Error("custom generator must be strictly increasing");
    }
    YoungFunction f;
    f.kind_ = Kind::custom;
    f.cumulative_.assign(u_nodes.size(), 0.0);
    for (std::size_t i = 1; i < u_nodes.size(); ++i)
        f.cumulative_[i] =
            f.cumulative_[i - 1] + 0.5 * (phi_values[i] + phi_values[i - 1]) * (u_nodes[i] - u_nodes[i - 1]);
    f.nodes_ = std::move(u_nodes);
    f.phi_ = std::move(phi_values);
    return f;
}

YoungFunction YoungFunction::conjugate_of(const YoungFunction& base) {
    YoungFunction f;
    f.kind_ = Kind::conjugate;
    f.base_ = std::make_shared<const YoungFunction>(base);
    return f;
}

double YoungFunction::operator()(double u) const {
    if (u <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::power: return coefficient_ * std::pow(u, p_);
        case Kind::orlicz_log: return orlicz_log_value(u);
        case Kind::exp_minus_linear: return exp_minus_linear_value(u);
        case Kind::philog: return u * std::log1p(u);
        case Kind::custom: {
            const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
            const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - nodes_.begin()) - 1,
                                                         nodes_.size() - 2);
            const double slope = (phi_[i + 1] - phi_[i]) / (nodes_[i + 1] - nodes_[i]);
            const double d = u - nodes_[i];
            return cumulative_[i] + phi_[i] * d + 0.5 * slope * d * d;
        }
        case Kind::conjugate: return young_conjugate(*base_, u);
    }
    return 0.0;
}

double YoungFunction::generator(double u) const {
    if (u <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::power: return coefficient_ * p_ * std::pow(u, p_ - 1.0);
        case Kind::orlicz_log: return std::log1p(u);
        case Kind::exp_minus_linear: return std::expm1(u);
        case Kind::philog: return std::log1p(u) + u / (1.0 + u);
        case Kind::custom: {
            const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
            const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - nodes_.begin()) - 1,
                                                         nodes_.size() - 2);
            const double slope = (phi_[i + 1] - phi_[i]) / (nodes_[i + 1] - nodes_[i]);
            return phi_[i] + slope * (u - nodes_[i]);
        }
        case Kind::conjugate: return base_->generator_inverse(u);
    }
    return 0.0;
}

double YoungFunction::generator_inverse(double v) const {
    if (v <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::power: return std::pow(v / (coefficient_ * p_), 1.0 / (p_ - 1.0));
        case Kind::orlicz_log: return std::expm1(v);
        case Kind::exp_minus_linear: return std::log1p(v);
        case Kind::philog:
        case Kind::custom: return invert_monotone([this](double u) { return generator(u); }, v);
        case Kind::conjugate: return base_->generator(v);
    }
    return 0.0;
}

std::string YoungFunction::name() const {
    switch (kind_) {
        case Kind::power: return "power(" + std::to_string(p_) + ")";
        case Kind::orlicz_log: return "orlicz-log";
        case Kind::exp_minus_linear: return "exp";
        case Kind::philog: return "philog";
        case Kind::custom: return "custom";
        case Kind::conjugate: return "conjugate(" + base_->name() + ")";
    }
    return "?";
}

bool YoungFunction::looks_strict() const {
    if ((*this)(0.0) != 0.0) return false;
    std::vector<double> us;
    for (double e = -6.0; e <= 6.0; e += 0.25) us.push_back(std::pow(10.0, e));
    double prev_ratio = 0.0;
    for (double u : us) {
        const double v = (*this)(u);
        if (!std::isfinite(v)) break;
        const double ratio = v / u;
        if (ratio < prev_ratio * (1.0 - 1e-9)) return false;
        prev_ratio = ratio;
        const double h = 1e-3 * u;
        const double second = (*this)(u + h) - 2.0 * v + (*this)(u - h);
        if (second < -1e-9 * std::max(1.0, std::abs(v))) return false;
    }
    return true;
}

double young_conjugate(const YoungFunction& phi, double v) {
    if (v < 0.0) throw RangeError("conjugate requested at negative argument");
    if (v == 0.0) return 0.0;
    const double u = phi.generator_inverse(v);
    if (!std::isfinite(u)) return std::numeric_limits<double>::infinity();
    return std::max(0.0, v * u - phi(u));
}

// ---------------------------------------------------------------------------

SampledFunction SampledFunction::uniform(std::vector<double> values, double measure) {
    if (values.empty()) throw DimensionError("sampled function needs at least one sample");
    if (!(measure > 0.0)) throw Error("domain measure must be positive");
    const double w = measure / static_cast<double>(values.size());
    SampledFunction f{std::move(values), {}};
    f.weights.assign(f.values.size(), w);
    return f;
}

SampledFunction SampledFunction::trapezoid(std::vector<double> values, double length) {
    if (values.size() < 2) throw DimensionError("trapezoid rule needs at least two samples");
    if (!(length > 0.0)) throw Error("domain length must be positive");
    const double h = length / static_cast<double>(values.size() - 1);
    SampledFunction f{std::move(values), {}};
    f.weights.assign(f.values.size(), h);
    f.weights.front() = f.weights.back() = 0.5 * h;
    return f;
}

double SampledFunction::measure() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double SampledFunction::integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
    return s;
}

double luxemburg_norm(const SampledFunction& f, const YoungFunction& phi) {
    if (f.values.size() != f.weights.size()) throw DimensionError("samples and weights differ in length");
    double l1 = 0.0, sup = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        l1 += f.weights[i] * std::abs(f.values[i]);
        sup = std::max(sup, std::abs(f.values[i]));
    }
    if (sup == 0.0) return 0.0;
    const double meas = f.measure();
    const auto modular = [&](double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i)
            if (f.values[i] != 0.0) s += f.weights[i] * phi(std::abs(f.values[i]) / b);
        return s;
    };
    double lo = l1 / meas * 1e-6;
    double hi = sup * meas * 1e6;
    for (int i = 0; i < 200 && !(modular(lo) > 1.0); ++i) lo *= 0.1;
    for (int i = 0; i < 200 && !(modular(hi) <= 1.0); ++i) hi *= 10.0;
    // bisection in log(b): the bracket spans many decades
    for (int i = 0; i < 400; ++i) {
        const double mid = std::sqrt(lo) * std::sqrt(hi);
        if (mid <= lo || mid >= hi) break;
        (modular(mid) <= 1.0 ? hi : lo) = mid;
    }
    return hi;
}

HolderReport holder_pairing_check(const SampledFunction& f, const SampledFunction& g, const YoungFunction& phi) {
    if (f.values.size() != g.values.size()) throw DimensionError("paired functions live on different grids");
    HolderReport r;
    for (std::size_t i = 0; i < f.values.size(); ++i) r.pairing += f.weights[i] * std::abs(f.values[i] * g.values[i]);
    r.norm_f = luxemburg_norm(f, phi);
    r.norm_g = luxemburg_norm(g, YoungFunction::conjugate_of(phi));
    r.bound = 2.0 * r.norm_f * r.norm_g;
    r.passed = r.pairing <= r.bound * (1.0 + 1e-12) + 1e-300;
    return r;
}

ScalingReport scaling_bound_check(const SampledFunction& f, const YoungFunction& phi, double a) {
    if (!(a > 0.0)) throw Error("scaling constant must be positive");
    ScalingReport r;
    r.norm = luxemburg_norm(f, phi);
    if (r.norm < a) return r;
    r.applicable = true;
    for (std::size_t i = 0; i < f.values.size(); ++i) r.bound += f.weights[i] * phi(std::abs(f.values[i]) / a);
    r.bound *= a;
    r.margin = r.bound - r.norm;
    r.passed = r.norm <= r.bound * (1.0 + 1e-12);
    return r;
}

TimeNorms sobolev_time_norms(std::span<const double> samples, double T, std::size_t modes) {
    if (samples.size() < 2) throw DimensionError("time norms need at least two samples");
    if (!(T > 0.0)) throw Error("time interval must be positive");
    const std::size_t N = samples.size() - 1;
    const std::size_t J = modes == 0 ? N : modes;
    const double dt = T / static_cast<double>(N);
    const double amp = std::sqrt(2.0 / T);
    TimeNorms out;
    out.coefficients.resize(J);
    for (std::size_t j = 1; j <= J; ++j) {
        double c = 0.0;
        for (std::size_t i = 1; i < N; ++i)  // endpoint terms vanish: sin(0) = sin(j pi) = 0
            c += dt * samples[i] * amp * std::sin(std::numbers::pi * static_cast<double>(j * i) / static_cast<double>(N));
        out.coefficients[j - 1] = c;
        const double mu = std::pow(std::numbers::pi * static_cast<double>(j) / T, 2);
        out.H += c * c;
        out.V += mu * c * c;
        out.Vstar += c * c / mu;
    }
    out.H = std::sqrt(out.H);
    out.V = std::sqrt(out.V);
    out.Vstar = std::sqrt(out.Vstar);
    return out;
}

SpaceTimeNorms space_time_norms(const std::vector<std::vector<double>>& field, const Mesh1D& mesh, double T) {
    if (field.size() < 2) throw DimensionError("space-time norms need at least two time levels");
    if (!(T > 0.0)) throw Error("time interval must be positive");
    const std::size_t nx = mesh.nodes();
    for (const auto& row : field)
        if (row.size() != nx) throw DimensionError("field row does not match the mesh");
    const std::size_t N = field.size() - 1;
    const std::size_t K = nx - 1;  // cosine modes 0..K-1
    const double L = mesh.length();
    const auto mass = mesh.lumped_mass();

    std::vector<std::vector<double>> basis(K, std::vector<double>(nx));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t q = 0; q < nx; ++q)
            basis[k][q] = k == 0 ? 1.0 / std::sqrt(L)
                                 : std::sqrt(2.0 / L) * std::cos(std::numbers::pi * static_cast<double>(k * q) /
                                                                 static_cast<double>(K));

    // project in x at every time level, then in t
    std::vector<std::vector<double>> a(field.size(), std::vector<double>(K, 0.0));
    for (std::size_t i = 0; i < field.size(); ++i)
        for (std::size_t k = 0; k < K; ++k) {
            double c = 0.0;
            for (std::size_t q = 0; q < nx; ++q) c += mass[q] * field[i][q] * basis[k][q];
            a[i][k] = c;
        }
    const double dt = T / static_cast<double>(N);
    const double amp = std::sqrt(2.0 / T);
    SpaceTimeNorms out;
    std::vector<double> ell(N + 1);
    for (std::size_t j = 1; j < N; ++j) {
        for (std::size_t i = 0; i <= N; ++i)
            ell[i] = amp * std::sin(std::numbers::pi * static_cast<double>(j * i) / static_cast<double>(N));
        const double mu = std::pow(std::numbers::pi * static_cast<double>(j) / T, 2);
        for (std::size_t k = 0; k < K; ++k) {
            double c = 0.0;
            for (std::size_t i = 1; i < N; ++i) c += dt * a[i][k] * ell[i];
            const double omega = std::pow(std::numbers::pi * static_cast<double>(k) / L, 2);
            out.X += (1.0 + omega) * c * c;
            out.Y += c * c / mu;
        }
    }
    out.X = std::sqrt(out.X);
    out.Y = std::sqrt(out.Y);
    return out;
}

EquivalenceReport philog_equivalence_check(std::span<const double> samples) {
    EquivalenceReport r;
    const auto phi = YoungFunction::orlicz_log();
    const auto plog = YoungFunction::philog();
    for (double u : samples) {
        if (u < 0.0) throw RangeError("equivalence check needs nonnegative samples");
        const double a = phi(u), b = plog(u);
        const double scale = std::max(b, std::numeric_limits<double>::min());
        r.worst_lower = std::max(r.worst_lower, (a - b) / scale);
        r.worst_upper = std::max(r.worst_upper, (b - 2.0 * a) / scale);
    }
    r.passed = r.worst_lower <= 1e-14 && r.worst_upper <= 1e-14;
    return r;
}

}  // namespace hyst
