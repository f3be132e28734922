#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "doctest.h"
#include "hystersolve/errors.hpp"
#include "hystersolve/function_spaces.hpp"

using namespace hyst;

namespace {

// sup_u (u v - Phi(u)) by Brent minimisation on a bracket grown until the
// maximiser is interior.
double conjugate_oracle(const YoungFunction& phi, double v) {
    if (v == 0.0) return 0.0;
    double hi = 1.0;
    while (hi * v - phi(hi) > -1.0 && hi < 1e6) hi *= 2.0;
    const auto r = boost::math::tools::brent_find_minima([&](double u) { return -(u * v - phi(u)); }, 0.0, hi, 60);
    return -r.second;
}

double toms748(auto f, double lo, double hi) {
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(60), it);
    return 0.5 * (r.first + r.second);
}

double lp_norm(const SampledFunction& f, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) s += f.weights[i] * std::pow(std::abs(f.values[i]), p);
    return std::pow(s, 1.0 / p);
}

double modular(const SampledFunction& f, const YoungFunction& phi, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) s += f.weights[i] * phi(std::abs(f.values[i]) / b);
    return s;
}

}  // namespace

TEST_SUITE("function_spaces") {

TEST_CASE("conjugate Young functions") {
    const auto half_square = YoungFunction::power(2.0, 0.5);
    CHECK(young_conjugate(half_square, 3.0) == doctest::Approx(4.5).epsilon(1e-14));
    const auto ol = YoungFunction::orlicz_log();
    CHECK(young_conjugate(ol, 1.0) == doctest::Approx(std::numbers::e - 2.0).epsilon(1e-13));
    for (const auto& phi : {half_square, ol, YoungFunction::philog(), YoungFunction::exp_minus_linear(),
                            YoungFunction::power(3.0)}) {
        CHECK(young_conjugate(phi, 0.0) == 0.0);
        for (double v : {0.1, 0.7, 1.3, 2.5}) CHECK(young_conjugate(phi, v) == doctest::Approx(conjugate_oracle(phi, v)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(young_conjugate(ol, -0.5), RangeError);

    const auto star = YoungFunction::conjugate_of(ol);
    const auto em = YoungFunction::exp_minus_linear();
    for (double v : {0.01, 0.5, 2.0, 4.0}) CHECK(star(v) == doctest::Approx(em(v)).epsilon(1e-10));
    // Phi** = Phi
    const auto starstar = YoungFunction::conjugate_of(star);
    for (double u : {0.05, 0.5, 1.0, 3.0}) CHECK(starstar(u) == doctest::Approx(ol(u)).epsilon(1e-8));
}

TEST_CASE("Young inequality with equality on the generator graph") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.0, 3.0);
    const auto custom = YoungFunction::custom({0.0, 0.5, 1.0, 2.0}, {0.0, 0.2, 1.0, 3.0});
    CHECK(custom.looks_strict());
    for (const auto& phi : {YoungFunction::orlicz_log(), YoungFunction::philog(), YoungFunction::power(1.5), custom}) {
        for (int k = 0; k < 2000; ++k) {
            const double u = U(rng), v = U(rng);
            CHECK(u * v <= phi(u) + young_conjugate(phi, v) + 1e-12 * (1.0 + u * v));
        }
        for (double u : {0.2, 0.9, 1.7}) {
            const double v = phi.generator(u);
            CHECK(u * v == doctest::Approx(phi(u) + young_conjugate(phi, v)).epsilon(1e-9));
        }
    }
}

TEST_CASE("custom generator") {
    const auto c = YoungFunction::custom({0.0, 1.0, 2.0}, {0.0, 1.0, 3.0});
    CHECK(c(1.0) == doctest::Approx(0.5));
    CHECK(c(2.0) == doctest::Approx(0.5 + 2.0));
    CHECK(c(3.0) == doctest::Approx(2.5 + 0.5 * (3.0 + 5.0)));  // slope 2 extrapolated
    CHECK(c.generator_inverse(2.0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(YoungFunction::custom({0.0, 1.0}, {0.5, 1.0}), Error);
    CHECK_THROWS_AS(YoungFunction::custom({0.0, 1.0, 0.5}, {0.0, 1.0, 2.0}), Error);
    CHECK_THROWS_AS(YoungFunction::power(1.0), Error);
}

TEST_CASE("Luxemburg norm") {
    const auto sq = YoungFunction::power(2.0);
    CHECK(luxemburg_norm(SampledFunction::uniform({1.0, 1.0, 1.0}, 1.0), sq) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(luxemburg_norm(SampledFunction::uniform({2.0, 2.0}, 4.0), sq) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(luxemburg_norm(SampledFunction::uniform({0.0, 0.0}, 1.0), sq) == 0.0);

    const auto plog = YoungFunction::philog();
    const double b = toms748([](double b) { return (1.0 / b) * std::log1p(1.0 / b) - 1.0; }, 0.1, 10.0);
    CHECK(luxemburg_norm(SampledFunction::uniform({1.0}, 1.0), plog) == doctest::Approx(b).epsilon(1e-13));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> a(20), c(20);
        for (auto& v : a) v = U(rng);
        for (auto& v : c) v = U(rng);
        const auto fa = SampledFunction::trapezoid(a, 2.0), fc = SampledFunction::trapezoid(c, 2.0);
        for (const auto& phi : {plog, YoungFunction::orlicz_log(), YoungFunction::power(2.5)}) {
            const double na = luxemburg_norm(fa, phi), nc = luxemburg_norm(fc, phi);
            // normalisation, homogeneity, triangle inequality
            CHECK(modular(fa, phi, na) == doctest::Approx(1.0).epsilon(1e-10));
            auto scaled = fa;
            for (auto& v : scaled.values) v *= -2.5;
            CHECK(luxemburg_norm(scaled, phi) == doctest::Approx(2.5 * na).epsilon(1e-12));
            auto sum = fa;
            for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += fc.values[i];
            CHECK(luxemburg_norm(sum, phi) <= na + nc + 1e-12);
        }
        CHECK(luxemburg_norm(fa, YoungFunction::power(2.5)) == doctest::Approx(lp_norm(fa, 2.5)).epsilon(1e-12));
    }
}

TEST_CASE("Hoelder pairing") {
    const auto sq = YoungFunction::power(2.0);
    const auto one = SampledFunction::uniform({1.0, 1.0}, 1.0);
    auto r = holder_pairing_check(one, one, sq);
    CHECK(r.pairing == doctest::Approx(1.0));
    CHECK(r.norm_f == doctest::Approx(1.0));
    CHECK(r.norm_g == doctest::Approx(0.5));  // conjugate of u^2 is v^2/4
    CHECK(r.passed);
    r = holder_pairing_check(one, SampledFunction::uniform({0.0, 0.0}, 1.0), sq);
    CHECK(r.pairing == 0.0);
    CHECK(r.bound == 0.0);
    CHECK(r.passed);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(8), b(8);
        for (auto& v : a) v = U(rng);
        for (auto& v : b) v = U(rng);
        CHECK(holder_pairing_check(SampledFunction::uniform(a, 1.0), SampledFunction::uniform(b, 1.0),
                                   YoungFunction::philog())
                  .passed);
    }
    CHECK_THROWS_AS(holder_pairing_check(one, SampledFunction::uniform({1.0}, 1.0), sq), DimensionError);
}

TEST_CASE("scaling bound") {
    const auto plog = YoungFunction::philog();
    const auto e = SampledFunction::uniform({std::numbers::e}, 1.0);
    auto r = scaling_bound_check(e, plog, 1.0);
    CHECK(r.applicable);
    CHECK(r.passed);
    CHECK(r.bound == doctest::Approx(std::numbers::e * std::log1p(std::numbers::e)));

    r = scaling_bound_check(SampledFunction::uniform({0.1}, 1.0), plog, 1.0);
    CHECK_FALSE(r.applicable);

    const double n = luxemburg_norm(e, plog);
    r = scaling_bound_check(e, plog, n);
    CHECK(r.applicable);
    CHECK(r.passed);
    CHECK(std::abs(r.margin) <= 1e-9);
}

TEST_CASE("time norms") {
    const double T = 2.0;
    const std::size_t N = 200;
    std::vector<double> ell(N + 1), zero(N + 1, 0.0), bump(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = T * static_cast<double>(i) / N;
        ell[i] = std::sqrt(2.0 / T) * std::sin(std::numbers::pi * t / T);
        bump[i] = t * t * (T - t);
    }
    const double mu1 = std::pow(std::numbers::pi / T, 2);
    const auto n = sobolev_time_norms(ell, T);
    CHECK(n.H == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.V == doctest::Approx(std::sqrt(mu1)).epsilon(1e-12));
    CHECK(n.Vstar == doctest::Approx(1.0 / std::sqrt(mu1)).epsilon(1e-12));
    const auto z = sobolev_time_norms(zero, T);
    CHECK(z.H == 0.0);
    CHECK(z.V == 0.0);
    CHECK(z.Vstar == 0.0);

    const auto b = sobolev_time_norms(bump, T);
    double l2 = 0.0;
    for (std::size_t i = 0; i <= N; ++i) l2 += (i == 0 || i == N ? 0.5 : 1.0) * (T / N) * bump[i] * bump[i];
    CHECK(b.H * b.H == doctest::Approx(l2).epsilon(1e-10));
    CHECK(b.Vstar <= T / std::numbers::pi * b.H + 1e-14);
    CHECK(b.H <= T / std::numbers::pi * b.V + 1e-14);
    CHECK_THROWS_AS(sobolev_time_norms(std::vector<double>{1.0}, T), DimensionError);
}

TEST_CASE("space-time norms") {
    const Mesh1D mesh(1.0, 11);
    const double T = 1.0;
    const std::size_t N = 40;
    std::vector<std::vector<double>> f(N + 1, std::vector<double>(11));
    for (std::size_t i = 0; i <= N; ++i)
        for (auto& v : f[i]) v = std::sqrt(2.0 / T) * std::sin(std::numbers::pi * static_cast<double>(i) / N);
    const auto n = space_time_norms(f, mesh, T);
    CHECK(n.X == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.Y == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));

    for (auto& row : f) std::fill(row.begin(), row.end(), 0.0);
    const auto z = space_time_norms(f, mesh, T);
    CHECK(z.X == 0.0);
    CHECK(z.Y == 0.0);

    std::mt19937_64 rng(9);
    std::normal_distribution<double> G;
    const auto mass = mesh.lumped_mass();
    for (int t = 0; t < 10; ++t) {
        double l2 = 0.0;
        for (std::size_t i = 0; i <= N; ++i)
            for (std::size_t k = 0; k < 11; ++k) {
                f[i][k] = G(rng);
                l2 += (i == 0 || i == N ? 0.5 : 1.0) * (T / N) * mass[k] * f[i][k] * f[i][k];
            }
        CHECK(space_time_norms(f, mesh, T).Y <= T / std::numbers::pi * std::sqrt(l2) + 1e-12);
    }
    CHECK_THROWS_AS(space_time_norms(std::vector<std::vector<double>>(3, std::vector<double>(5)), mesh, T),
                    DimensionError);
}

TEST_CASE("Phi and Phi_log equivalence") {
    const auto phi = YoungFunction::orlicz_log();
    const auto plog = YoungFunction::philog();
    CHECK(phi(1.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0));
    CHECK(plog(1.0) == doctest::Approx(std::log(2.0)));
    CHECK(philog_equivalence_check(std::vector<double>{1.0}).passed);
    CHECK(philog_equivalence_check(std::vector<double>{0.0}).passed);
    for (double u : {1e-3, 1e-5, 1e-7}) CHECK(plog(u) / phi(u) == doctest::Approx(2.0).epsilon(u));
    std::vector<double> grid;
    for (int k = -120; k <= 60; ++k) grid.push_back(std::pow(10.0, k / 10.0));
    const auto r = philog_equivalence_check(grid);
    CHECK(r.passed);
    CHECK(r.worst_lower <= 0.0);
    CHECK_THROWS_AS(philog_equivalence_check(std::vector<double>{-1.0}), RangeError);
}

}  // TEST_SUITE
