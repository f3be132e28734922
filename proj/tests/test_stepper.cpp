#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hystersolve/errors.hpp"
#include "hystersolve/stepper.hpp"

using namespace hyst;

namespace {

Scenario base_scenario(std::size_t nodes, std::size_t steps, double offset = 0.5) {
    Scenario sc;
    sc.mesh = Mesh1D(1.0, nodes);
    sc.op = PreisachOperator(ThresholdGrid(64, 1.0), PreisachDensity::constant(1.0), offset);
    sc.steps = steps;
    sc.final_time = 1.0;
    return sc;
}

void constant_history(Scenario& sc, double c) {
    sc.u0 = [c](double) { return c; };
    sc.u0_dx = [](double) { return 0.0; };
    sc.lambda = [c](double, double r) { return std::clamp(0.0, c - r, c + r); };
    sc.laws.u_star = BoundaryData({BoundaryFormula::Kind::constant, c}, {BoundaryFormula::Kind::constant, c});
}

Scenario ramp_scenario(std::size_t nodes, std::size_t steps) {
    auto sc = base_scenario(nodes, steps);
    constant_history(sc, 0.0);
    sc.laws.gamma_left = 5.0;
    sc.laws.u_star = BoundaryData({BoundaryFormula::Kind::ramp, 0.0, 0.8, 1.0}, {BoundaryFormula::Kind::constant, 0.0});
    return sc;
}

// Unit density output by direct play folding: offset + sum_j xi_j dr.
double fold_output(double u, std::vector<double>& xi, const ThresholdGrid& g, double offset) {
    double s = offset;
    for (std::size_t j = 0; j < xi.size(); ++j) {
        xi[j] = std::min(u + g.r(j), std::max(u - g.r(j), xi[j]));
        s += xi[j] * g.dr();
    }
    return s;
}

double bisect(auto f, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("stepper") {

TEST_CASE("steady state is a fixed point") {
    auto sc = base_scenario(21, 10);
    constant_history(sc, 0.3);
    const auto s0 = initial_state(sc);
    const auto s1 = solve_step(s0, {0.3, 0.3}, sc.mesh, sc.laws, sc.op, sc.tau(), sc.solver);
    CHECK(s1.iterations == 1);
    for (std::size_t k = 0; k < 21; ++k) {
        CHECK(s1.u[k] == doctest::Approx(0.3).epsilon(1e-14));
        CHECK(s1.s[k] == doctest::Approx(s0.s[k]).epsilon(1e-14));
    }

    const auto traj = run_simulation(sc);
    REQUIRE(traj.states.size() == 11);
    REQUIRE(traj.rows.size() == 10);
    for (const auto& st : traj.states)
        for (std::size_t k = 0; k < 21; ++k) {
            CHECK(st.u[k] == doctest::Approx(0.3).epsilon(1e-14));
            CHECK(st.s[k] == doctest::Approx(s0.s[k]).epsilon(1e-14));
        }
}

TEST_CASE("two-node step against a nested bisection oracle") {
    auto sc = base_scenario(2, 10);
    constant_history(sc, 0.0);
    const auto s0 = initial_state(sc);
    const std::pair<double, double> ustar{0.6, -0.3};
    const double tau = 0.1, h = 1.0, m = 0.5;
    const auto step = solve_step(s0, ustar, sc.mesh, sc.laws, sc.op, tau, sc.solver);

    const auto S = [&](std::size_t k, double u) {
        std::vector<double> xi(s0.memory.row(k).begin(), s0.memory.row(k).end());
        return fold_output(u, xi, sc.op.grid, sc.op.offset);
    };
    const auto solve_u1 = [&](double u0) {
        return bisect([&](double u1) { return m * (S(1, u1) - s0.s[1]) / tau + (u1 - u0) / h + (u1 - ustar.second); },
                      -1.0, 1.0);
    };
    const double u0 = bisect(
        [&](double u0) {
            const double u1 = solve_u1(u0);
            return m * (S(0, u0) - s0.s[0]) / tau + (u0 - u1) / h + (u0 - ustar.first);
        },
        -1.0, 1.0);
    CHECK(step.u[0] == doctest::Approx(u0).epsilon(1e-8));
    CHECK(step.u[1] == doctest::Approx(solve_u1(u0)).epsilon(1e-8));
}

TEST_CASE("boundary data above Lambda respects the max principle") {
    auto sc = base_scenario(21, 10);
    constant_history(sc, 0.0);
    sc.laws.u_star_bound = 1.5;
    sc.laws.u_star = BoundaryData({BoundaryFormula::Kind::constant, 1.5}, {BoundaryFormula::Kind::constant, 1.5});
    sc.op = PreisachOperator(ThresholdGrid(64, sc.U()), PreisachDensity::constant(1.0), 0.5);
    const auto traj = run_simulation(sc);
    double mx = 0.0;
    for (const auto& st : traj.states)
        for (double u : st.u) mx = std::max(mx, std::abs(u));
    CHECK(mx <= sc.U() + 10.0 * sc.solver.tol);
    CHECK(mx > 1.0);
}

TEST_CASE("ramp loading: monotone saturation matching a per-node fold") {
    const auto sc = ramp_scenario(21, 40);
    const auto traj = run_simulation(sc);
    for (std::size_t k = 0; k < sc.mesh.nodes(); ++k) {
        std::vector<double> xi(traj.states[0].memory.row(k).begin(), traj.states[0].memory.row(k).end());
        for (std::size_t i = 1; i < traj.states.size(); ++i) {
            const double s = fold_output(traj.states[i].u[k], xi, sc.op.grid, sc.op.offset);
            CHECK(traj.states[i].s[k] == doctest::Approx(s).epsilon(1e-12));
            CHECK(traj.states[i].s[k] >= traj.states[i - 1].s[k] - 1e-14);
            CHECK(preisach_output(traj.states[i].memory.row(k), sc.mesh.x(k), sc.op) ==
                  doctest::Approx(traj.states[i].s[k]).epsilon(1e-14));
        }
    }
    for (const auto& row : traj.rows) {
        CHECK(std::abs(row.mass_residual) <= 10.0 * sc.solver.tol * row.mass_scale);
        CHECK(row.dissipation <= 1e-12);
    }
}

TEST_CASE("halving tau changes the final state by O(tau)") {
    std::vector<double> finals_diff;
    std::vector<std::vector<double>> finals;
    for (std::size_t n : {20u, 40u, 80u}) finals.push_back(run_simulation(ramp_scenario(21, n)).states.back().u);
    for (std::size_t l = 0; l + 1 < finals.size(); ++l) {
        double d = 0.0;
        for (std::size_t k = 0; k < finals[l].size(); ++k) d = std::max(d, std::abs(finals[l][k] - finals[l + 1][k]));
        finals_diff.push_back(d);
    }
    const double ratio = finals_diff[0] / finals_diff[1];
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.6);
}

TEST_CASE("step failure carries the step index") {
    auto sc = ramp_scenario(21, 10);
    sc.solver.max_iter = 1;
    sc.solver.retries = 0;
    sc.solver.tol = 1e-15;
    try {
        run_simulation(sc);
        FAIL("expected a step failure");
    } catch (const StepFailure& e) {
        CHECK(e.step == 1);
        CHECK(e.iterations == 1);
    }
}

TEST_CASE("initial compatibility") {
    SUBCASE("constant data pass") {
        auto sc = base_scenario(21, 10);
        constant_history(sc, 0.3);
        const auto rep = check_initial_compatibility(sc);
        CHECK_FALSE(rep.failed());
        for (const auto& it : rep.items) CHECK_MESSAGE(it.status == Status::pass, it.name);
        for (double d : rep.divergence) CHECK(d == doctest::Approx(0.0));
        for (double r : rep.r0) CHECK(r == doctest::Approx(0.0));
    }
    SUBCASE("memory not matching u0 fails c0 with a location") {
        auto sc = base_scenario(21, 10);
        constant_history(sc, 0.3);
        sc.lambda = [](double x, double r) { return x > 0.5 ? std::max(0.2 - r, 0.0) : std::clamp(0.0, 0.3 - r, 0.3 + r); };
        const auto rep = check_initial_compatibility(sc);
        REQUIRE(rep.find("c0"));
        CHECK(rep.find("c0")->status == Status::fail);
        CHECK(rep.find("c0")->detail.find("x = ") != std::string::npos);
        CHECK(rep.failed());
    }
    SUBCASE("quadratic u0: memory slope must follow sign(div)") {
        // u0 = 0.6 - 1.6 x (1 - x) > 0, div = +3.2; Robin data matched to u0'
        auto sc = base_scenario(41, 10);
        sc.Lambda = 1.0;
        sc.laws.gamma_left = sc.laws.gamma_right = 5.0;
        sc.laws.u_star = BoundaryData({BoundaryFormula::Kind::constant, 0.92}, {BoundaryFormula::Kind::constant, 0.92});
        sc.u0 = [](double x) { return 0.6 - 1.6 * x * (1.0 - x); };
        sc.u0_dx = [](double x) { return -1.6 + 3.2 * x; };
        sc.compat_L = 20.0;
        sc.r0 = 0.1;
        sc.lambda = [u0 = sc.u0](double x, double r) { return std::max(u0(x) - r, 0.0); };
        const auto up = check_initial_compatibility(sc);
        for (std::size_t k = 1; k + 1 < up.divergence.size(); ++k) CHECK(up.divergence[k] == doctest::Approx(3.2));
        CHECK(up.find("c2")->status == Status::pass);
        CHECK(up.find("c2a")->status == Status::pass);
        CHECK(up.find("c1")->status == Status::pass);

        // the descending history min(u0 + r, ...) has the wrong sign here
        sc.lambda = [u0 = sc.u0](double x, double r) { return std::min(u0(x) + r, std::max(0.95 - r, 0.0)); };
        const auto down = check_initial_compatibility(sc);
        CHECK(down.find("c2")->status == Status::fail);
    }
    SUBCASE("automatic r0") {
        auto sc = base_scenario(21, 10);
        sc.u0 = [](double x) { return 0.2 + 1.6 * x * (1.0 - x); };
        sc.lambda = [u0 = sc.u0](double x, double r) { return std::max(u0(x) - r, 0.0); };
        const auto rep = check_initial_compatibility(sc);
        for (std::size_t k = 1; k + 1 < rep.r0.size(); ++k)
            CHECK(rep.r0[k] == doctest::Approx(std::min(1.0, std::sqrt(3.2))));
    }
}

TEST_CASE("interpolants") {
    auto sc = base_scenario(3, 2);
    Trajectory traj{sc, {}, {}};
    for (double v : {0.0, 2.0, 3.0}) {
        StepState st;
        st.u = {v, v, v};
        st.s = {v / 2, v / 2, v / 2};
        traj.states.push_back(st);
    }
    const Interpolants hat{&traj, Interpolants::Mode::hat, Interpolants::Field::u};
    const Interpolants bar{&traj, Interpolants::Mode::bar, Interpolants::Field::u};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(interpolant_eval(hat, 1, 0.5 * static_cast<double>(i)) == traj.states[i].u[1]);
        CHECK(interpolant_eval(bar, 1, 0.5 * static_cast<double>(i)) == traj.states[i].u[1]);
    }
    CHECK(interpolant_eval(hat, 0, 0.25) == doctest::Approx(1.0));
    CHECK(interpolant_eval(bar, 0, 0.25) == 2.0);
    CHECK(interpolant_eval(bar, 0, 0.75) == 3.0);
    const double slope = (interpolant_eval(hat, 0, 0.6) - interpolant_eval(hat, 0, 0.55)) / 0.05;
    CHECK(slope == doctest::Approx((3.0 - 2.0) / 0.5));
    const Interpolants sbar{&traj, Interpolants::Mode::bar, Interpolants::Field::s};
    CHECK(interpolant_eval(sbar, 2, 0.3) == 1.0);
    CHECK_THROWS_AS(interpolant_eval(hat, 0, 1.5), RangeError);
    CHECK_THROWS_AS(interpolant_eval(hat, 0, -0.1), RangeError);
}

}  // TEST_SUITE
