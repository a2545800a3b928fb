// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "brwre/error.hpp"
#include "brwre/rate_solver.hpp"

using namespace brwre;
using std::numbers::pi;

TEST_CASE("critical coefficient examples")
{
    CHECK(critical_a(4.0 / 3.0, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(critical_a(pi * pi / 2, 1.0) == doctest::Approx(4.6405015894).epsilon(1e-10));
    for (double theta : {0.5, 1.0, 1.7})
        for (double k2 : {0.3, 1.0, 2.5})
        {
            double const g = pi * pi * theta * theta * k2 / 2;
            CHECK(std::abs(critical_a(g, theta) - homogeneous_critical_a(theta, k2))
                  <= 4 * std::numeric_limits<double>::epsilon() * critical_a(g, theta));
        }
    CHECK_THROWS_AS(critical_a(0.0, 1.0), Error);
    CHECK_THROWS_AS(critical_a(1.0, -1.0), Error);
}

TEST_CASE("a_c is the minimum of b + 3 gamma / (theta^3 b^2)")
{
    for (double theta : {0.7, 1.0, 1.3})
    {
        double const g = 3.1;
        double const bstar = b_stationary(g, theta);
        double best = INFINITY;
        for (int k = 0; k < 10000; ++k)
        {
            double const b = bstar * (0.5 + k * 1.5 / 9999);
            best = std::min(best, b + 3 * g / (theta * theta * theta * b * b));
        }
        CHECK(std::abs(best - critical_a(g, theta)) < 1e-6);
    }
}

TEST_CASE("b2 root")
{
    CHECK(b2_root(3.0, 4.0 / 3.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    double const g = 2.0, theta = 1.2;
    double const ac = critical_a(g, theta);
    CHECK(b2_root(ac, g, theta) == doctest::Approx(std::cbrt(6 * g) / theta).epsilon(1e-8));
    for (double a : {ac * (1 + 1e-6), ac * 1.1, ac * 3, 1e4})
    {
        double const b = b2_root(a, g, theta);
        CHECK(b >= b_stationary(g, theta));
        double const residual = theta * b + 3 * g / (b * b * theta * theta) - theta * a;
        CHECK(std::abs(residual) <= 1e-10 * theta * a);
    }
    CHECK(b2_root(1e6, g, theta) == doctest::Approx(1e6).epsilon(1e-10));
    CHECK_THROWS_AS(b2_root(0.99 * ac, g, theta), Error);
}

TEST_CASE("b2 returns the larger of two straddling roots")
{
    double const g = 2.0, theta = 1.0;
    double const a = critical_a(g, theta) * 1.01;
    double const bstar = b_stationary(g, theta);
    auto f = [&](double b) { return b + 3 * g / (b * b) - a; };
    double lo = 1e-3, hi = bstar;
    for (int i = 0; i < 200; ++i)
    {
        double const mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    double const small_root = lo;
    double const b = b2_root(a, g, theta);
    CHECK(small_root < bstar);
    CHECK(b > bstar);
    CHECK(std::abs(f(b)) < 1e-10);
}

TEST_CASE("rate 2b")
{
    CHECK(rate_2b(9.0) == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(rate_2b(pi * pi / 2) == doctest::Approx(-2.4552).epsilon(1e-4));
}

TEST_CASE("x_b root residuals and limits")
{
    for (double g : {0.5, 1.0, 6.0})
        for (double theta : {0.5, 1.0, 2.0})
            for (double b : {0.01, 1.0, 50.0})
            {
                auto const r = x_b_root(b, g, theta);
                CHECK(r.x > 0);
                CHECK(std::abs(3 * g / (r.x * r.x) - r.x - 3 * theta * b) <= 1e-10);
                CHECK(r.residual <= 1e-10);
                CHECK(std::isfinite(r.companion));
                CHECK(r.companion > 0);
            }
    CHECK(x_b_root(1e-12, 1.0 / 3.0, 1.0).x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(x_b_root(1e8, 1.0, 1.0).x < 1e-3);
    CHECK_THROWS_AS(x_b_root(0.0, 1.0, 1.0), Error);
}

TEST_CASE("solver at a = 0 matches the closed form")
{
    auto const s = solve_q_shooting(0.0, 9.0, 1.0);
    CHECK(s.q0 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(s.residual_at_1 < 1e-8);
    double const g = pi * pi / 2, theta = 1.3;
    auto const s2 = solve_q_shooting(0.0, g, theta);
    CHECK(std::abs(theta * s2.q0 - std::cbrt(3 * g)) < 1e-6);
    CHECK(std::abs(s2.rate - rate_2b(g)) < 1e-6);
    for (std::size_t k = 0; k < s2.t_grid.size(); k += 97)
    {
        double const t = s2.t_grid[k];
        CHECK(s2.q_grid[k] == doctest::Approx(s2.q0 * std::cbrt(1 - t)).epsilon(1e-6));
    }
}

TEST_CASE("solver invariants across the subcritical range")
{
    double const g = pi * pi / 2, theta = 1.0;
    double const ac = critical_a(g, theta);
    double prev = INFINITY;
    for (double f : {0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.99})
    {
        auto const s = solve_q_shooting(f * ac, g, theta);
        CHECK(s.q0 > 0);
        CHECK(s.q0 < prev);
        prev = s.q0;
        CHECK(s.residual_at_1 <= 1e-8);
        CHECK(s.identity_defect <= 1e-6);
        CHECK(std::isfinite(s.integral_check));
        CHECK(std::abs(s.q0_shooting - s.q0) <= 1e-6 * std::max(1.0, s.q0));
        CHECK(s.rate == doctest::Approx(-theta * s.q0).epsilon(1e-15));
        CHECK(s.q_grid.back() == 0.0);
        for (std::size_t k = 0; k + 1 < s.q_grid.size(); ++k)
            REQUIRE(s.q_grid[k] > 0);
        // decreasing near t = 1
        std::size_t const m = s.q_grid.size();
        for (std::size_t k = m - 20; k + 1 < m; ++k)
            CHECK(s.q_grid[k + 1] < s.q_grid[k]);
    }
}

TEST_CASE("solver regime checks")
{
    double const g = pi * pi / 2;
    CHECK_THROWS_AS(solve_q_shooting(-0.1, g, 1.0), Error);
    CHECK_THROWS_AS(solve_q_shooting(critical_a(g, 1.0), g, 1.0), Error);
    try
    {
        solve_q_shooting(critical_a(g, 1.0) * 1.1, g, 1.0);
    }
    catch (Error const& e)
    {
        CHECK(e.kind() == ErrorKind::numeric);
    }
}

TEST_CASE("sweep CSV columns")
{
    std::ostringstream os;
    write_sweep_csv(os, {solve_q_shooting(0.0, 9.0, 1.0)});
    auto const text = os.str();
    CHECK(text.rfind("a,q0,rate,residual,integral_check\n", 0) == 0);
    CHECK(text.find("\n0,3") != std::string::npos);
}
