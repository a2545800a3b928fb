// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "brwre/error.hpp"
#include "brwre/laplace_stats.hpp"
#include "brwre/rate_solver.hpp"
#include "brwre/tilted_walk.hpp"

using namespace brwre;
using std::numbers::pi;

namespace {

std::shared_ptr<EnvironmentModel const> share(EnvironmentModel m)
{
    return std::make_shared<EnvironmentModel const>(std::move(m));
}

// Associated walk is a standard normal walk: theta* = 1, sigma_Q = 1.
EnvironmentModel unit_walk_model()
{
    double const e = std::exp(0.5);
    return EnvironmentModel::point_mass(BroodLaw::gaussian("unit", {{1, 2 - e}, {2, e - 1}}, 0.0, 1.0));
}

struct Tube
{
    EnvironmentModel model = unit_walk_model();
    ModelConstants constants = model_constants(model, GammaParams{});
};

TubeSpec flat(double half_width)
{
    TubeSpec t;
    t.lower = PiecewiseLinear::constant(-half_width);
    t.upper = PiecewiseLinear::constant(half_width);
    t.entry = {-half_width / 5, half_width / 5};
    return t;
}

}  // namespace

TEST_CASE("atom tilt of a +-1 binary brood")
{
    auto const tilt = tilt_law(BroodLaw::finite("pm", {{1.0, {1.0, -1.0}}}), 1.0);
    REQUIRE(tilt.exact());
    double const e = std::exp(1.0);
    double p_minus = 0, p_plus = 0;
    for (auto const& a : tilt.atoms())
    {
        CHECK(a.mark == 2);
        (a.step < 0 ? p_minus : p_plus) += a.probability;
    }
    CHECK(p_minus == doctest::Approx(e / (e + 1 / e)).epsilon(1e-14));
    CHECK(p_plus == doctest::Approx(1 / (e * e + 1)).epsilon(1e-14));
    CHECK(std::abs(tilt.total_mass() - 1) <= 1e-12);
}

TEST_CASE("zero-displacement tilt is a point mass")
{
    auto const tilt = tilt_law(BroodLaw::finite("z", {{1.0, {0.0, 0.0}}}), 0.7);
    CHECK(tilt.mean() == 0);
    CHECK(tilt.variance() == 0);
    for (auto const& a : tilt.atoms())
        CHECK(a.mark == 2);
}

TEST_CASE("tilted mean and variance are kappa derivatives")
{
    auto const gauss = BroodLaw::gaussian("g", {{2, 1.0}}, 0.0, 1.0);
    double const theta = std::sqrt(2 * std::log(2.0));
    auto const gt = tilt_law(gauss, theta);
    CHECK(gt.gaussian());
    CHECK(std::abs(gt.mean() + theta) <= 1e-12);
    CHECK(std::abs(gt.mean() + *gauss.log_laplace(theta, 1)) <= 1e-10);

    auto const finite = BroodLaw::finite("f", {{0.3, {1.0, -0.5}}, {0.2, {}}, {0.5, {0.0, 2.0, -1.0}}});
    for (double theta2 : {0.3, 1.1})
    {
        auto const ft = tilt_law(finite, theta2);
        CHECK(std::abs(ft.total_mass() - 1) <= 1e-12);
        CHECK(std::abs(ft.mean() + *finite.log_laplace(theta2, 1)) <= 1e-10);
        CHECK(std::abs(ft.variance() - *finite.log_laplace(theta2, 2)) <= 1e-10);
    }
    CHECK_THROWS_AS(tilt_law(BroodLaw::finite("dead", {{1.0, {}}}), 1.0), Error);
}

TEST_CASE("Gaussian closed-form tilt agrees with a rejection-sampling oracle")
{
    // Target weight of (child zeta, brood size k): P(brood) e^{-theta zeta}.
    // Propose a brood, pick a child uniformly, accept with prob N e^{-theta zeta} / M.
    double const mu = 0.3, sigma = 1.2, theta = 0.5;
    auto const law = BroodLaw::gaussian("g", {{1, 0.3}, {3, 0.7}}, mu, sigma);
    auto const tilt = tilt_law(law, theta);
    double const floor = mu - 7 * sigma;
    double const bound = 3 * std::exp(-theta * floor);
    RandomStream rng(77);
    std::size_t accepted = 0, mark3 = 0;
    double sum = 0, sq = 0;
    while (accepted < 100000)
    {
        auto const brood = law.sample(rng);
        std::size_t const n = brood.displacements.size();
        double const z = brood.displacements[std::min<std::size_t>(n - 1, std::size_t(rng.uniform() * n))];
        if (rng.uniform() * bound < n * std::exp(-theta * z))
        {
            ++accepted;
            sum += z;
            sq += z * z;
            mark3 += n == 3;
        }
    }
    double const m = sum / accepted;
    double const v = sq / accepted - m * m;
    CHECK(std::abs(m - (mu - theta * sigma * sigma)) < 4 * sigma / std::sqrt(double(accepted)));
    CHECK(std::abs(v - sigma * sigma) < 4 * sigma * sigma * std::sqrt(2.0 / accepted));
    double p3 = 0;
    for (auto const& c : tilt.mark_law())
        if (c.count == 3)
            p3 = c.probability;
    CHECK(p3 == doctest::Approx(2.1 / 2.4).epsilon(1e-12));
    CHECK(std::abs(double(mark3) / accepted - p3) < 4 * std::sqrt(p3 * (1 - p3) / accepted));
}

TEST_CASE("many-to-one fixtures close to 1e-10")
{
    auto const fixtures = many_to_one_fixtures();
    CHECK(fixtures.size() >= 15);
    for (auto const& fx : fixtures)
    {
        auto const r = many_to_one_check(fx.env, fx.depth, fx.f, fx.caps);
        INFO(fx.name);
        CHECK(r.relative_gap <= 1e-10);
        CHECK(r.lhs > 0);
    }
}

TEST_CASE("many-to-one worked examples")
{
    auto const binary = share(EnvironmentModel::point_mass(BroodLaw::finite("bz", {{1.0, {0.0, 0.0}}})));
    auto const one = many_to_one_check(make_environment(binary, {0}, 1.0), 1,
                                       [](std::span<double const>) { return 1.0; });
    CHECK(one.lhs == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(one.rhs == doctest::Approx(2.0).epsilon(1e-15));

    auto const pm = share(EnvironmentModel::point_mass(BroodLaw::finite("pm", {{1.0, {1.0, -1.0}}})));
    auto const exp_f = many_to_one_check(make_environment(pm, {0}, 1.0), 1,
                                         [](std::span<double const> v) { return std::exp(-v[0]); });
    CHECK(exp_f.lhs == doctest::Approx(std::exp(-1.0) + std::exp(1.0)).epsilon(1e-14));
    CHECK(exp_f.gap <= 1e-12);

    auto const two = share(EnvironmentModel::mixture(
        {BroodLaw::finite("b", {{1.0, {1.0, -1.0}}}), BroodLaw::finite("t", {{1.0, {-1.0, 0.0, 1.0}}})},
        {0.5, 0.5}));
    auto const below = many_to_one_check(make_environment(two, {0, 1}, 0.8), 2, [](std::span<double const> v) {
        for (double x : v)
            if (x > 0)
                return 0.0;
        return 1.0;
    });
    CHECK(below.lhs == doctest::Approx(3.0).epsilon(1e-14));  // -1 then -1, 0, +1
    CHECK(below.relative_gap <= 1e-10);
}

TEST_CASE("many-to-one preconditions")
{
    auto const binary = share(EnvironmentModel::point_mass(BroodLaw::finite("bz", {{1.0, {0.0, 0.0}}})));
    auto const env = make_environment(binary, {0, 0, 0, 0, 0}, 1.0);
    auto f = [](std::span<double const>) { return 1.0; };
    CHECK_THROWS_AS(many_to_one_check(env, 5, f), Error);
    auto const gauss = share(EnvironmentModel::point_mass(BroodLaw::gaussian("g", {{2, 1.0}}, 0, 1)));
    try
    {
        many_to_one_check(make_environment(gauss, {0}, 1.0), 1, f);
        FAIL("expected an error");
    }
    catch (Error const& e)
    {
        CHECK(e.kind() == ErrorKind::unsupported);
    }
}

TEST_CASE("associated walk of the zero-displacement binary law is deterministic")
{
    auto const binary = share(EnvironmentModel::point_mass(BroodLaw::finite("bz", {{1.0, {0.0, 0.0}}})));
    auto const path = sample_associated_walk(draw_environment(binary, 10, 1.0, 1), 10, 5);
    for (std::size_t i = 0; i <= 10; ++i)
        CHECK(path.T[i] == doctest::Approx(i * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("associated walk increments: annealed mean zero, quenched variance sigma_Q^2")
{
    GaussianFamilySpec spec;
    spec.count_laws = {{0.5, {{2, 1.0}}}, {0.5, {{1, 0.4}, {3, 0.6}}}};
    spec.shapes = {{0.5, 0.0, 1.0}, {0.5, 0.5, 1.5}};
    auto const model = share(EnvironmentModel::gaussian_family(spec));
    auto const c = solve_theta_star(*model);
    double const theta = c.theta_star;
    constexpr std::size_t n = 1000000;
    double s1 = 0, s2 = 0, d2 = 0, d4 = 0;
    RandomStream root(31);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const env = draw_environment(model, 1, theta, root.split(i)());
        auto const path = sample_associated_walk(env, 1, root.split(i)());
        double const t1 = path.T[1];
        double const quenched_mean = -theta * *env.law(1).log_laplace(theta, 1) + env.kappa[0];
        double const d = t1 - quenched_mean;
        s1 += t1;
        s2 += t1 * t1;
        d2 += d * d;
        d4 += d * d * d * d;
    }
    double const mean = s1 / n;
    double const sd = std::sqrt(s2 / n - mean * mean);
    CHECK(std::abs(mean) < 4 * sd / std::sqrt(double(n)));
    double const var = d2 / n;
    double const var_se = std::sqrt((d4 / n - var * var) / n);
    CHECK(std::abs(var - c.sigma_Q * c.sigma_Q) < 4 * var_se);
}

TEST_CASE("tube constant and validation")
{
    CHECK(flat(5).c_gh() == doctest::Approx(0.01).epsilon(1e-15));
    TubeSpec slanted;
    slanted.lower = PiecewiseLinear({0, 0.5, 1}, {-1, -2, -1});
    slanted.upper = PiecewiseLinear::constant(1);
    // int_0^1 (1 - g)^-2 with 1 - g = 2 + 2 min(s, 1 - s): 2 * int_0^{1/2} (2 + 2s)^-2 ds = 1/6.
    CHECK(slanted.c_gh() == doctest::Approx(1.0 / 6).epsilon(1e-12));

    TubeSpec bad = flat(1);
    bad.lower = PiecewiseLinear::constant(1);
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = flat(1);
    bad.entry = {-0.5, 1.0};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.start = TubeStart::upper_boundary;
    CHECK_NOTHROW(bad.validate());
    bad = flat(1);
    bad.exit = Window{-2, 0};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("exit window is an event inclusion")
{
    Tube const setup;
    auto constrained = flat(2);
    constrained.exit = Window{-0.5, 1.0};
    for (std::uint64_t seed : {1, 2, 3})
    {
        auto const free = tube_probability(setup.model, setup.constants, flat(2), 216, 4000, seed);
        auto const exit = tube_probability(setup.model, setup.constants, constrained, 216, 4000, seed);
        CHECK(exit.hits <= free.hits);
        CHECK(exit.p_hat <= free.p_hat);
    }
}

TEST_CASE("tube estimates are thread-count independent")
{
    Tube const setup;
    auto const a = tube_probability(setup.model, setup.constants, flat(2), 125, 3000, 9, Executor(1));
    auto const b = tube_probability(setup.model, setup.constants, flat(2), 125, 3000, 9, Executor(6));
    CHECK(a.hits == b.hits);
    std::ostringstream sa, sb;
    write_tube_csv(sa, {a});
    write_tube_csv(sb, {b});
    CHECK(sa.str() == sb.str());
}

TEST_CASE("doubling the tube width divides the normalised rate by about four")
{
    Tube const setup;
    std::size_t const n = 343;
    auto const narrow = tube_probability(setup.model, setup.constants, flat(1), n, 200000, 4);
    auto const wide = tube_probability(setup.model, setup.constants, flat(2), n, 200000, 5);
    REQUIRE(narrow.hits >= 100);
    CHECK(narrow.predicted_rate == doctest::Approx(0.25 * pi * pi / 2).epsilon(1e-12));
    double const ratio = narrow.normalized_rate / wide.normalized_rate;
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("boundary start approaches the interior rate as n grows")
{
    Tube const setup;
    auto boundary = flat(2);
    boundary.start = TubeStart::upper_boundary;
    boundary.entry = {0.0, 2.0};
    double gap[2];
    std::size_t const ns[2] = {64, 512};
    for (int k = 0; k < 2; ++k)
    {
        auto const in = tube_probability(setup.model, setup.constants, flat(2), ns[k], 50000, 10 + k);
        auto const at = tube_probability(setup.model, setup.constants, boundary, ns[k], 50000, 20 + k);
        REQUIRE(at.hits >= 100);
        gap[k] = at.normalized_rate - in.normalized_rate;
    }
    CHECK(gap[0] > 0);
    CHECK(gap[1] < gap[0]);
}

TEST_CASE("zero hits give a flagged one-sided bound")
{
    Tube const setup;
    auto const est = tube_probability(setup.model, setup.constants, flat(0.2), 1000, 200, 1);
    CHECK(est.hits == 0);
    CHECK(est.one_sided);
    CHECK(est.p_hat == doctest::Approx(1 - std::pow(0.05, 1.0 / 200)).epsilon(1e-12));
}
