// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number (e.g. `acceptance 1 4 6`); `--threads N` sets the pool.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "brwre/brw_sim.hpp"
#include "brwre/csv.hpp"
#include "brwre/gamma_engine.hpp"
#include "brwre/laplace_stats.hpp"
#include "brwre/rate_solver.hpp"
#include "brwre/tilted_walk.hpp"

using namespace brwre;
using std::numbers::pi;

namespace {

struct Verdict
{
    bool pass;
    std::string detail;
};

std::string fmt(char const* format, auto... args)
{
    char buffer[512];
    std::snprintf(buffer, sizeof(buffer), format, args...);
    return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Binary branching with N(0, 1) displacements, no environment randomness.
EnvironmentModel binary_gaussian()
{
    return EnvironmentModel::point_mass(BroodLaw::gaussian("binary-gauss", {{2, 1.0}}, 0.0, 1.0));
}

// One- or two-child broods with E N = sqrt(e): theta* = 1 and sigma_Q = 1 exactly.
EnvironmentModel unit_walk()
{
    double const r = std::exp(0.5);
    return EnvironmentModel::point_mass(
        BroodLaw::gaussian("unit-walk", {{1, 2 - r}, {2, r - 1}}, 0.0, 1.0));
}

Executor const* pool = nullptr;

//---------------------------------------------------------------------------//
Verdict gamma_at_zero()
{
    GammaParams p;  // t = 50, dt = 0.01, m = 201, R = 20
    p.seed = 1;
    auto const start = std::chrono::steady_clock::now();
    auto const est = estimate_gamma(0.0, p, serial_executor());
    double const elapsed = seconds_since(start);
    double const target = pi * pi / 2;
    double const rel = std::abs(est.value - target) / target;
    return {rel <= 0.05 && elapsed < 60,
            fmt("gamma(0) = %.6f vs %.6f (rel %.2e, tol 5e-2), %.1f s single-threaded (limit 60 s)",
                est.value, target, rel, elapsed)};
}

Verdict gamma_bound_and_evenness()
{
    GammaParams p;
    bool pass = true;
    std::string detail;
    std::uint64_t seed = 100;
    for (double beta : {0.5, 1.0})
    {
        // independent W paths for +beta and -beta
        p.seed = seed++;
        auto const plus = estimate_gamma(beta, p, *pool);
        p.seed = seed++;
        auto const minus = estimate_gamma(-beta, p, *pool);
        double const bound = pi * pi * (1 + beta * beta) / 2;
        bool const above = plus.value >= bound - 3 * plus.stderr_value
                           && minus.value >= bound - 3 * minus.stderr_value;
        double const joint = std::hypot(plus.stderr_value, minus.stderr_value);
        bool const even = std::abs(plus.value - minus.value) <= 3 * joint;
        pass = pass && above && even;
        detail += fmt("b=%.1f: %.4f+-%.4f / %.4f+-%.4f (bound %.4f, |diff| %.4f <= %.4f); ", beta,
                      plus.value, plus.stderr_value, minus.value, minus.stderr_value, bound,
                      std::abs(plus.value - minus.value), 3 * joint);
    }
    return {pass, detail};
}

Verdict many_to_one()
{
    auto const start = std::chrono::steady_clock::now();
    double worst = 0;
    std::size_t count = 0;
    for (auto const& fx : many_to_one_fixtures())
    {
        worst = std::max(worst, many_to_one_check(fx.env, fx.depth, fx.f, fx.caps).relative_gap);
        ++count;
    }
    double const elapsed = seconds_since(start);
    return {worst <= 1e-10 && elapsed < 5,
            fmt("%zu fixtures, worst relative gap %.2e (tol 1e-10), %.2f s (limit 5 s)", count, worst,
                elapsed)};
}

Verdict critical_identities()
{
    auto const model = binary_gaussian();
    auto const c = model_constants(model, GammaParams{}, *pool);
    double const theta = c.theta_star, g = c.gamma_sigma;
    double const ac = critical_a(g, theta);

    double const bstar = std::cbrt(6 * g) / theta;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k)
    {
        double const b = bstar * (0.5 + 1.5 * k / 9999.0);
        best = std::min(best, b + 3 * g / (theta * theta * theta * b * b));
    }
    double const d1 = std::abs(best - ac);

    double const k2 = annealed_kappa(model, theta, 2).value;
    double const homogeneous = homogeneous_critical_a(theta, k2);
    double const d2 = std::abs(ac - homogeneous) / ac;

    double const d3 = std::abs(b2_root(ac, g, theta) - bstar);
    bool const pass = d1 <= 1e-6 && d2 <= 4 * std::numeric_limits<double>::epsilon() && d3 <= 1e-8;
    return {pass, fmt("a_c = %.10f; grid min gap %.2e (tol 1e-6); vs a0 formula rel %.2e (machine); "
                      "b2(a_c) gap %.2e (tol 1e-8)",
                      ac, d1, d2, d3)};
}

Verdict solver_consistency()
{
    auto const model = binary_gaussian();
    auto const c = model_constants(model, GammaParams{}, *pool);
    double const theta = c.theta_star, g = c.gamma_sigma;
    double const ac = critical_a(g, theta);
    auto const zero = solve_q_shooting(0.0, g, theta);
    double const d0 = std::abs(theta * zero.q0 - std::cbrt(3 * g));
    double const d2b = std::abs(zero.rate - rate_2b(g));
    bool pass = d0 <= 1e-6 && d2b <= 1e-6;
    double worst_residual = 0, worst_identity = 0;
    double previous = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    std::string q0s;
    for (double f : {0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99})
    {
        auto const s = f == 0.0 ? zero : solve_q_shooting(f * ac, g, theta);
        worst_residual = std::max(worst_residual, s.residual_at_1);
        worst_identity = std::max(worst_identity, s.identity_defect);
        decreasing = decreasing && s.q0 < previous;
        previous = s.q0;
        q0s += fmt("%.3g ", s.q0);
    }
    pass = pass && worst_residual <= 1e-8 && worst_identity <= 1e-6 && decreasing;
    return {pass, fmt("theta q(0) gap %.2e, vs rate_2b %.2e (tol 1e-6); max |q(1)| %.2e (tol 1e-8); "
                      "identity %.2e (tol 1e-6); q(0) over a/a_c = 0..0.99: %s%s",
                      d0, d2b, worst_residual, worst_identity, q0s.c_str(),
                      decreasing ? "decreasing" : "NOT decreasing")};
}

Verdict x_b_roots()
{
    double worst = 0;
    bool finite = true;
    int count = 0;
    for (double g : {0.5, 2.0, 6.841})
        for (double theta : {0.5, 1.0, 1.7})
            for (double b : {0.05, 1.0, 20.0})
            {
                auto const r = x_b_root(b, g, theta);
                worst = std::max(worst, std::abs(3 * g / (r.x * r.x) - r.x - 3 * theta * b));
                finite = finite && r.x > 0 && std::isfinite(r.x) && r.companion > 0
                         && std::isfinite(r.companion);
                ++count;
            }
    return {worst <= 1e-10 && finite && count == 27,
            fmt("%d combinations, worst residual %.2e (tol 1e-10), roots and companions %s", count,
                worst, finite ? "positive and finite" : "NOT all positive/finite")};
}

Verdict small_deviation_trend()
{
    auto const model = unit_walk();
    auto const c = model_constants(model, GammaParams{}, *pool);
    TubeSpec tube;
    tube.lower = PiecewiseLinear::constant(-5);
    tube.upper = PiecewiseLinear::constant(5);
    tube.entry = {-1, 1};
    double const target = 0.01 * pi * pi / 2;
    std::vector<double> deviation;
    std::string detail = fmt("sigma_Q = %.6f; ", c.sigma_Q);
    std::uint64_t seed = 7000;
    for (std::size_t n : {1000, 3375, 8000})
    {
        auto const est = tube_probability(model, c, tube, n, 1000000, seed++, *pool);
        deviation.push_back(std::abs(est.normalized_rate - target));
        detail += fmt("n=%zu rate %.5f (p %.4f); ", n, est.normalized_rate, est.p_hat);
    }
    bool const close = deviation.back() <= 0.3 * target;
    bool const monotone = deviation[1] <= deviation[0] && deviation[2] <= deviation[1];
    detail += fmt("target %.5f, final rel dev %.3f (tol 0.30), deviation %s", target,
                  deviation.back() / target, monotone ? "non-increasing" : "NOT non-increasing");
    return {close && monotone, detail};
}

Verdict phase_transition()
{
    auto const model = binary_gaussian();
    auto const c = model_constants(model, GammaParams{}, *pool);
    std::size_t const cap = 100000;
    BarrierSpec low{0.2 * c.a_c, 1.0 / 3.0, BarrierMode::random_centered};
    BarrierSpec high{2.0 * c.a_c, 1.0 / 3.0, BarrierMode::random_centered};
    auto const p_low = estimate_survival(model, c, low, 100, 500, cap, 801, *pool);
    auto const p_high = estimate_survival(model, c, high, 100, 500, cap, 802, *pool);
    // pooled two-proportion standard error
    double const pooled = (p_low.survivors + p_high.survivors) / 1000.0;
    double const se = std::sqrt(pooled * (1 - pooled) * (2.0 / 500));
    bool const separated = p_high.p_hat - p_low.p_hat >= 3 * se;

    ExtinctionRateOptions opt;
    opt.replicas = 1000;
    opt.cap = cap;
    opt.method = RateMethod::splitting;
    opt.stage_length = 1;
    BarrierSpec zero{0.0, 1.0 / 3.0, BarrierMode::random_centered};
    auto const rate = estimate_extinction_rate(model, c, zero, {512}, opt, 803, *pool).front();
    double const limit = rate_2b(c.gamma_sigma);
    bool const in_band = rate.empirical_rate < 0 && rate.empirical_rate <= 0.5 * limit
                         && rate.empirical_rate >= 2 * limit && !rate.one_sided;
    return {separated && in_band,
            fmt("a_c = %.4f; survival %.3f at 2a_c vs %.3f at 0.2a_c (diff %.3f, 3 se = %.3f, "
                "truncation %.2f); rate at a=0, n=512: %.4f vs -(3 gamma)^(1/3) = %.4f (band [%.4f, %.4f])",
                c.a_c, p_high.p_hat, p_low.p_hat, p_high.p_hat - p_low.p_hat, 3 * se,
                p_high.truncation_rate, rate.empirical_rate, limit, 2 * limit, 0.5 * limit)};
}

// Serialise representative stochastic workloads with a given pool.
std::string determinism_digest(Executor const& executor)
{
    std::ostringstream os;
    GammaParams gp;
    gp.horizon = 10;
    gp.replicas = 6;
    gp.seed = 91;
    write_gamma_csv(os, {estimate_gamma(0.7, gp, executor)});

    GaussianFamilySpec spec;
    spec.count_laws = {{0.5, {{2, 1.0}}}, {0.5, {{1, 0.4}, {3, 0.6}}}};
    spec.shapes = {{0.5, 0.0, 1.0}, {0.5, 0.5, 1.5}};
    auto const random_env = EnvironmentModel::gaussian_family(spec);
    auto const c = model_constants(random_env, gp, executor);
    for (double v : {c.theta_star, c.sigma_A, c.sigma_Q, c.gamma_sigma, c.a_c})
        os << format_real(v) << '\n';

    TubeSpec tube;
    tube.lower = PiecewiseLinear::constant(-3);
    tube.upper = PiecewiseLinear({0, 0.5, 1}, {3, 4, 3});
    tube.entry = {-1, 1};
    tube.cap_exponent = 0.32;
    write_tube_csv(os, {tube_probability(random_env, c, tube, 216, 4000, 92, executor)});

    BarrierSpec barrier{0.7 * c.a_c, 1.0 / 3.0, BarrierMode::random_centered};
    write_survival_csv(os, {estimate_survival(random_env, c, barrier, 40, 200, 20000, 93, executor)});

    ExtinctionRateOptions opt;
    opt.replicas = 200;
    opt.cap = 20000;
    opt.method = RateMethod::splitting;
    opt.stage_length = 2;
    write_rate_csv(os, estimate_extinction_rate(random_env, c, barrier, {27, 64}, opt, 94, executor));
    write_sweep_csv(os, {solve_q_shooting(0.5 * c.a_c, c.gamma_sigma, c.theta_star)});
    return os.str();
}

Verdict determinism()
{
    auto const one = determinism_digest(Executor(1));
    auto const eight = determinism_digest(Executor(8));
    auto const again = determinism_digest(Executor(1));
    bool const same = one == eight && one == again;
    return {same, fmt("gamma, constants, tube, survival, splitting-rate and sweep output: %zu bytes, "
                      "1 vs 8 threads %s, rerun %s",
                      one.size(), one == eight ? "identical" : "DIFFERENT",
                      one == again ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv)
{
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
    {
        std::string const arg = argv[i];
        if (arg == "--threads" && i + 1 < argc)
            threads = static_cast<unsigned>(std::atoi(argv[++i]));
        else
            selected.insert(std::atoi(arg.c_str()));
    }
    Executor const executor(threads);
    pool = &executor;

    std::vector<std::pair<char const*, std::function<Verdict()>>> const criteria{
        {"gamma(0) golden value", gamma_at_zero},
        {"gamma lower bound and evenness", gamma_bound_and_evenness},
        {"many-to-one exactness", many_to_one},
        {"critical-constant identities", critical_identities},
        {"shooting-solver consistency", solver_consistency},
        {"x_b root", x_b_roots},
        {"small-deviation trend", small_deviation_trend},
        {"phase-transition comparison", phase_transition},
        {"determinism across thread counts", determinism},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k)
    {
        int const number = static_cast<int>(k + 1);
        if (!selected.empty() && !selected.count(number))
            continue;
        auto const start = std::chrono::steady_clock::now();
        Verdict v;
        try
        {
            v = criteria[k].second();
        }
        catch (std::exception const& e)
        {
            v = {false, std::string("error: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("criterion %d %s: %s (%.1f s) | %s\n", number, v.pass ? "PASS" : "FAIL",
                    criteria[k].first, seconds_since(start), v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
