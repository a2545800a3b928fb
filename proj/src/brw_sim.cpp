// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/brw_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "brwre/csv.hpp"
#include "brwre/error.hpp"
#include "brwre/rate_solver.hpp"

namespace brwre {
namespace {

constexpr std::uint64_t kResampleSlot = ~std::uint64_t{0};

// State of one killed system between generations.
struct SystemState
{
    PopulationSnapshot snapshot = PopulationSnapshot::root();
    double K = 0;
    bool truncated = false;
};

void require_theta(BarrierSpec const& barrier, ModelConstants const& constants)
{
    if (barrier.mode == BarrierMode::random_centered && !(constants.theta_star > 0))
        throw config_error("random-centred barrier needs the critical tilt");
}

void advance(SystemState& state,
             EnvironmentModel const& model,
             std::vector<double> const& kappa,
             double theta,
             BarrierSpec const& barrier,
             std::size_t until,
             std::size_t cap,
             RandomStream& env_rng,
             RandomStream& particle_rng)
{
    while (state.snapshot.generation < until && state.snapshot.y_n() > 0)
    {
        std::size_t const j = model.draw_index(env_rng);
        state.K += kappa[j];
        std::size_t const i = state.snapshot.generation + 1;
        state.snapshot = step_generation(
            state.snapshot, model.law(j), barrier.value(i, state.K, theta), cap, particle_rng);
        state.truncated = state.truncated || state.snapshot.truncated;
    }
    if (state.snapshot.y_n() == 0)
        state.snapshot.generation = std::max(state.snapshot.generation, until);
}

std::vector<double> kappa_or_zero(EnvironmentModel const& model, BarrierSpec const& barrier,
                                  double theta)
{
    if (barrier.mode == BarrierMode::fixed_centered && !(theta > 0))
        return std::vector<double>(model.size(), 0.0);
    return kappa_table(model, theta);
}

}  // namespace

void BarrierSpec::validate() const
{
    if (std::isnan(a) || a == -std::numeric_limits<double>::infinity())
        throw config_error("barrier.a must be a number or +inf");
    if (!(alpha > 0 && alpha <= 1))
        throw config_error("barrier.alpha must lie in (0, 1]");
}

double BarrierSpec::value(std::size_t i, double K_i, double theta) const noexcept
{
    if (a == std::numeric_limits<double>::infinity())
        return a;
    double const drift = a * std::pow(static_cast<double>(i), alpha);
    return mode == BarrierMode::random_centered ? drift - K_i / theta : drift;
}

PopulationSnapshot step_generation(PopulationSnapshot const& snapshot,
                                   BroodLaw const& law,
                                   double barrier,
                                   std::size_t cap,
                                   RandomStream& rng)
{
    if (cap == 0)
        throw config_error("population cap must be >= 1");
    PopulationSnapshot next;
    next.generation = snapshot.generation + 1;
    std::vector<double>& out = next.positions;
    out.reserve(2 * snapshot.positions.size());
    law.sample_generation(rng, snapshot.positions, barrier, out);
    if (out.size() > cap)
    {
        // Selection sampling: keep each element with probability needed / remaining.
        std::size_t needed = cap, remaining = out.size(), kept = 0;
        for (std::size_t i = 0; needed > 0; ++i, --remaining)
            if (rng.uniform() * static_cast<double>(remaining) < static_cast<double>(needed))
            {
                out[kept++] = out[i];
                --needed;
            }
        out.resize(kept);
        next.truncated = true;
    }
    if (!out.empty())
        next.m_n = *std::min_element(out.begin(), out.end());
    return next;
}

SurvivalEstimate estimate_survival(EnvironmentModel const& model,
                                   ModelConstants const& constants,
                                   BarrierSpec const& barrier,
                                   std::size_t n,
                                   std::size_t replicas,
                                   std::size_t cap,
                                   std::uint64_t seed,
                                   Executor const& executor)
{
    barrier.validate();
    require_theta(barrier, constants);
    if (cap == 0)
        throw config_error("population cap must be >= 1");
    if (replicas < 1)
        throw config_error("survival estimate needs at least one replica");
    double const theta = constants.theta_star;
    std::vector<double> const kappa = kappa_or_zero(model, barrier, theta);

    SurvivalEstimate est{};
    est.n = n;
    est.replicas = replicas;
    est.outcomes.resize(replicas);
    RandomStream const root = RandomStream(seed).split(stream_slot::replicas);
    executor.parallel_for(replicas, [&](std::size_t r) {
        RandomStream const rs = root.split(r);
        RandomStream env_rng = rs.split(stream_slot::environment);
        RandomStream particle_rng = rs.split(stream_slot::particles);
        SystemState state;
        advance(state, model, kappa, theta, barrier, n, cap, env_rng, particle_rng);
        auto const y = state.snapshot.y_n();
        est.outcomes[r] = {r, n, y, state.snapshot.m_n, y > 0, state.truncated};
    });

    std::size_t truncated = 0;
    for (auto const& o : est.outcomes)
    {
        est.survivors += o.survived ? 1 : 0;
        truncated += o.truncated ? 1 : 0;
    }
    double const rd = static_cast<double>(replicas);
    est.p_hat = static_cast<double>(est.survivors) / rd;
    est.stderr_value = std::sqrt(est.p_hat * (1 - est.p_hat) / rd);
    est.truncation_rate = static_cast<double>(truncated) / rd;
    return est;
}

SplittingEstimate estimate_survival_splitting(EnvironmentModel const& model,
                                              ModelConstants const& constants,
                                              BarrierSpec const& barrier,
                                              std::size_t n,
                                              std::size_t replicas,
                                              std::size_t cap,
                                              std::size_t stage_length,
                                              std::uint64_t seed,
                                              Executor const& executor)
{
    barrier.validate();
    require_theta(barrier, constants);
    if (cap == 0)
        throw config_error("population cap must be >= 1");
    if (replicas < 2)
        throw config_error("splitting estimate needs at least two systems");
    if (stage_length < 1)
        throw config_error("splitting stage length must be >= 1");
    double const theta = constants.theta_star;
    std::vector<double> const kappa = kappa_or_zero(model, barrier, theta);

    SplittingEstimate est{};
    est.n = n;
    est.replicas = replicas;
    std::vector<SystemState> systems(replicas);
    RandomStream const root = RandomStream(seed).split(stream_slot::replicas);
    double const rd = static_cast<double>(replicas);
    std::size_t truncated_events = 0, stage_count = 0;

    for (std::size_t stage = 0, g = 0; g < n; ++stage)
    {
        std::size_t const until = std::min(n, g + stage_length);
        RandomStream const stage_root = root.split(stage);
        executor.parallel_for(replicas, [&](std::size_t i) {
            RandomStream const rs = stage_root.split(i);
            RandomStream env_rng = rs.split(stream_slot::environment);
            RandomStream particle_rng = rs.split(stream_slot::particles);
            systems[i].truncated = false;
            advance(systems[i], model, kappa, theta, barrier, until, cap, env_rng, particle_rng);
        });
        g = until;
        ++stage_count;

        std::vector<std::size_t> alive;
        for (std::size_t i = 0; i < replicas; ++i)
        {
            truncated_events += systems[i].truncated ? 1 : 0;
            if (systems[i].snapshot.y_n() > 0)
                alive.push_back(i);
        }
        double const fraction = static_cast<double>(alive.size()) / rd;
        est.stage_fractions.push_back(fraction);
        if (alive.empty())
        {
            est.extinct = true;
            break;
        }
        est.log_p_hat += std::log(fraction);
        if (g == n)
            break;
        // Refill dead slots with copies of uniformly chosen survivors.
        RandomStream pick = stage_root.split(kResampleSlot);
        for (std::size_t i = 0; i < replicas; ++i)
            if (systems[i].snapshot.y_n() == 0)
            {
                auto const k = static_cast<std::size_t>(pick.uniform() * static_cast<double>(alive.size()));
                systems[i] = systems[alive[std::min(k, alive.size() - 1)]];
            }
    }
    if (est.extinct)
        est.log_p_hat += std::log(1 - std::pow(0.05, 1 / rd));
    est.p_hat = est.extinct ? 0.0 : std::exp(est.log_p_hat);
    est.truncation_rate
        = static_cast<double>(truncated_events) / (rd * static_cast<double>(std::max<std::size_t>(stage_count, 1)));
    return est;
}

std::vector<RatePoint> estimate_extinction_rate(EnvironmentModel const& model,
                                                ModelConstants const& constants,
                                                BarrierSpec const& barrier,
                                                std::vector<std::size_t> const& n_grid,
                                                ExtinctionRateOptions const& options,
                                                std::uint64_t seed,
                                                Executor const& executor)
{
    if (n_grid.empty())
        throw config_error("extinction rate needs at least one horizon");
    if (options.ray_b && !(*options.ray_b > 0))
        throw config_error("ray barrier coefficient b must be positive");
    double const nan = std::numeric_limits<double>::quiet_NaN();
    double const gamma = constants.gamma_sigma;
    double const theta = constants.theta_star;
    bool const have_gamma = std::isfinite(gamma) && gamma > 0 && theta > 0;

    double predicted = nan, bound = nan;
    if (have_gamma && options.ray_b)
    {
        XbRoot const root = x_b_root(*options.ray_b, gamma, theta);
        predicted = -root.x;
        bound = -root.companion;
    }
    else if (have_gamma && std::abs(barrier.alpha - 1.0 / 3.0) < 1e-12 && barrier.a >= 0)
    {
        predicted = barrier.a >= critical_a(gamma, theta)
                        ? 0.0
                        : solve_q_shooting(barrier.a, gamma, theta).rate;
    }
    else if (have_gamma && barrier.alpha < 1.0 / 3.0 && barrier.a >= 0)
    {
        predicted = rate_2b(gamma);
    }

    std::vector<RatePoint> points;
    RandomStream const seeds(seed);
    for (std::size_t k = 0; k < n_grid.size(); ++k)
    {
        std::size_t const n = n_grid[k];
        if (n < 1)
            throw config_error("horizons must be >= 1");
        BarrierSpec b = barrier;
        if (options.ray_b)
        {
            b.alpha = 1;
            b.a = *options.ray_b * std::pow(static_cast<double>(n), -2.0 / 3.0);
        }
        std::uint64_t const horizon_seed = RandomStream(seeds.split(k))();
        RatePoint point{n, 0, 0, predicted, bound, false, 0};
        double const scale = std::cbrt(static_cast<double>(n));
        double const rd = static_cast<double>(options.replicas);
        if (options.method == RateMethod::direct)
        {
            SurvivalEstimate const est = estimate_survival(
                model, constants, b, n, options.replicas, options.cap, horizon_seed, executor);
            point.p_hat = est.p_hat;
            point.truncation_rate = est.truncation_rate;
            point.one_sided = est.survivors == 0;
            double const p = point.one_sided ? 1 - std::pow(0.05, 1 / rd) : est.p_hat;
            point.empirical_rate = std::log(p) / scale;
        }
        else
        {
            SplittingEstimate const est = estimate_survival_splitting(
                model, constants, b, n, options.replicas, options.cap, options.stage_length,
                horizon_seed, executor);
            point.p_hat = est.p_hat;
            point.truncation_rate = est.truncation_rate;
            point.one_sided = est.extinct;
            point.empirical_rate = est.log_p_hat / scale;
        }
        points.push_back(point);
    }
    return points;
}

void write_survival_csv(std::ostream& os, std::vector<SurvivalEstimate> const& estimates)
{
    CsvRow(os) << "replica" << "n" << "y_n" << "m_n" << "survived" << "truncated";
    for (auto const& est : estimates)
        for (auto const& o : est.outcomes)
            CsvRow(os) << static_cast<std::uint64_t>(o.replica) << static_cast<std::uint64_t>(o.n)
                       << static_cast<std::uint64_t>(o.y_n) << o.m_n << o.survived
                       << o.truncated;
}

void write_rate_csv(std::ostream& os, std::vector<RatePoint> const& points)
{
    CsvRow(os) << "n" << "p_hat" << "empirical_rate" << "predicted_rate" << "predicted_bound"
               << "one_sided" << "truncation_rate";
    for (auto const& p : points)
        CsvRow(os) << static_cast<std::uint64_t>(p.n) << p.p_hat << p.empirical_rate
                   << p.predicted_rate << p.predicted_bound << p.one_sided << p.truncation_rate;
}

}  // namespace brwre
