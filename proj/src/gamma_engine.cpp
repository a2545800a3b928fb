// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/gamma_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/random/normal_distribution.hpp>

#include "brwre/csv.hpp"
#include "brwre/error.hpp"
#include "brwre/rng.hpp"

namespace brwre {
namespace {

double gaussian_density(double z, double variance)
{
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2 * std::numbers::pi * variance);
}

}  // namespace

void GammaParams::validate() const
{
    if (!(dt > 0))
        throw config_error("gamma: dt must be positive");
    if (!(horizon > dt))
        throw config_error("gamma: horizon must exceed dt");
    if (grid < 51 || grid % 2 == 0)
        throw config_error("gamma: grid must be odd and >= 51");
    if (replicas < 1)
        throw config_error("gamma: replicas must be >= 1");
    if (!(window_start >= 0 && window_start < 1))
        throw config_error("gamma: window_start must lie in [0, 1)");
    if (!(width > 0))
        throw config_error("gamma: width must be positive");
    if (5 * std::sqrt(dt) > width)
        throw config_error("gamma: dt too large, +-5 std of one step exceeds the tube width");
}

//---------------------------------------------------------------------------//
TubePropagator::TubePropagator(
    double dt, std::size_t grid, double width, KillingMode killing, double bridge_variance_factor)
    : dt_(dt), spacing_(width / static_cast<double>(grid - 1))
{
    auto const m = static_cast<Eigen::Index>(grid);
    nodes_ = Eigen::VectorXd::LinSpaced(m, -0.5 * width, 0.5 * width);
    kernel_ = Eigen::MatrixXd::Zero(m, m);
    // End nodes sit on the walls and stay empty.
    for (Eigen::Index j = 1; j + 1 < m; ++j)
    {
        double const x = nodes_[j] + 0.5 * width;
        for (Eigen::Index i = 1; i + 1 < m; ++i)
        {
            double const y = nodes_[i] + 0.5 * width;
            double value = gaussian_density(y - x, dt);
            if (killing == KillingMode::continuous)
            {
                // Bridge non-exit probability by images, written relative to
                // the free density so that no term underflows.
                double const v = bridge_variance_factor * dt;
                double const d2 = (y - x) * (y - x);
                double ratio = 0;
                for (int k = -4; k <= 4; ++k)
                {
                    double const a = y - x + 2 * k * width;
                    double const b = y + x + 2 * k * width;
                    ratio += std::exp(-(a * a - d2) / (2 * v)) - std::exp(-(b * b - d2) / (2 * v));
                }
                value *= std::clamp(ratio, 0.0, 1.0);
            }
            kernel_(i, j) = spacing_ * value;
        }
    }
    scratch_.resize(m);
}

Eigen::VectorXd TubePropagator::initial_mass() const
{
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(nodes_.size());
    mass[nodes_.size() / 2] = 1;
    return mass;
}

double TubePropagator::step(Eigen::VectorXd& mass, double drift_shift) const
{
    if (drift_shift == 0)
    {
        scratch_.noalias() = kernel_ * mass;
    }
    else
    {
        // Drift c = shift / dt; factor exp(c y - c x - c^2 dt / 2).
        double const c = drift_shift / dt_;
        Eigen::ArrayXd const right = (-c * nodes_.array()).exp();
        Eigen::ArrayXd const left = (c * nodes_.array() - 0.5 * c * c * dt_).exp();
        scratch_.noalias() = kernel_ * (right * mass.array()).matrix();
        scratch_.array() *= left;
    }
    mass.swap(scratch_);
    return mass.sum();
}

//---------------------------------------------------------------------------//
std::vector<double> quenched_tube_mass(std::span<double const> w_increments,
                                       double beta,
                                       double dt,
                                       std::size_t grid,
                                       KillingMode killing,
                                       double width)
{
    GammaParams check;
    check.dt = dt;
    check.horizon = 2 * dt;
    check.grid = grid;
    check.width = width;
    check.validate();

    TubePropagator const propagator(dt, grid, width, killing, 1 + beta * beta);
    Eigen::VectorXd mass = propagator.initial_mass();
    std::vector<double> log_mass;
    log_mass.reserve(w_increments.size());
    double accumulated = 0;
    for (double dw : w_increments)
    {
        double const total = propagator.step(mass, -beta * dw);
        if (!(total > 0) || !std::isfinite(total))
            throw numeric_error("tube mass vanished after " + std::to_string(log_mass.size() + 1)
                                + " steps; reduce dt or the horizon");
        accumulated += std::log(total);
        mass /= total;
        log_mass.push_back(accumulated);
    }
    return log_mass;
}

double decay_slope(std::span<double const> log_mass, double dt, double window_start)
{
    auto const n = log_mass.size();
    auto const first = static_cast<std::size_t>(std::floor(window_start * static_cast<double>(n)));
    if (n - first < 2)
        throw numeric_error("regression window holds fewer than two points");
    double st = 0, sy = 0, stt = 0, sty = 0;
    double const count = static_cast<double>(n - first);
    for (std::size_t k = first; k < n; ++k)
    {
        double const t = static_cast<double>(k + 1) * dt;
        double const y = -log_mass[k];
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    return (count * sty - st * sy) / (count * stt - st * st);
}

GammaEstimate estimate_gamma(double beta, GammaParams const& params, Executor const& executor)
{
    params.validate();
    if (!std::isfinite(beta))
        throw config_error("gamma: beta must be finite");

    auto const steps = static_cast<std::size_t>(std::llround(params.horizon / params.dt));
    RandomStream const root = RandomStream(params.seed).split(stream_slot::replicas);
    TubePropagator const prototype(
        params.dt, params.grid, params.width, params.killing, 1 + beta * beta);

    GammaEstimate estimate{beta, 0, 0, params, {}};
    estimate.replicas.resize(params.replicas);

    auto run_replica = [&](std::size_t r) {
        // Each replica owns its propagator scratch space.
        TubePropagator propagator = prototype;
        RandomStream rng = root.split(r);
        boost::random::normal_distribution<double> normal(0.0, std::sqrt(params.dt));
        Eigen::VectorXd mass = propagator.initial_mass();
        std::vector<double> log_mass(steps);
        double accumulated = 0;
        for (std::size_t k = 0; k < steps; ++k)
        {
            double const dw = normal(rng);
            double const total = propagator.step(mass, beta == 0 ? 0.0 : -beta * dw);
            if (!(total > 0) || !std::isfinite(total))
                throw numeric_error("tube mass vanished at step " + std::to_string(k + 1));
            accumulated += std::log(total);
            mass /= total;
            log_mass[k] = accumulated;
        }
        estimate.replicas[r] = {r, beta, decay_slope(log_mass, params.dt, params.window_start),
                                accumulated};
    };
    executor.parallel_for(params.replicas, run_replica);

    double sum = 0;
    for (auto const& rep : estimate.replicas)
        sum += rep.slope;
    double const count = static_cast<double>(params.replicas);
    estimate.value = sum / count;
    if (params.replicas > 1)
    {
        double ss = 0;
        for (auto const& rep : estimate.replicas)
            ss += (rep.slope - estimate.value) * (rep.slope - estimate.value);
        estimate.stderr_value = std::sqrt(ss / (count - 1) / count);
    }
    return estimate;
}

GammaSigma gamma_sigma(ModelConstants const& constants,
                       GammaParams const& params,
                       Executor const& executor)
{
    if (!(constants.sigma_Q > 0))
        throw numeric_error("gamma_sigma needs sigma_Q > 0");
    double const q2 = constants.sigma_Q * constants.sigma_Q;
    if (constants.sigma_A == 0)
        return {q2 * std::numbers::pi * std::numbers::pi / 2, 0.0, true};
    GammaEstimate const g = estimate_gamma(constants.sigma_A / constants.sigma_Q, params, executor);
    return {q2 * g.value, q2 * g.stderr_value, false};
}

void write_gamma_csv(std::ostream& os, std::vector<GammaEstimate> const& estimates)
{
    CsvRow(os) << "replica" << "beta" << "slope" << "mass_final_log";
    for (auto const& est : estimates)
        for (auto const& rep : est.replicas)
            CsvRow(os) << static_cast<std::uint64_t>(rep.replica) << rep.beta << rep.slope
                       << rep.log_mass_final;
}

}  // namespace brwre
