// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "brood_law.hpp"
#include "environment.hpp"
#include "laplace_stats.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace brwre {

enum class BarrierMode
{
    random_centered,  //!< -K_i / theta + a i^alpha
    fixed_centered    //!< a i^alpha
};

/*!
 * Killing frontier. Particles born strictly above it are removed with their
 * descendants; the root (generation 0) is never checked.
 *
 * `a = +inf` disables killing.
 */
struct BarrierSpec
{
    double a = 0;
    double alpha = 1.0 / 3.0;
    BarrierMode mode = BarrierMode::random_centered;

    void validate() const;
    //! Barrier at generation i >= 1 given K_i.
    double value(std::size_t i, double K_i, double theta) const noexcept;
};

struct PopulationSnapshot
{
    std::size_t generation = 0;
    std::vector<double> positions;
    //! Minimal surviving position (+inf when empty).
    double m_n = std::numeric_limits<double>::infinity();
    bool truncated = false;

    std::size_t y_n() const noexcept { return positions.size(); }

    static PopulationSnapshot root() { return {0, {0.0}, 0.0, false}; }
};

inline constexpr std::size_t kDefaultPopulationCap = 1000000;
inline constexpr std::size_t kNoPopulationCap = std::numeric_limits<std::size_t>::max();

/*!
 * One generation: every particle reproduces by `law`; children above
 * `barrier` are discarded; above `cap` survivors a uniform subsample is kept.
 */
PopulationSnapshot step_generation(PopulationSnapshot const& snapshot,
                                   BroodLaw const& law,
                                   double barrier,
                                   std::size_t cap,
                                   RandomStream& rng);

struct ReplicaOutcome
{
    std::size_t replica;
    std::size_t n;
    std::size_t y_n;
    double m_n;
    bool survived;
    bool truncated;
};

struct SurvivalEstimate
{
    std::size_t n;
    std::size_t replicas;
    std::size_t survivors;
    double p_hat;
    double stderr_value;
    //! Fraction of replicas in which the population cap was hit.
    double truncation_rate;
    std::vector<ReplicaOutcome> outcomes;
};

/*!
 * Fraction of replicas with Y_n > 0, a fresh environment per replica.
 *
 * Replica r draws its environment from stream split(r).split(environment)
 * and its particles from split(r).split(particles).
 */
SurvivalEstimate estimate_survival(EnvironmentModel const& model,
                                   ModelConstants const& constants,
                                   BarrierSpec const& barrier,
                                   std::size_t n,
                                   std::size_t replicas,
                                   std::size_t cap,
                                   std::uint64_t seed,
                                   Executor const& executor = serial_executor());

/*!
 * P(Y_n > 0) by sequential resampling: `replicas` systems advance together,
 * and after each stage of `stage_length` generations the extinct ones are
 * replaced by copies of uniformly chosen survivors. The product of the stage
 * survival fractions is an unbiased estimate that reaches probabilities far
 * below 1 / replicas.
 */
struct SplittingEstimate
{
    std::size_t n;
    std::size_t replicas;
    double p_hat;
    double log_p_hat;
    //! Survival fraction per stage.
    std::vector<double> stage_fractions;
    double truncation_rate;
    //! True when a stage lost every system; log_p_hat is then an upper bound.
    bool extinct;
};

SplittingEstimate estimate_survival_splitting(EnvironmentModel const& model,
                                              ModelConstants const& constants,
                                              BarrierSpec const& barrier,
                                              std::size_t n,
                                              std::size_t replicas,
                                              std::size_t cap,
                                              std::size_t stage_length,
                                              std::uint64_t seed,
                                              Executor const& executor = serial_executor());

enum class RateMethod
{
    direct,
    splitting
};

struct RatePoint
{
    std::size_t n;
    double p_hat;
    //! log p_hat / n^{1/3}; an upper bound when `one_sided`.
    double empirical_rate;
    //! Limit predicted by the rate solver (NaN when no prediction applies).
    double predicted_rate;
    //! Second bound of the ray-barrier regime (NaN otherwise).
    double predicted_bound;
    bool one_sided;
    double truncation_rate;
};

struct ExtinctionRateOptions
{
    std::size_t replicas = 1000;
    std::size_t cap = kDefaultPopulationCap;
    RateMethod method = RateMethod::direct;
    std::size_t stage_length = 4;
    //! When set, the barrier is the ray (b n^{-2/3}) i for each horizon n.
    std::optional<double> ray_b;
};

/*!
 * Normalised log survival probability over a grid of horizons together with
 * the matching limit: -theta q(0) for alpha = 1/3 and a < a_c, 0 above a_c,
 * -(3 gamma_sigma)^{1/3} for alpha < 1/3, and [-x_b, -sqrt(gamma_sigma / (theta b))]
 * for the ray barrier. Horizon k uses seed stream split(k).
 */
std::vector<RatePoint> estimate_extinction_rate(EnvironmentModel const& model,
                                                ModelConstants const& constants,
                                                BarrierSpec const& barrier,
                                                std::vector<std::size_t> const& n_grid,
                                                ExtinctionRateOptions const& options,
                                                std::uint64_t seed,
                                                Executor const& executor = serial_executor());

//! CSV rows: replica,n,y_n,m_n,survived,truncated.
void write_survival_csv(std::ostream& os, std::vector<SurvivalEstimate> const& estimates);

//! CSV rows: n,p_hat,empirical_rate,predicted_rate,predicted_bound,one_sided,truncation_rate.
void write_rate_csv(std::ostream& os, std::vector<RatePoint> const& points);

}  // namespace brwre
