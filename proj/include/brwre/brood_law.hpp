// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rng.hpp"

namespace brwre {

//! One outcome of a reproduction law: the children's displacements.
struct Brood
{
    std::vector<double> displacements;

    std::size_t count() const noexcept { return displacements.size(); }
};

//! Atom of a finitely supported reproduction law.
struct BroodAtom
{
    double probability;
    std::vector<double> displacements;
};

//! Atom of an offspring-count law.
struct CountAtom
{
    std::size_t count;
    double probability;
};

//! Value of a log-Laplace quantity with its Monte Carlo standard error.
struct KappaEstimate
{
    double value;
    double stderr_value = 0;
    bool closed_form = true;
};

//! Finitely many broods with explicit probabilities.
struct FiniteLaw
{
    std::vector<BroodAtom> atoms;
};

//! i.i.d. N(mu, sigma^2) displacements, count drawn independently.
struct GaussianLaw
{
    std::vector<CountAtom> counts;
    double mu;
    double sigma;

    double mean_count() const;
};

//! Sampler-only law; log-Laplace values come from a frozen reference sample.
struct SampledLaw
{
    std::function<Brood(RandomStream&)> sampler;
    //! Empirical measure of `reference_size` draws, each atom weight 1/size.
    std::vector<BroodAtom> reference;
};

/*!
 * A reproduction law m: distribution of (N, zeta_1, ..., zeta_N).
 *
 * kappa(theta) = log E[sum_i exp(-theta zeta_i)]. Closed forms are used for
 * finite and Gaussian laws; sampled laws use their reference sample, so kappa
 * is smooth in theta and reports a delta-method standard error.
 */
class BroodLaw
{
  public:
    using Impl = std::variant<FiniteLaw, GaussianLaw, SampledLaw>;
    using Sampler = std::function<Brood(RandomStream&)>;

    static BroodLaw finite(std::string id, std::vector<BroodAtom> atoms);
    static BroodLaw gaussian(std::string id,
                             std::vector<CountAtom> counts,
                             double mu,
                             double sigma);
    static BroodLaw sampled(std::string id,
                            Sampler sampler,
                            std::size_t reference_size = 100000,
                            std::uint64_t seed = 0);

    std::string const& id() const noexcept { return id_; }
    Impl const& impl() const noexcept { return impl_; }

    //! Draw one brood.
    Brood sample(RandomStream& rng) const;

    //! Append origin + zeta_i for a fresh brood to `out`; returns N.
    std::size_t
    sample_children(RandomStream& rng, double origin, std::vector<double>& out) const;

    /*!
     * Broods of every parent in order, keeping children at or below `barrier`.
     * Consumes randomness exactly as repeated `sample_children` calls.
     */
    void sample_generation(RandomStream& rng,
                           std::span<double const> parents,
                           double barrier,
                           std::vector<double>& out) const;

    //! Closed-form kappa derivative of the given order (0, 1, 2), if any.
    std::optional<double> log_laplace(double theta, int order = 0) const;

    //! kappa^(order)(theta), closed form or reference-sample estimate.
    KappaEstimate kappa(double theta, int order = 0) const;

    bool has_closed_form() const noexcept;
    bool finite_support() const noexcept;

    //! Complete outcome list of a finitely supported law.
    std::vector<BroodAtom> enumerate() const;

    //! E[N^power] (power 1 gives the mean offspring count).
    double count_moment(double power) const;

    /*!
     * Tilted central absolute moment
     * E[sum |zeta_i + kappa'(theta)|^power e^{-theta zeta_i}] / E[sum e^{-theta zeta_i}].
     */
    double tilted_central_abs_moment(double theta, double power) const;

    //! E[sum_i 1{zeta_i <= level}].
    double expected_children_below(double level) const;

  private:
    BroodLaw(std::string id, Impl impl) : id_(std::move(id)), impl_(std::move(impl))
    {
    }

    // Point-mass count laws consume no randomness.
    std::size_t draw_count(GaussianLaw const& law, RandomStream& rng) const;

    std::string id_;
    Impl impl_;
    // Cumulative atom/count probabilities for inverse-CDF sampling.
    std::vector<double> cumulative_;
};

//! Inverse-CDF pick over a cumulative table (last entry treated as 1).
std::size_t pick_cumulative(std::vector<double> const& cumulative, double u) noexcept;

}  // namespace brwre
