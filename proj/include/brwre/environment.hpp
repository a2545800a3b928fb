// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brood_law.hpp"
#include "rng.hpp"

namespace brwre {

//! Offspring-count law used as one component of a Gaussian family.
struct CountLawChoice
{
    double weight;
    std::vector<CountAtom> pmf;
};

//! Displacement parameters (mu, sigma) used as one component of a Gaussian family.
struct ShapeChoice
{
    double weight;
    double mu;
    double sigma;
};

/*!
 * Gaussian displacement family: the count law and (mu, sigma) are drawn
 * independently per generation; children are i.i.d. N(mu, sigma^2) given them.
 * tau1 > 6 and tau2 > 4 are the moment exponents of its integrability
 * requirements, kept as metadata.
 */
struct GaussianFamilySpec
{
    std::vector<CountLawChoice> count_laws;
    std::vector<ShapeChoice> shapes;
    double tau1 = 6.5;
    double tau2 = 4.5;
};

/*!
 * Distribution of the per-generation reproduction law: a finite mixture of
 * BroodLaws. A point mass is a degenerate (time-homogeneous) environment.
 */
class EnvironmentModel
{
  public:
    static EnvironmentModel point_mass(BroodLaw law);
    static EnvironmentModel mixture(std::vector<BroodLaw> laws, std::vector<double> weights);
    static EnvironmentModel gaussian_family(GaussianFamilySpec spec);

    std::size_t size() const noexcept { return laws_.size(); }
    BroodLaw const& law(std::size_t index) const { return *laws_.at(index); }
    std::shared_ptr<BroodLaw const> const& law_ptr(std::size_t index) const
    {
        return laws_.at(index);
    }
    double weight(std::size_t index) const { return weights_.at(index); }
    std::vector<double> const& weights() const noexcept { return weights_; }

    bool degenerate() const noexcept { return laws_.size() == 1; }
    bool all_finite_support() const noexcept;

    //! Source spec when built as a Gaussian family (enables analytic verdicts).
    std::optional<GaussianFamilySpec> const& gaussian_spec() const noexcept
    {
        return gaussian_spec_;
    }

    //! Draw the index of the next generation's law.
    std::size_t draw_index(RandomStream& rng) const noexcept;

  private:
    EnvironmentModel() = default;

    std::vector<std::shared_ptr<BroodLaw const>> laws_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    std::optional<GaussianFamilySpec> gaussian_spec_;
};

/*!
 * A drawn environment L_1..L_n with kappa_i(theta) and K_i = sum_{j<=i} kappa_j.
 *
 * Laws are stored as indices into the model; `kappa[i-1]` belongs to L_i and
 * `K` has n + 1 entries with K[0] = 0.
 */
struct RealizedEnvironment
{
    std::shared_ptr<EnvironmentModel const> model;
    std::vector<std::uint32_t> law_index;
    double theta = 0;
    std::vector<double> kappa;
    std::vector<double> K;
    std::uint64_t seed = 0;

    std::size_t length() const noexcept { return law_index.size(); }
    //! Law of generation i (1-based, as in L_i).
    BroodLaw const& law(std::size_t i) const { return model->law(law_index.at(i - 1)); }
};

/*!
 * kappa(theta) of every law in the model, in model order.
 *
 * Throws a numeric error naming the first law whose value is not finite.
 */
std::vector<double> kappa_table(EnvironmentModel const& model, double theta);

//! Draw n i.i.d. laws; deterministic in (model, n, theta, seed).
RealizedEnvironment draw_environment(std::shared_ptr<EnvironmentModel const> model,
                                     std::size_t n,
                                     double theta,
                                     std::uint64_t seed);

//! Build an environment from an explicit law sequence (test fixtures).
RealizedEnvironment make_environment(std::shared_ptr<EnvironmentModel const> model,
                                     std::vector<std::uint32_t> law_index,
                                     double theta);

//! Complete outcome list of a finite-support law.
std::vector<BroodAtom> enumerate_law(BroodLaw const& law);

}  // namespace brwre
