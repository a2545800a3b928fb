// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brood_law.hpp"
#include "environment.hpp"
#include "laplace_stats.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace brwre {

//! One atom (X = x, xi = mark) of a tilted step law.
struct TiltedAtom
{
    double probability;
    double step;
    std::size_t mark;
};

struct TiltedStep
{
    double step;
    std::size_t mark;
};

/*!
 * Size-biased, exponentially tilted step law of the many-to-one lemma:
 * P(X <= x, xi <= A) = E[1{N <= A} sum_i 1{zeta_i <= x} e^{-theta zeta_i}] / e^{kappa(theta)}.
 *
 * Finite laws are tilted atom by atom. Gaussian laws have the closed form
 * X ~ N(mu - theta sigma^2, sigma^2) independent of a size-biased mark.
 * Sampled laws are tilted through their reference sample (`exact() == false`).
 */
class TiltedStepLaw
{
  public:
    TiltedStepLaw(BroodLaw const& law, double theta);

    double theta() const noexcept { return theta_; }
    //! kappa(theta) of the source law; e^{kappa} is the normaliser.
    double log_normalizer() const noexcept { return log_normalizer_; }
    bool exact() const noexcept { return exact_; }
    bool gaussian() const noexcept { return gaussian_; }

    //! Atom list (finite and sampled laws); empty for the Gaussian closed form.
    std::vector<TiltedAtom> const& atoms() const noexcept { return atoms_; }

    double total_mass() const noexcept;
    double mean() const noexcept;
    double variance() const noexcept;
    //! P(xi = k) as (k, probability) pairs.
    std::vector<CountAtom> mark_law() const;

    TiltedStep sample(RandomStream& rng) const;
    //! Step only; the Gaussian form then skips the mark draw.
    double sample_step(RandomStream& rng) const;

  private:
    double theta_;
    double log_normalizer_;
    bool exact_ = true;
    bool gaussian_ = false;
    std::vector<TiltedAtom> atoms_;
    std::vector<double> cumulative_;
    // Gaussian closed form.
    double step_mean_ = 0;
    double step_sd_ = 0;
    std::vector<CountAtom> marks_;
    std::vector<double> mark_cumulative_;
};

TiltedStepLaw tilt_law(BroodLaw const& law, double theta);

//---------------------------------------------------------------------------//
// Many-to-one identity by exhaustive enumeration
//---------------------------------------------------------------------------//

//! Non-negative functional of the positions (V(u_1), ..., V(u_n)).
using PathFunctional = std::function<double(std::span<double const>)>;

struct ManyToOneResult
{
    double lhs;
    double rhs;
    double gap;
    //! gap / max(1, lhs).
    double relative_gap;
};

/*!
 * Compare E[sum_{|u|=n} f(V(u_i)) 1{N(u_{i-1}) <= A_i}] (tree enumeration)
 * with E[e^{theta S_n + K_n} f(S_i) 1{xi_i <= A_i}] (tilted-path enumeration).
 *
 * Requires finitely supported laws and n <= 4.
 */
ManyToOneResult many_to_one_check(RealizedEnvironment const& env,
                                  std::size_t n,
                                  PathFunctional const& f,
                                  std::optional<std::vector<double>> const& caps = std::nullopt);

struct ManyToOneFixture
{
    std::string name;
    RealizedEnvironment env;
    std::size_t depth;
    PathFunctional f;
    std::optional<std::vector<double>> caps;
};

//! Shipped regression fixtures: several finite-support environments, n = 1..3.
std::vector<ManyToOneFixture> many_to_one_fixtures();

//---------------------------------------------------------------------------//
// Associated random walk
//---------------------------------------------------------------------------//

struct AssociatedWalkPath
{
    //! T_0 = 0, T_i = T_{i-1} + theta X_i + kappa_i(theta).
    std::vector<double> T;
    //! Marks xi_1..xi_n.
    std::vector<std::size_t> xi;
};

AssociatedWalkPath
sample_associated_walk(RealizedEnvironment const& env, std::size_t n, std::uint64_t seed);

//---------------------------------------------------------------------------//
// Tube (small deviation) estimates
//---------------------------------------------------------------------------//

//! Continuous piecewise-linear profile on [0, 1].
class PiecewiseLinear
{
  public:
    PiecewiseLinear(std::vector<double> knots, std::vector<double> values);
    static PiecewiseLinear constant(double value) { return {{0.0, 1.0}, {value, value}}; }

    double operator()(double s) const noexcept;
    std::vector<double> const& knots() const noexcept { return knots_; }

  private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

struct Window
{
    double lo;
    double hi;
};

enum class TubeStart
{
    entry_midpoint,  //!< start at the midpoint of the entry window
    upper_boundary   //!< start on h(0) (requires h(s) >= h(0))
};

/*!
 * Corridor [g(s) n^alpha, h(s) n^alpha] for the associated walk started at
 * generation `start_offset`.
 */
struct TubeSpec
{
    PiecewiseLinear lower = PiecewiseLinear::constant(-1);
    PiecewiseLinear upper = PiecewiseLinear::constant(1);
    double alpha = 1.0 / 3.0;
    Window entry{-0.5, 0.5};
    std::optional<Window> exit;
    std::size_t start_offset = 0;
    TubeStart start = TubeStart::entry_midpoint;
    //! When set, also require xi_i <= exp(n^v) with v = cap_exponent.
    std::optional<double> cap_exponent;

    void validate() const;
    //! C_{g,h} = int_0^1 (h(s) - g(s))^{-2} ds (exact for piecewise-linear g, h).
    double c_gh() const;
};

struct TubeEstimate
{
    std::size_t n;
    std::size_t replicas;
    std::size_t hits;
    double p_hat;
    //! -log p_hat / n^{1 - 2 alpha}; a lower bound when `one_sided`.
    double normalized_rate;
    //! C_{g,h} gamma_sigma (NaN when gamma_sigma is unknown).
    double predicted_rate;
    bool one_sided;
};

/*!
 * Annealed-over-quenched estimate of the probability that the associated
 * walk stays in the tube: a fresh environment per replica.
 */
TubeEstimate tube_probability(EnvironmentModel const& model,
                              ModelConstants const& constants,
                              TubeSpec const& tube,
                              std::size_t n,
                              std::size_t replicas,
                              std::uint64_t seed,
                              Executor const& executor = serial_executor());

//! CSV rows: n,replicas,hits,p_hat,normalized_rate,predicted_rate.
void write_tube_csv(std::ostream& os, std::vector<TubeEstimate> const& estimates);

}  // namespace brwre
