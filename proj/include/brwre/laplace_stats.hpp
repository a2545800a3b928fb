// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "brood_law.hpp"
#include "environment.hpp"

namespace brwre {

/*!
 * Derived constants of an environment model.
 *
 * gamma_sigma and a_c stay NaN until the gamma engine and the rate solver
 * fill them in.
 */
struct ModelConstants
{
    double theta_star = std::numeric_limits<double>::quiet_NaN();
    double sigma_A = std::numeric_limits<double>::quiet_NaN();
    double sigma_Q = std::numeric_limits<double>::quiet_NaN();
    double gamma_sigma = std::numeric_limits<double>::quiet_NaN();
    double a_c = std::numeric_limits<double>::quiet_NaN();
    double kappa0 = std::numeric_limits<double>::quiet_NaN();
    //! |kappa(theta*) - theta* kappa'(theta*)| at the returned root.
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
};

struct ThetaSolveOptions
{
    double theta_min = 1e-6;
    double theta_max = 50;
    double tolerance = 1e-10;
};

//! E[kappa_1^(order)(theta)] over the law mixture (exact for finite mixtures).
KappaEstimate annealed_kappa(EnvironmentModel const& model, double theta, int order);

/*!
 * Solve kappa(theta) = theta kappa'(theta) and fill theta_star, sigma_A, sigma_Q.
 *
 * f(theta) = theta kappa'(theta) - kappa(theta) is nondecreasing on the convex
 * domain; the bracket starts at theta_min and doubles until f changes sign.
 */
ModelConstants solve_theta_star(EnvironmentModel const& model, ThetaSolveOptions options = {});

//! sqrt(E[(kappa_1(theta) - theta kappa_1'(theta))^2]) without the degenerate short cut.
double annealed_drift_dispersion(EnvironmentModel const& model, double theta);

//! Moment exponents used by the conditions checker.
struct ConditionExponents
{
    double lambda1 = 3.5;
    double lambda2 = 2.5;
    double lambda3 = 6.5;
    double lambda4 = 0.5;
    double lambda5 = 2.5;
    std::vector<double> y_levels{-0.1, -1.0};
};

struct MomentEstimate
{
    std::string name;
    double exponent;
    double value;
    double stderr_value = 0;
    bool finite = true;
};

struct ConditionVerdict
{
    bool satisfied = false;
    std::vector<MomentEstimate> moments;
};

struct ConditionsReport
{
    double kappa0 = std::numeric_limits<double>::quiet_NaN();
    double theta_star = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool condition1 = false;
    ConditionVerdict condition2;
    ConditionVerdict condition3;
    ConditionVerdict condition4;
    ConditionExponents exponents;
    //! "exact-mixture" or "analytic-gaussian-family".
    std::string verdict_source;
    std::vector<std::string> notes;

    bool all_satisfied() const noexcept
    {
        return condition1 && condition2.satisfied && condition3.satisfied
               && condition4.satisfied;
    }
};

/*!
 * Evaluate the moment hypotheses for a model.
 *
 * Outer expectations over the environment are exact sums over the mixture;
 * inner expectations are closed forms for finite and Gaussian laws and
 * reference-sample estimates for sampled laws. A moment is flagged infinite
 * when any mixture component makes it non-finite.
 */
ConditionsReport check_conditions(EnvironmentModel const& model,
                                  ConditionExponents const& exponents = {},
                                  ThetaSolveOptions options = {});

}  // namespace brwre
