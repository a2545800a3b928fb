// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/laplace_stats.hpp"

#include <cmath>
#include <functional>

#include "brwre/error.hpp"

namespace brwre {
namespace {

// Weighted sum over mixture components; non-finite terms propagate.
double mixture_sum(EnvironmentModel const& model, std::function<double(BroodLaw const&)> const& term)
{
    double total = 0;
    for (std::size_t j = 0; j < model.size(); ++j)
        total += model.weight(j) * term(model.law(j));
    return total;
}

double tilt_gap(EnvironmentModel const& model, double theta)
{
    KappaEstimate const k0 = annealed_kappa(model, theta, 0);
    KappaEstimate const k1 = annealed_kappa(model, theta, 1);
    return theta * k1.value - k0.value;
}

MomentEstimate moment(std::string name, double exponent, double value)
{
    return {std::move(name), exponent, value, 0.0, std::isfinite(value)};
}

bool all_finite(std::vector<MomentEstimate> const& moments)
{
    for (auto const& m : moments)
        if (!m.finite)
            return false;
    return true;
}

}  // namespace

KappaEstimate annealed_kappa(EnvironmentModel const& model, double theta, int order)
{
    if (order < 0 || order > 2)
        throw config_error("kappa derivative order must be 0, 1 or 2");
    double value = 0, variance = 0;
    bool closed = true;
    for (std::size_t j = 0; j < model.size(); ++j)
    {
        KappaEstimate const k = model.law(j).kappa(theta, order);
        if (!std::isfinite(k.value))
            throw numeric_error("kappa^(" + std::to_string(order) + ") is not finite at theta = "
                                + std::to_string(theta) + " for law '" + model.law(j).id()
                                + "'");
        double const w = model.weight(j);
        value += w * k.value;
        variance += w * w * k.stderr_value * k.stderr_value;
        closed = closed && k.closed_form;
    }
    return {value, std::sqrt(variance), closed};
}

double annealed_drift_dispersion(EnvironmentModel const& model, double theta)
{
    double const second = mixture_sum(model, [theta](BroodLaw const& law) {
        double const gap = law.kappa(theta, 0).value - theta * law.kappa(theta, 1).value;
        return gap * gap;
    });
    return std::sqrt(second);
}

ModelConstants solve_theta_star(EnvironmentModel const& model, ThetaSolveOptions options)
{
    ModelConstants result;
    result.degenerate = model.degenerate();
    result.kappa0 = annealed_kappa(model, 0.0, 0).value;
    if (!(result.kappa0 > 0))
        throw numeric_error("subcritical model: kappa(0) = " + std::to_string(result.kappa0)
                            + " <= 0");

    // Geometric bracket expansion from theta_min.
    double lo = options.theta_min;
    double f_lo = tilt_gap(model, lo);
    if (f_lo >= 0)
        throw numeric_error("f(theta) = theta kappa' - kappa is already >= 0 at theta_min");
    double hi = lo;
    double f_hi = f_lo;
    while (f_hi < 0)
    {
        double const next = hi * 2;
        if (next > options.theta_max)
            throw numeric_error("no root of kappa(theta) = theta kappa'(theta) on ["
                                + std::to_string(options.theta_min) + ", "
                                + std::to_string(options.theta_max) + "]");
        double f_next;
        try
        {
            f_next = tilt_gap(model, next);
        }
        catch (Error const&)
        {
            throw numeric_error("kappa leaves its finite domain before "
                                "kappa(theta) = theta kappa'(theta) is reached");
        }
        if (f_next < 0)
        {
            lo = next;
            f_lo = f_next;
        }
        hi = next;
        f_hi = f_next;
    }

    // Safeguarded Newton: f'(theta) = theta kappa''(theta).
    double theta = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter)
    {
        double const f = tilt_gap(model, theta);
        if (f < 0)
            lo = theta;
        else
            hi = theta;
        if (std::abs(f) <= 0.01 * options.tolerance || hi - lo <= 4e-16 * hi)
            break;
        double const slope = theta * annealed_kappa(model, theta, 2).value;
        double next = slope > 0 ? theta - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        theta = next;
    }
    result.theta_star = theta;
    result.residual = std::abs(tilt_gap(model, theta));
    if (!(result.residual <= options.tolerance))
        throw numeric_error("critical tilt solve did not reach tolerance (residual "
                            + std::to_string(result.residual) + ")");

    result.sigma_A = model.degenerate() ? 0.0 : annealed_drift_dispersion(model, theta);
    double const curvature = annealed_kappa(model, theta, 2).value;
    result.sigma_Q = theta * std::sqrt(std::max(0.0, curvature));
    if (!(result.sigma_Q > 0))
        throw numeric_error("sigma_Q = 0: kappa''(theta*) vanishes (constant-jump environment)");
    return result;
}

//---------------------------------------------------------------------------//
ConditionsReport check_conditions(EnvironmentModel const& model,
                                  ConditionExponents const& exponents,
                                  ThetaSolveOptions options)
{
    if (!(exponents.lambda1 > 3 && exponents.lambda2 > 2 && exponents.lambda3 > 6
          && exponents.lambda4 > 0 && exponents.lambda5 > 2))
        throw config_error("exponents must satisfy lambda1 > 3, lambda2 > 2, lambda3 > 6, "
                           "lambda4 > 0, lambda5 > 2");
    for (double y : exponents.y_levels)
        if (!(y < 0))
            throw config_error("condition-4 levels y must be negative");

    ConditionsReport report;
    report.exponents = exponents;
    report.verdict_source = model.gaussian_spec() ? "analytic-gaussian-family" : "exact-mixture";
    report.kappa0 = annealed_kappa(model, 0.0, 0).value;

    ModelConstants constants;
    try
    {
        constants = solve_theta_star(model, options);
    }
    catch (Error const& e)
    {
        report.notes.push_back(std::string("condition 1 fails: ") + e.what());
        return report;
    }
    double const theta = constants.theta_star;
    report.theta_star = theta;
    report.residual = constants.residual;
    report.condition1 = report.kappa0 > 0 && constants.residual < options.tolerance;

    auto const& ex = exponents;

    // Condition 2: E|kappa - theta kappa'|^{2 lambda1} and the tilted
    // lambda2-moment of the centred displacement raised to lambda1.
    report.condition2.moments.push_back(moment(
        "E|kappa_1(theta) - theta kappa_1'(theta)|^(2 lambda1)",
        2 * ex.lambda1,
        mixture_sum(model, [&](BroodLaw const& law) {
            double const gap = law.kappa(theta, 0).value - theta * law.kappa(theta, 1).value;
            return std::pow(std::abs(gap), 2 * ex.lambda1);
        })));
    report.condition2.moments.push_back(
        moment("E[(tilted E|zeta + kappa_1'(theta)|^lambda2)^lambda1]",
               ex.lambda1,
               mixture_sum(model, [&](BroodLaw const& law) {
                   return std::pow(law.tilted_central_abs_moment(theta, ex.lambda2), ex.lambda1);
               })));
    report.condition2.satisfied = all_finite(report.condition2.moments);

    // Condition 3.
    double kappa_shift = 0;
    try
    {
        kappa_shift = mixture_sum(model, [&](BroodLaw const& law) {
            return std::pow(std::abs(law.kappa(theta + ex.lambda4, 0).value), ex.lambda3);
        });
    }
    catch (Error const&)
    {
        kappa_shift = std::numeric_limits<double>::infinity();
    }
    report.condition3.moments.push_back(
        moment("E|kappa_1(theta + lambda4)|^lambda3", ex.lambda3, kappa_shift));
    report.condition3.moments.push_back(
        moment("E|kappa_1(theta)|^lambda3",
               ex.lambda3,
               mixture_sum(model, [&](BroodLaw const& law) {
                   return std::pow(std::abs(law.kappa(theta, 0).value), ex.lambda3);
               })));
    report.condition3.moments.push_back(
        moment("E[(log+ E N^(1 + lambda4))^lambda3]",
               ex.lambda3,
               mixture_sum(model, [&](BroodLaw const& law) {
                   double const m = law.count_moment(1 + ex.lambda4);
                   return std::pow(std::log(std::max(m, 1.0)), ex.lambda3);
               })));
    report.condition3.satisfied = all_finite(report.condition3.moments);

    // Condition 4, one moment per level y; any finite level suffices.
    bool any_level = false;
    for (double y : ex.y_levels)
    {
        double const value = mixture_sum(model, [&](BroodLaw const& law) {
            double const kappa = law.kappa(theta, 0).value;
            double const mass = law.expected_children_below((y - kappa) / theta);
            return std::pow(std::abs(std::log(mass)), ex.lambda5);
        });
        report.condition4.moments.push_back(
            moment("E|log E sum 1{theta zeta + kappa_1(theta) <= " + std::to_string(y)
                       + "}|^lambda5",
                   ex.lambda5,
                   value));
        any_level = any_level || std::isfinite(value);
    }
    report.condition4.satisfied = any_level;

    if (auto const& spec = model.gaussian_spec())
    {
        // Gaussian family: E log E N > 0 plus finite moments of log+ N and of
        // sigma^{2 tau1}, sigma^{-tau2}; all hold for finite component lists.
        bool analytic = report.kappa0 > 0 && spec->tau1 > 6 && spec->tau2 > 4;
        for (auto const& shape : spec->shapes)
            analytic = analytic && shape.sigma > 0 && std::isfinite(shape.sigma);
        report.condition2.satisfied = analytic;
        report.condition3.satisfied = analytic;
        report.condition4.satisfied = analytic;
        report.notes.push_back("gaussian family: conditions 2-4 follow from the integrability of "
                               "log+ N and sigma^{+-}");
    }
    if (model.degenerate())
        report.notes.push_back("degenerate environment: sigma_A = 0 and conditions 2, 4 follow "
                               "from conditions 1, 3");
    report.notes.push_back("moment exponents lambda6..lambda12 of the sufficient conditions are "
                           "not evaluated");
    for (std::size_t j = 0; j < model.size(); ++j)
        if (!model.law(j).has_closed_form())
            report.notes.push_back("law '" + model.law(j).id()
                                   + "' uses its reference sample for inner expectations");
    return report;
}

}  // namespace brwre
