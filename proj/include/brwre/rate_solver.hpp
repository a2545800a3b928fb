// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "environment.hpp"
#include "gamma_engine.hpp"
#include "laplace_stats.hpp"
#include "parallel.hpp"

namespace brwre {

//! a_c = 3 (6 gamma_sigma)^{1/3} / (2 theta).
double critical_a(double gamma_sigma, double theta);

//! Critical coefficient of a time-homogeneous model written with kappa''(theta).
double homogeneous_critical_a(double theta, double kappa_second);

//! Stationary point b* = (6 gamma_sigma)^{1/3} / theta of b + 3 gamma_sigma / (theta^3 b^2).
double b_stationary(double gamma_sigma, double theta);

//! Largest b > 0 with a = b + 3 gamma_sigma / (theta^3 b^2); requires a >= a_c.
double b2_root(double a, double gamma_sigma, double theta);

//! Extinction rate -(3 gamma_sigma)^{1/3} of the sub-critical polynomial barrier.
double rate_2b(double gamma_sigma);

struct XbRoot
{
    //! Root of 3 gamma_sigma / x^2 - x = 3 theta b.
    double x;
    double residual;
    //! Companion rate sqrt(gamma_sigma / (theta b)).
    double companion;
};

XbRoot x_b_root(double b, double gamma_sigma, double theta);

struct RateSolverOptions
{
    //! Mesh intervals in u = t^{1/3}; graded towards u = 1.
    std::size_t mesh = 10000;
    //! Below 1 - t < switch_gap the local expansion replaces the integrator.
    double switch_gap = 1e-4;
    //! Step in log u on the inner region u < 1/2.
    double log_step = 1e-3;
    //! Number of interior spot checks of the integral identity.
    std::size_t spot_checks = 20;
};

/*!
 * Solution of q(t) = q(0) + a t^{1/3} - (gamma_sigma / theta^3) int_0^t q^{-2},
 * q(0) > 0, q(1) = 0.
 */
struct RateSolution
{
    double a;
    std::vector<double> t_grid;
    std::vector<double> q_grid;
    double q0;
    //! -theta q(0).
    double rate;
    //! |q(0) + a - c int_0^1 q^{-2}|: q(1) implied by the integral form.
    double residual_at_1;
    //! int_0^1 q^{-2}.
    double integral_check;
    //! Largest identity defect over the spot checks.
    double identity_defect;
    //! q(0) from forward shooting with bisection (independent route).
    double q0_shooting;
};

/*!
 * Solve the boundary value problem for 0 <= a < a_c.
 *
 * With u = t^{1/3} and Q = q^3 the equation becomes the regular ODE
 * dQ/du = 3 a Q^{2/3} - 9 c u^2 (c = gamma_sigma / theta^3), integrated
 * backwards from Q(1) = 0 by RK4 on a mesh graded towards u = 1; the last
 * stretch uses the local expansion of Q in s = 1 - u around the terminal zero.
 * For u < 1/2 the ratio p = q / u solves dp/dlog u = a - 3 c / p^2 - p, which
 * stays well scaled as q(0) collapses near a_c.
 */
RateSolution solve_q_shooting(double a,
                              double gamma_sigma,
                              double theta,
                              RateSolverOptions const& options = {});

/*!
 * theta*, sigma_A, sigma_Q from the Laplace statistics, then gamma_sigma from
 * the gamma engine (exact when sigma_A = 0) and a_c.
 */
ModelConstants model_constants(EnvironmentModel const& model,
                               GammaParams const& params,
                               Executor const& executor = serial_executor());

//! CSV rows: a,q0,rate,residual,integral_check.
void write_sweep_csv(std::ostream& os, std::vector<RateSolution> const& solutions);

}  // namespace brwre
