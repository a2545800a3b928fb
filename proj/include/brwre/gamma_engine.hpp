// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "laplace_stats.hpp"
#include "parallel.hpp"

namespace brwre {

/*!
 * How the tube boundary is enforced between grid times.
 *
 * `continuous` uses the killed heat kernel (method of images) so that paths
 * leaving and re-entering within a step are removed; `grid_times` only
 * truncates at the grid times and overestimates the surviving mass.
 */
enum class KillingMode
{
    continuous,
    grid_times
};

struct GammaParams
{
    double horizon = 50;
    double dt = 0.01;
    std::size_t grid = 201;
    std::size_t replicas = 20;
    //! Regression over t in [window_start * horizon, horizon].
    double window_start = 0.5;
    std::uint64_t seed = 0;
    KillingMode killing = KillingMode::continuous;
    //! Tube width (1 for the definition of gamma; other values for tests).
    double width = 1;

    void validate() const;
};

struct GammaReplica
{
    std::size_t replica;
    double beta;
    double slope;
    double log_mass_final;
};

struct GammaEstimate
{
    double beta;
    double value;
    double stderr_value;
    GammaParams params;
    std::vector<GammaReplica> replicas;
};

/*!
 * Density of x = B - beta W on a node grid over the tube, killed at the walls.
 *
 * Nodes x_i = -width/2 + i h, h = width / (grid - 1); the end nodes carry no
 * mass. One step maps masses m_j to m_i' = h sum_j K(x_j, x_i) m_j where K is
 * the transition density over dt with drift c = -beta dW / dt. The drift
 * factor exp(c (y - x) - c^2 dt / 2) separates into diagonal scalings, so the
 * drift-free kernel matrix is built once.
 */
class TubePropagator
{
  public:
    TubePropagator(double dt,
                   std::size_t grid,
                   double width,
                   KillingMode killing,
                   double bridge_variance_factor = 1);

    std::size_t grid() const noexcept { return nodes_.size(); }
    double spacing() const noexcept { return spacing_; }
    Eigen::VectorXd const& nodes() const noexcept { return nodes_; }
    //! h K(x_j, x_i) without drift (symmetric).
    Eigen::MatrixXd const& kernel() const noexcept { return kernel_; }

    //! Unit mass at the tube centre.
    Eigen::VectorXd initial_mass() const;

    //! Advance one step with tube-relative shift -beta dW; returns new total mass.
    double step(Eigen::VectorXd& mass, double drift_shift) const;

  private:
    double dt_;
    double spacing_;
    Eigen::VectorXd nodes_;
    Eigen::MatrixXd kernel_;
    mutable Eigen::VectorXd scratch_;
};

/*!
 * log of the surviving mass after each step for one W path.
 *
 * Mass is renormalised every step and its logarithm accumulated, so long
 * horizons do not underflow.
 */
std::vector<double> quenched_tube_mass(std::span<double const> w_increments,
                                       double beta,
                                       double dt,
                                       std::size_t grid,
                                       KillingMode killing = KillingMode::continuous,
                                       double width = 1);

//! Least-squares slope of -log_mass[k] against (k + 1) dt over the window.
double decay_slope(std::span<double const> log_mass, double dt, double window_start);

/*!
 * gamma(beta): quenched exponential decay rate of a Brownian motion kept in a
 * unit tube around beta W. Averages the fitted slope over independent W paths.
 */
GammaEstimate estimate_gamma(double beta,
                             GammaParams const& params,
                             Executor const& executor = serial_executor());

struct GammaSigma
{
    double value;
    double stderr_value;
    bool exact;
};

//! sigma_Q^2 gamma(sigma_A / sigma_Q); exact pi^2 sigma_Q^2 / 2 when sigma_A = 0.
GammaSigma gamma_sigma(ModelConstants const& constants,
                       GammaParams const& params,
                       Executor const& executor = serial_executor());

//! CSV rows: replica,beta,slope,mass_final_log.
void write_gamma_csv(std::ostream& os, std::vector<GammaEstimate> const& estimates);

}  // namespace brwre
