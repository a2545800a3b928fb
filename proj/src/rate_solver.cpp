// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/rate_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "brwre/csv.hpp"
#include "brwre/error.hpp"

namespace brwre {
namespace {

void require_positive(double value, char const* name)
{
    if (!(value > 0) || !std::isfinite(value))
        throw config_error(std::string(name) + " must be positive and finite");
}

// Three-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 3> kGaussNodes{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussWeights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

struct QEquation
{
    double a;
    double c;

    double slope(double u, double Q) const
    {
        double const q = std::cbrt(Q);
        return 3 * a * q * q - 9 * c * u * u;
    }

    double rk4(double u, double Q, double h) const
    {
        double const k1 = slope(u, Q);
        double const k2 = slope(u + h / 2, Q + h / 2 * k1);
        double const k3 = slope(u + h / 2, Q + h / 2 * k2);
        double const k4 = slope(u + h, Q + h * k3);
        return Q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }

    // Q(1 - s) / s from the expansion at the terminal zero, as a function of r = s^{1/3}.
    double near_end_ratio(double r) const
    {
        double const A = 9 * c;
        double const B = -1.8 * a * std::cbrt(A * A);
        double const C = -9 * c;
        double const D = 54.0 / 35.0 * a * a * std::cbrt(A);
        double const E = -0.75 * a * C / std::cbrt(A);
        double const r2 = r * r;
        return A + r2 * (B + r * (C + r * (D + r * E)));
    }
};

double mesh_node(std::size_t k, std::size_t m, double end)
{
    double const x = 1 - static_cast<double>(k) / static_cast<double>(m);
    return end * (1 - x * std::sqrt(x));
}

}  // namespace

double critical_a(double gamma_sigma, double theta)
{
    require_positive(gamma_sigma, "gamma_sigma");
    require_positive(theta, "theta");
    return 3 * std::cbrt(6 * gamma_sigma) / (2 * theta);
}

double homogeneous_critical_a(double theta, double kappa_second)
{
    require_positive(theta, "theta");
    require_positive(kappa_second, "kappa''");
    double const pi2 = std::numbers::pi * std::numbers::pi;
    return 3 * std::cbrt(3 * pi2 * theta * theta * kappa_second) / (2 * theta);
}

double b_stationary(double gamma_sigma, double theta)
{
    require_positive(gamma_sigma, "gamma_sigma");
    require_positive(theta, "theta");
    return std::cbrt(6 * gamma_sigma) / theta;
}

double b2_root(double a, double gamma_sigma, double theta)
{
    double const ac = critical_a(gamma_sigma, theta);
    double const bs = b_stationary(gamma_sigma, theta);
    if (!std::isfinite(a))
        throw config_error("b2: a must be finite");
    if (a < ac * (1 - 1e-14))
        throw numeric_error("b2: no real root for a = " + std::to_string(a) + " below a_c = "
                            + std::to_string(ac));
    double const c = 3 * gamma_sigma / (theta * theta * theta);
    auto g = [&](double b) { return b + c / (b * b) - a; };
    // Double root at a_c; rounding in g(b*) would push the root away by sqrt(eps).
    if (a <= ac * (1 + 1e-14) || g(bs) >= 0)
        return bs;
    double lo = bs, hi = a;
    for (int iter = 0; iter < 200 && hi - lo > 4e-16 * hi; ++iter)
    {
        double const mid = 0.5 * (lo + hi);
        (g(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double rate_2b(double gamma_sigma)
{
    require_positive(gamma_sigma, "gamma_sigma");
    return -std::cbrt(3 * gamma_sigma);
}

XbRoot x_b_root(double b, double gamma_sigma, double theta)
{
    require_positive(b, "b");
    require_positive(gamma_sigma, "gamma_sigma");
    require_positive(theta, "theta");
    double const rhs = 3 * theta * b;
    auto h = [&](double x) { return 3 * gamma_sigma / (x * x) - x - rhs; };
    // h decreases from +inf to h((3 gamma)^{1/3}) = -rhs < 0.
    double lo = 0, hi = std::cbrt(3 * gamma_sigma);
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter)
    {
        double const mid = 0.5 * (lo + hi);
        (h(mid) > 0 ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 3; ++iter)
    {
        double const d = -6 * gamma_sigma / (x * x * x) - 1;
        double const next = x - h(x) / d;
        if (next > 0 && std::abs(h(next)) < std::abs(h(x)))
            x = next;
    }
    return {x, std::abs(h(x)), std::sqrt(gamma_sigma / (theta * b))};
}

namespace {

// Inner region: p = q / u in tau = log u obeys the autonomous equation
// dp/dtau = a - 3 c / p^2 - p, which resolves the scale of q(0) however small.
double inner_slope(QEquation const& eq, double p)
{
    return eq.a - 3 * eq.c / (p * p) - p;
}

double inner_rk4(QEquation const& eq, double p, double h)
{
    double const k1 = inner_slope(eq, p);
    double const k2 = inner_slope(eq, p + h / 2 * k1);
    double const k3 = inner_slope(eq, p + h / 2 * k2);
    double const k4 = inner_slope(eq, p + h * k3);
    return p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Cubic Hermite interpolant on [0, 1] at x.
double hermite(double x, double y0, double d0, double y1, double d1, double h)
{
    double const h00 = (1 + 2 * x) * (1 - x) * (1 - x);
    double const h10 = x * (1 - x) * (1 - x);
    double const h01 = x * x * (3 - 2 * x);
    double const h11 = x * x * (x - 1);
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

constexpr double kInnerSplit = 0.5;
constexpr double kLowestLogU = -700;

double outer_node(std::size_t k, std::size_t m, double begin, double end)
{
    return begin + mesh_node(k, m, end - begin);
}

// Forward shooting from q(0) = q0: does q stay positive on [0, 1)?
bool survives_to_end(QEquation const& eq, double q0, RateSolverOptions const& opt)
{
    // Start where c u^3 / q0^2 is below rounding relative to q0.
    double const u_start = std::min(kInnerSplit, q0 * std::cbrt(1e-17 / eq.c));
    double p = q0 / u_start + eq.a - eq.c * u_start * u_start / (q0 * q0);
    double tau = std::log(u_start);
    double const tau_split = std::log(kInnerSplit);
    while (tau < tau_split)
    {
        double const h = std::min(opt.log_step, tau_split - tau);
        p = inner_rk4(eq, p, h);
        tau += h;
        if (!(p > 0) || !std::isfinite(p))
            return false;
    }
    double Q = std::pow(kInnerSplit * p, 3);
    for (std::size_t k = 0; k < opt.mesh; ++k)
    {
        double const u0 = outer_node(k, opt.mesh, kInnerSplit, 1.0);
        double const u1 = outer_node(k + 1, opt.mesh, kInnerSplit, 1.0);
        Q = eq.rk4(u0, Q, u1 - u0);
        if (!(Q > 0))
            return false;
    }
    return true;
}

}  // namespace

RateSolution solve_q_shooting(double a,
                              double gamma_sigma,
                              double theta,
                              RateSolverOptions const& options)
{
    if (!(a >= 0) || !std::isfinite(a))
        throw config_error("rate solver: a must be finite and >= 0");
    double const ac = critical_a(gamma_sigma, theta);
    if (a >= ac)
        throw numeric_error("rate solver: a = " + std::to_string(a) + " is not below a_c = "
                            + std::to_string(ac) + "; the extinction rate vanishes");
    if (options.mesh < 100)
        throw config_error("rate solver: mesh must be >= 100");
    if (!(options.switch_gap > 0 && options.switch_gap < 0.01))
        throw config_error("rate solver: switch_gap must lie in (0, 0.01)");
    if (!(options.log_step > 0 && options.log_step <= 0.01))
        throw config_error("rate solver: log_step must lie in (0, 0.01]");

    QEquation const eq{a, gamma_sigma / (theta * theta * theta)};
    std::size_t const m = options.mesh;
    double const u_switch = std::cbrt(1 - options.switch_gap);
    double const r_switch = std::cbrt(1 - u_switch);

    // Outer region [kInnerSplit, u_switch]: Q = q^3 in u, backwards from the
    // terminal expansion.
    std::vector<double> u(m + 1), Q(m + 1), dQ(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
        u[k] = outer_node(k, m, kInnerSplit, u_switch);
    Q[m] = (1 - u_switch) * eq.near_end_ratio(r_switch);
    for (std::size_t k = m; k-- > 0;)
    {
        Q[k] = eq.rk4(u[k + 1], Q[k + 1], u[k] - u[k + 1]);
        if (!(Q[k] > 0) || !std::isfinite(Q[k]))
            throw numeric_error("rate solver: q vanishes inside (0, 1) at t = "
                                + std::to_string(u[k] * u[k] * u[k]) + "; a is outside the regime");
    }
    for (std::size_t k = 0; k <= m; ++k)
        dQ[k] = eq.slope(u[k], Q[k]);

    // Inner region (0, kInnerSplit]: p in tau, backwards until the start-up
    // correction c u / p^2 drops below rounding.
    std::vector<double> tau{std::log(kInnerSplit)};
    std::vector<double> p{std::cbrt(Q[0]) / kInnerSplit};
    while (!(eq.c / (p.back() * p.back()) < 1e-17 * std::max(p.back() - a, 1e-300)))
    {
        if (tau.back() < kLowestLogU)
            throw numeric_error("rate solver: q(0) underflows; a is too close to a_c");
        double const next = inner_rk4(eq, p.back(), -options.log_step);
        if (!(next > 0) || !std::isfinite(next))
            throw numeric_error("rate solver: inner integration failed near t = 0");
        p.push_back(next);
        tau.push_back(tau.back() - options.log_step);
    }
    std::reverse(tau.begin(), tau.end());
    std::reverse(p.begin(), p.end());

    RateSolution sol{};
    sol.a = a;
    double const u_stop = std::exp(tau.front());
    sol.q0 = u_stop * (p.front() - a) + eq.c * u_stop / (p.front() * p.front());
    sol.rate = -theta * sol.q0;

    // Nodes (u, q, int_0^{u^3} q^{-2} dt) in increasing u.
    struct Node
    {
        double u, q, integral;
    };
    std::vector<Node> nodes;
    nodes.reserve(p.size() + m + 16);
    double integral = u_stop / (p.front() * p.front());
    nodes.push_back({u_stop, u_stop * p.front(), integral});
    for (std::size_t k = 0; k + 1 < p.size(); ++k)
    {
        // q^{-2} dt = 3 e^tau p^{-2} dtau.
        double const h = tau[k + 1] - tau[k];
        double const d0 = inner_slope(eq, p[k]), d1 = inner_slope(eq, p[k + 1]);
        double piece = 0;
        for (std::size_t g = 0; g < 3; ++g)
        {
            double const x = 0.5 * (1 + kGaussNodes[g]);
            double const px = hermite(x, p[k], d0, p[k + 1], d1, h);
            piece += kGaussWeights[g] * 3 * std::exp(tau[k] + x * h) / (px * px);
        }
        integral += 0.5 * h * piece;
        double const uk = std::exp(tau[k + 1]);
        nodes.push_back({uk, uk * p[k + 1], integral});
    }
    // Outer nodes: q^{-2} dt = 3 u^2 Q^{-2/3} du. Node 0 coincides with the split.
    for (std::size_t k = 0; k < m; ++k)
    {
        double const h = u[k + 1] - u[k];
        double piece = 0;
        for (std::size_t g = 0; g < 3; ++g)
        {
            double const x = 0.5 * (1 + kGaussNodes[g]);
            double const qx = std::cbrt(hermite(x, Q[k], dQ[k], Q[k + 1], dQ[k + 1], h));
            double const ux = u[k] + x * h;
            piece += kGaussWeights[g] * 3 * ux * ux / (qx * qx);
        }
        integral += 0.5 * h * piece;
        nodes.push_back({u[k + 1], std::cbrt(Q[k + 1]), integral});
    }
    // Terminal stretch with s = r^3: Q^{-2/3} ds = 3 (Q/s)^{-2/3} dr is smooth in r.
    constexpr int kTailPieces = 8;
    for (int piece_index = kTailPieces; piece_index > 0; --piece_index)
    {
        double const r1 = r_switch * piece_index / kTailPieces;
        double const r0 = r_switch * (piece_index - 1) / kTailPieces;
        for (std::size_t g = 0; g < 3; ++g)
        {
            double const r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * kGaussNodes[g];
            double const ux = 1 - r * r * r;
            double const ratio = std::cbrt(eq.near_end_ratio(r));
            integral += 0.5 * (r1 - r0) * kGaussWeights[g] * 9 * ux * ux / (ratio * ratio);
        }
        double const s = r0 * r0 * r0;
        nodes.push_back({1 - s, std::cbrt(s * eq.near_end_ratio(r0)), integral});
    }

    sol.integral_check = integral;
    sol.residual_at_1 = std::abs(sol.q0 + a - eq.c * sol.integral_check);

    std::size_t const spots = std::max<std::size_t>(options.spot_checks, 1);
    sol.identity_defect = 0;
    for (std::size_t j = 1; j <= spots; ++j)
    {
        double const target = std::cbrt(static_cast<double>(j) / static_cast<double>(spots + 1));
        auto const it = std::lower_bound(nodes.begin(), nodes.end(), target,
                                         [](Node const& n, double v) { return n.u < v; });
        Node const& n = it == nodes.end() ? nodes.back() : *it;
        double const defect = n.q - (sol.q0 + a * n.u - eq.c * n.integral);
        sol.identity_defect = std::max(sol.identity_defect, std::abs(defect));
    }

    sol.t_grid.reserve(nodes.size() + 1);
    sol.q_grid.reserve(nodes.size() + 1);
    sol.t_grid.push_back(0.0);
    sol.q_grid.push_back(sol.q0);
    for (auto const& n : nodes)
    {
        sol.t_grid.push_back(n.u * n.u * n.u);
        sol.q_grid.push_back(n.q);
    }

    // Independent route: bisection on q(0) with forward integration.
    double lo = 1e-8, hi = (a + std::cbrt(3 * gamma_sigma) / theta) * (1 + 1e-6);
    while (survives_to_end(eq, lo, options))
    {
        if (lo < 1e-290)
            throw numeric_error("rate solver: shooting bracket does not straddle the solution");
        lo *= 1e-4;
    }
    if (!survives_to_end(eq, hi, options))
        throw numeric_error("rate solver: shooting bracket does not straddle the solution");
    for (int iter = 0; iter < 400 && hi - lo > 1e-14 * hi; ++iter)
    {
        double const mid = hi > 4 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        (survives_to_end(eq, mid, options) ? hi : lo) = mid;
    }
    sol.q0_shooting = 0.5 * (lo + hi);
    return sol;
}

ModelConstants model_constants(EnvironmentModel const& model,
                               GammaParams const& params,
                               Executor const& executor)
{
    ModelConstants constants = solve_theta_star(model);
    constants.gamma_sigma = gamma_sigma(constants, params, executor).value;
    constants.a_c = critical_a(constants.gamma_sigma, constants.theta_star);
    return constants;
}

void write_sweep_csv(std::ostream& os, std::vector<RateSolution> const& solutions)
{
    CsvRow(os) << "a" << "q0" << "rate" << "residual" << "integral_check";
    for (auto const& s : solutions)
        CsvRow(os) << s.a << s.q0 << s.rate << s.residual_at_1 << s.integral_check;
}

}  // namespace brwre
