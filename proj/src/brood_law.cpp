// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/brood_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/random/normal_distribution.hpp>

#include "brwre/error.hpp"

namespace brwre {
namespace {

constexpr double kProbabilityTolerance = 1e-12;

template<class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};

std::vector<double> cumulative_of(std::vector<double> const& probabilities)
{
    std::vector<double> result(probabilities.size());
    double total = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i)
    {
        total += probabilities[i];
        result[i] = total;
    }
    return result;
}

void check_probabilities(std::string const& id, std::vector<double> const& probabilities)
{
    if (probabilities.empty())
        throw config_error("law '" + id + "' has no atoms");
    double total = 0;
    for (double p : probabilities)
    {
        if (!(p > 0) || !std::isfinite(p))
            throw config_error("law '" + id + "' has a non-positive atom probability");
        total += p;
    }
    if (std::abs(total - 1) > kProbabilityTolerance)
        throw config_error("law '" + id + "' atom probabilities sum to "
                           + std::to_string(total) + ", expected 1");
}

/*
 * Weighted moments of the empirical displacement measure, stabilised by the
 * smallest exponent: returns log sum w e^{-theta z}, and the tilted first and
 * second moments of z.
 */
struct TiltedMoments
{
    double log_mass;
    double mean;
    double variance;
};

TiltedMoments tilted_moments(std::vector<BroodAtom> const& atoms, double theta)
{
    double shift = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (auto const& atom : atoms)
        for (double z : atom.displacements)
        {
            shift = std::max(shift, -theta * z);
            any = true;
        }
    if (!any)
        return {-std::numeric_limits<double>::infinity(), 0, 0};
    double s0 = 0, s1 = 0, s2 = 0;
    for (auto const& atom : atoms)
        for (double z : atom.displacements)
        {
            double const w = atom.probability * std::exp(-theta * z - shift);
            s0 += w;
            s1 += w * z;
            s2 += w * z * z;
        }
    double const mean = s1 / s0;
    return {shift + std::log(s0), mean, std::max(0.0, s2 / s0 - mean * mean)};
}

double count_moment_of(std::vector<BroodAtom> const& atoms, double power)
{
    double total = 0;
    for (auto const& atom : atoms)
        total += atom.probability
                 * std::pow(static_cast<double>(atom.displacements.size()), power);
    return total;
}

double tilted_abs_moment_of(std::vector<BroodAtom> const& atoms, double theta, double power)
{
    auto const m = tilted_moments(atoms, theta);
    double const center = m.mean;
    double num = 0, den = 0;
    double const shift = m.log_mass;
    for (auto const& atom : atoms)
        for (double z : atom.displacements)
        {
            double const w = atom.probability * std::exp(-theta * z - shift);
            num += w * std::pow(std::abs(z - center), power);
            den += w;
        }
    return num / den;
}

double children_below_of(std::vector<BroodAtom> const& atoms, double level)
{
    double total = 0;
    for (auto const& atom : atoms)
        for (double z : atom.displacements)
            if (z <= level)
                total += atom.probability;
    return total;
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace

std::size_t pick_cumulative(std::vector<double> const& cumulative, double u) noexcept
{
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end())
        return cumulative.size() - 1;
    return static_cast<std::size_t>(it - cumulative.begin());
}

double GaussianLaw::mean_count() const
{
    double total = 0;
    for (auto const& c : counts)
        total += c.probability * static_cast<double>(c.count);
    return total;
}

//---------------------------------------------------------------------------//
BroodLaw BroodLaw::finite(std::string id, std::vector<BroodAtom> atoms)
{
    std::vector<double> probabilities;
    for (auto const& atom : atoms)
    {
        probabilities.push_back(atom.probability);
        for (double z : atom.displacements)
            if (!std::isfinite(z))
                throw config_error("law '" + id + "' has a non-finite displacement");
    }
    check_probabilities(id, probabilities);
    BroodLaw law(std::move(id), FiniteLaw{std::move(atoms)});
    law.cumulative_ = cumulative_of(probabilities);
    return law;
}

BroodLaw BroodLaw::gaussian(std::string id,
                            std::vector<CountAtom> counts,
                            double mu,
                            double sigma)
{
    if (!(sigma > 0) || !std::isfinite(sigma))
        throw config_error("law '" + id + "' needs sigma > 0");
    if (!std::isfinite(mu))
        throw config_error("law '" + id + "' needs a finite mu");
    std::vector<double> probabilities;
    for (auto const& c : counts)
        probabilities.push_back(c.probability);
    check_probabilities(id, probabilities);
    BroodLaw law(std::move(id), GaussianLaw{std::move(counts), mu, sigma});
    law.cumulative_ = cumulative_of(probabilities);
    return law;
}

BroodLaw BroodLaw::sampled(std::string id,
                           Sampler sampler,
                           std::size_t reference_size,
                           std::uint64_t seed)
{
    if (!sampler)
        throw config_error("law '" + id + "' has no sampler");
    if (reference_size < 2)
        throw config_error("law '" + id + "' needs a reference sample of size >= 2");
    RandomStream rng = RandomStream(seed).split(stream_slot::reference_sample);
    std::vector<BroodAtom> reference;
    reference.reserve(reference_size);
    double const weight = 1.0 / static_cast<double>(reference_size);
    for (std::size_t i = 0; i < reference_size; ++i)
        reference.push_back({weight, sampler(rng).displacements});
    return BroodLaw(std::move(id), SampledLaw{std::move(sampler), std::move(reference)});
}

//---------------------------------------------------------------------------//
Brood BroodLaw::sample(RandomStream& rng) const
{
    Brood brood;
    sample_children(rng, 0.0, brood.displacements);
    return brood;
}

std::size_t
BroodLaw::sample_children(RandomStream& rng, double origin, std::vector<double>& out) const
{
    return std::visit(
        overloaded{
            [&](FiniteLaw const& law) -> std::size_t {
                auto const& atom = law.atoms[pick_cumulative(cumulative_, rng.uniform())];
                for (double z : atom.displacements)
                    out.push_back(origin + z);
                return atom.displacements.size();
            },
            [&](GaussianLaw const& law) -> std::size_t {
                std::size_t const n = draw_count(law, rng);
                boost::random::normal_distribution<double> normal(law.mu, law.sigma);
                for (std::size_t i = 0; i < n; ++i)
                    out.push_back(origin + normal(rng));
                return n;
            },
            [&](SampledLaw const& law) -> std::size_t {
                Brood brood = law.sampler(rng);
                for (double z : brood.displacements)
                    out.push_back(origin + z);
                return brood.count();
            },
        },
        impl_);
}

std::size_t BroodLaw::draw_count(GaussianLaw const& law, RandomStream& rng) const
{
    if (law.counts.size() == 1)
        return law.counts.front().count;
    return law.counts[pick_cumulative(cumulative_, rng.uniform())].count;
}

void BroodLaw::sample_generation(RandomStream& rng,
                                 std::span<double const> parents,
                                 double barrier,
                                 std::vector<double>& out) const
{
    if (auto const* law = std::get_if<GaussianLaw>(&impl_))
    {
        boost::random::normal_distribution<double> normal(law->mu, law->sigma);
        for (double origin : parents)
        {
            std::size_t const n = draw_count(*law, rng);
            for (std::size_t i = 0; i < n; ++i)
            {
                double const x = origin + normal(rng);
                if (x <= barrier)
                    out.push_back(x);
            }
        }
        return;
    }
    for (double origin : parents)
    {
        std::size_t const before = out.size();
        sample_children(rng, origin, out);
        auto const kept = std::remove_if(out.begin() + static_cast<std::ptrdiff_t>(before),
                                         out.end(), [barrier](double x) { return !(x <= barrier); });
        out.erase(kept, out.end());
    }
}

std::optional<double> BroodLaw::log_laplace(double theta, int order) const
{
    if (order < 0 || order > 2)
        throw config_error("kappa derivative order must be 0, 1 or 2");
    if (auto const* law = std::get_if<GaussianLaw>(&impl_))
    {
        double const s2 = law->sigma * law->sigma;
        switch (order)
        {
            case 0:
                return std::log(law->mean_count()) - theta * law->mu + 0.5 * theta * theta * s2;
            case 1:
                return s2 * theta - law->mu;
            default:
                return s2;
        }
    }
    if (auto const* law = std::get_if<FiniteLaw>(&impl_))
    {
        auto const m = tilted_moments(law->atoms, theta);
        switch (order)
        {
            case 0:
                return m.log_mass;
            case 1:
                return -m.mean;
            default:
                return m.variance;
        }
    }
    return std::nullopt;
}

KappaEstimate BroodLaw::kappa(double theta, int order) const
{
    if (auto closed = log_laplace(theta, order))
        return {*closed, 0.0, true};
    auto const& reference = std::get<SampledLaw>(impl_).reference;
    auto const m = tilted_moments(reference, theta);
    double value = order == 0 ? m.log_mass : order == 1 ? -m.mean : m.variance;
    double stderr_value = 0;
    if (order == 0 && std::isfinite(m.log_mass))
    {
        // Delta method: sd(W) / (sqrt(M) E W) with W = sum_i e^{-theta zeta_i}.
        double sum = 0, sum2 = 0;
        for (auto const& atom : reference)
        {
            double w = 0;
            for (double z : atom.displacements)
                w += std::exp(-theta * z - m.log_mass);
            sum += w;
            sum2 += w * w;
        }
        double const size = static_cast<double>(reference.size());
        double const mean = sum / size;
        double const var = std::max(0.0, sum2 / size - mean * mean);
        stderr_value = std::sqrt(var / size) / mean;
    }
    return {value, stderr_value, false};
}

bool BroodLaw::has_closed_form() const noexcept
{
    return !std::holds_alternative<SampledLaw>(impl_);
}

bool BroodLaw::finite_support() const noexcept
{
    return std::holds_alternative<FiniteLaw>(impl_);
}

std::vector<BroodAtom> BroodLaw::enumerate() const
{
    if (auto const* law = std::get_if<FiniteLaw>(&impl_))
        return law->atoms;
    throw unsupported_error("law '" + id_ + "' does not have finite support");
}

double BroodLaw::count_moment(double power) const
{
    return std::visit(
        overloaded{
            [&](FiniteLaw const& law) { return count_moment_of(law.atoms, power); },
            [&](GaussianLaw const& law) {
                double total = 0;
                for (auto const& c : law.counts)
                    total += c.probability * std::pow(static_cast<double>(c.count), power);
                return total;
            },
            [&](SampledLaw const& law) { return count_moment_of(law.reference, power); },
        },
        impl_);
}

double BroodLaw::tilted_central_abs_moment(double theta, double power) const
{
    return std::visit(
        overloaded{
            [&](FiniteLaw const& law) { return tilted_abs_moment_of(law.atoms, theta, power); },
            [&](GaussianLaw const& law) {
                // Tilted displacement is N(mu - theta sigma^2, sigma^2).
                return std::pow(law.sigma, power) * std::pow(2.0, power / 2)
                       * std::tgamma((power + 1) / 2) / std::sqrt(std::numbers::pi);
            },
            [&](SampledLaw const& law) {
                return tilted_abs_moment_of(law.reference, theta, power);
            },
        },
        impl_);
}

double BroodLaw::expected_children_below(double level) const
{
    return std::visit(
        overloaded{
            [&](FiniteLaw const& law) { return children_below_of(law.atoms, level); },
            [&](GaussianLaw const& law) {
                return law.mean_count() * normal_cdf((level - law.mu) / law.sigma);
            },
            [&](SampledLaw const& law) { return children_below_of(law.reference, level); },
        },
        impl_);
}

}  // namespace brwre
