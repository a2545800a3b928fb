// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/environment.hpp"

#include <cmath>
#include <sstream>

#include "brwre/error.hpp"

namespace brwre {
namespace {

void check_weights(std::vector<double> const& weights, char const* what)
{
    if (weights.empty())
        throw config_error(std::string(what) + ": no components");
    double total = 0;
    for (double w : weights)
    {
        if (!(w > 0) || !std::isfinite(w))
            throw config_error(std::string(what) + ": weights must be positive");
        total += w;
    }
    if (std::abs(total - 1) > 1e-12)
    {
        std::ostringstream os;
        os << what << ": weights sum to " << total << ", expected 1";
        throw config_error(os.str());
    }
}

}  // namespace

EnvironmentModel EnvironmentModel::point_mass(BroodLaw law)
{
    return mixture({std::move(law)}, {1.0});
}

EnvironmentModel
EnvironmentModel::mixture(std::vector<BroodLaw> laws, std::vector<double> weights)
{
    if (laws.size() != weights.size())
        throw config_error("environment mixture: one weight per law required");
    check_weights(weights, "environment mixture");
    EnvironmentModel model;
    double total = 0;
    for (std::size_t i = 0; i < laws.size(); ++i)
    {
        model.laws_.push_back(std::make_shared<BroodLaw const>(std::move(laws[i])));
        total += weights[i];
        model.cumulative_.push_back(total);
    }
    model.weights_ = std::move(weights);
    return model;
}

EnvironmentModel EnvironmentModel::gaussian_family(GaussianFamilySpec spec)
{
    std::vector<double> count_weights, shape_weights;
    for (auto const& c : spec.count_laws)
        count_weights.push_back(c.weight);
    for (auto const& s : spec.shapes)
        shape_weights.push_back(s.weight);
    check_weights(count_weights, "gaussian family count laws");
    check_weights(shape_weights, "gaussian family shapes");

    // Product mixture: count law and (mu, sigma) are drawn independently.
    std::vector<BroodLaw> laws;
    std::vector<double> weights;
    for (std::size_t i = 0; i < spec.count_laws.size(); ++i)
        for (std::size_t j = 0; j < spec.shapes.size(); ++j)
        {
            auto const& shape = spec.shapes[j];
            laws.push_back(BroodLaw::gaussian("gauss[" + std::to_string(i) + ","
                                                  + std::to_string(j) + "]",
                                              spec.count_laws[i].pmf,
                                              shape.mu,
                                              shape.sigma));
            weights.push_back(spec.count_laws[i].weight * shape.weight);
        }
    // Re-normalise the product weights against rounding before validation.
    double total = 0;
    for (double w : weights)
        total += w;
    for (double& w : weights)
        w /= total;
    EnvironmentModel model = mixture(std::move(laws), std::move(weights));
    model.gaussian_spec_ = std::move(spec);
    return model;
}

bool EnvironmentModel::all_finite_support() const noexcept
{
    for (auto const& law : laws_)
        if (!law->finite_support())
            return false;
    return true;
}

std::size_t EnvironmentModel::draw_index(RandomStream& rng) const noexcept
{
    if (laws_.size() == 1)
        return 0;
    return pick_cumulative(cumulative_, rng.uniform());
}

//---------------------------------------------------------------------------//
std::vector<double> kappa_table(EnvironmentModel const& model, double theta)
{
    std::vector<double> table(model.size());
    for (std::size_t i = 0; i < model.size(); ++i)
    {
        table[i] = model.law(i).kappa(theta).value;
        if (!std::isfinite(table[i]))
            throw numeric_error("kappa(" + std::to_string(theta) + ") is not finite for law '"
                                + model.law(i).id() + "'");
    }
    return table;
}

RealizedEnvironment make_environment(std::shared_ptr<EnvironmentModel const> model,
                                     std::vector<std::uint32_t> law_index,
                                     double theta)
{
    if (!(theta > 0))
        throw config_error("environment needs theta > 0");
    if (law_index.empty())
        throw config_error("environment needs at least one generation");
    std::vector<double> table(model->size());
    for (std::size_t j = 0; j < model->size(); ++j)
        table[j] = model->law(j).kappa(theta).value;
    RealizedEnvironment env;
    env.theta = theta;
    env.kappa.resize(law_index.size());
    env.K.assign(law_index.size() + 1, 0.0);
    for (std::size_t i = 0; i < law_index.size(); ++i)
    {
        double const k = table.at(law_index[i]);
        if (!std::isfinite(k))
            throw numeric_error("kappa_" + std::to_string(i + 1) + "(theta) is not finite (law '"
                                + model->law(law_index[i]).id() + "')");
        env.kappa[i] = k;
        env.K[i + 1] = env.K[i] + k;
    }
    env.law_index = std::move(law_index);
    env.model = std::move(model);
    return env;
}

RealizedEnvironment draw_environment(std::shared_ptr<EnvironmentModel const> model,
                                     std::size_t n,
                                     double theta,
                                     std::uint64_t seed)
{
    if (n < 1)
        throw config_error("draw_environment needs n >= 1");
    if (!(theta > 0))
        throw config_error("draw_environment needs theta > 0");
    RandomStream rng = RandomStream(seed).split(stream_slot::environment);
    std::vector<std::uint32_t> index(n);
    for (auto& i : index)
        i = static_cast<std::uint32_t>(model->draw_index(rng));
    RealizedEnvironment env = make_environment(std::move(model), std::move(index), theta);
    env.seed = seed;
    return env;
}

std::vector<BroodAtom> enumerate_law(BroodLaw const& law)
{
    return law.enumerate();
}

}  // namespace brwre
