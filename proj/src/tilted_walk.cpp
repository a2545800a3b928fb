// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/tilted_walk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <boost/random/normal_distribution.hpp>

#include "brwre/csv.hpp"
#include "brwre/error.hpp"

namespace brwre {
namespace {

void append_tilted(std::vector<TiltedAtom>& out,
                   std::vector<BroodAtom> const& atoms,
                   double theta,
                   double kappa)
{
    for (auto const& atom : atoms)
        for (double z : atom.displacements)
            out.push_back({std::exp(std::log(atom.probability) - theta * z - kappa), z,
                           atom.displacements.size()});
}

std::vector<double> cumulative_of(std::vector<TiltedAtom> const& atoms)
{
    std::vector<double> c(atoms.size());
    double acc = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        c[i] = acc += atoms[i].probability;
    return c;
}

}  // namespace

TiltedStepLaw::TiltedStepLaw(BroodLaw const& law, double theta) : theta_(theta)
{
    KappaEstimate const k = law.kappa(theta, 0);
    if (!std::isfinite(k.value))
        throw numeric_error("tilt of law '" + law.id() + "' has a non-finite normaliser");
    log_normalizer_ = k.value;

    if (auto const* g = std::get_if<GaussianLaw>(&law.impl()))
    {
        gaussian_ = true;
        step_mean_ = g->mu - theta * g->sigma * g->sigma;
        step_sd_ = g->sigma;
        double const mean_count = g->mean_count();
        double acc = 0;
        for (auto const& c : g->counts)
        {
            if (c.count == 0)
                continue;
            double const p = static_cast<double>(c.count) * c.probability / mean_count;
            marks_.push_back({c.count, p});
            mark_cumulative_.push_back(acc += p);
        }
        return;
    }
    if (auto const* f = std::get_if<FiniteLaw>(&law.impl()))
    {
        append_tilted(atoms_, f->atoms, theta, log_normalizer_);
    }
    else
    {
        exact_ = false;
        append_tilted(atoms_, std::get<SampledLaw>(law.impl()).reference, theta, log_normalizer_);
    }
    cumulative_ = cumulative_of(atoms_);
}

double TiltedStepLaw::total_mass() const noexcept
{
    if (gaussian_)
        return mark_cumulative_.empty() ? 0.0 : mark_cumulative_.back();
    return cumulative_.empty() ? 0.0 : cumulative_.back();
}

double TiltedStepLaw::mean() const noexcept
{
    if (gaussian_)
        return step_mean_;
    double m = 0;
    for (auto const& a : atoms_)
        m += a.probability * a.step;
    return m;
}

double TiltedStepLaw::variance() const noexcept
{
    if (gaussian_)
        return step_sd_ * step_sd_;
    double const m = mean();
    double v = 0;
    for (auto const& a : atoms_)
        v += a.probability * (a.step - m) * (a.step - m);
    return v;
}

std::vector<CountAtom> TiltedStepLaw::mark_law() const
{
    if (gaussian_)
        return marks_;
    std::map<std::size_t, double> by_mark;
    for (auto const& a : atoms_)
        by_mark[a.mark] += a.probability;
    std::vector<CountAtom> out;
    for (auto const& [k, p] : by_mark)
        out.push_back({k, p});
    return out;
}

TiltedStep TiltedStepLaw::sample(RandomStream& rng) const
{
    if (gaussian_)
    {
        boost::random::normal_distribution<double> normal(step_mean_, step_sd_);
        double const x = normal(rng);
        std::size_t const mark = marks_.size() == 1
                                     ? marks_.front().count
                                     : marks_[pick_cumulative(mark_cumulative_, rng.uniform())].count;
        return {x, mark};
    }
    auto const& a = atoms_[pick_cumulative(cumulative_, rng.uniform())];
    return {a.step, a.mark};
}

double TiltedStepLaw::sample_step(RandomStream& rng) const
{
    if (gaussian_)
    {
        boost::random::normal_distribution<double> normal(step_mean_, step_sd_);
        return normal(rng);
    }
    return atoms_[pick_cumulative(cumulative_, rng.uniform())].step;
}

TiltedStepLaw tilt_law(BroodLaw const& law, double theta)
{
    return TiltedStepLaw(law, theta);
}

//---------------------------------------------------------------------------//
ManyToOneResult many_to_one_check(RealizedEnvironment const& env,
                                  std::size_t n,
                                  PathFunctional const& f,
                                  std::optional<std::vector<double>> const& caps)
{
    if (n < 1 || n > 4)
        throw config_error("many-to-one enumeration supports depths 1..4, got "
                           + std::to_string(n));
    if (n > env.length())
        throw config_error("environment is shorter than the requested depth");
    if (caps && caps->size() < n)
        throw config_error("caps must provide one value per generation");

    std::vector<std::vector<BroodAtom>> broods(n);
    std::vector<TiltedStepLaw> tilted;
    tilted.reserve(n);
    for (std::size_t i = 1; i <= n; ++i)
    {
        BroodLaw const& law = env.law(i);
        if (!law.finite_support())
            throw unsupported_error("many-to-one enumeration needs finite-support laws; '"
                                    + law.id() + "' is not");
        broods[i - 1] = law.enumerate();
        tilted.emplace_back(law, env.theta);
    }
    auto allowed = [&](std::size_t step, std::size_t count) {
        return !caps || static_cast<double>(count) <= (*caps)[step];
    };

    std::vector<double> path(n);
    // Tree side: sum over every particle of generation n.
    std::function<double(std::size_t, double)> tree = [&](std::size_t depth, double origin) {
        if (depth == n)
            return f(path);
        double total = 0;
        for (auto const& atom : broods[depth])
        {
            if (!allowed(depth, atom.displacements.size()))
                continue;
            double sum = 0;
            for (double z : atom.displacements)
            {
                path[depth] = origin + z;
                sum += tree(depth + 1, origin + z);
            }
            total += atom.probability * sum;
        }
        return total;
    };
    // Spine side: one tilted walk weighted by e^{theta S_n + K_n}.
    std::function<double(std::size_t, double)> spine = [&](std::size_t depth, double s) {
        if (depth == n)
            return std::exp(env.theta * s + env.K[n]) * f(path);
        double total = 0;
        for (auto const& atom : tilted[depth].atoms())
        {
            if (!allowed(depth, atom.mark))
                continue;
            path[depth] = s + atom.step;
            total += atom.probability * spine(depth + 1, s + atom.step);
        }
        return total;
    };

    ManyToOneResult result{};
    result.lhs = tree(0, 0.0);
    result.rhs = spine(0, 0.0);
    result.gap = std::abs(result.lhs - result.rhs);
    result.relative_gap = result.gap / std::max(1.0, std::abs(result.lhs));
    return result;
}

std::vector<ManyToOneFixture> many_to_one_fixtures()
{
    auto finite = [](std::string id, std::vector<BroodAtom> atoms) {
        return BroodLaw::finite(std::move(id), std::move(atoms));
    };
    BroodLaw const binary_zero = finite("binary-zero", {{1.0, {0.0, 0.0}}});
    BroodLaw const binary_pm = finite("binary-pm1", {{1.0, {1.0, -1.0}}});
    BroodLaw const ternary = finite("ternary", {{1.0, {-1.0, 0.0, 1.0}}});
    BroodLaw const iid_pm = finite("iid-pm1",
                                   {{1.0 / 16, {-1.0, -1.0}},
                                    {3.0 / 16, {-1.0, 1.0}},
                                    {3.0 / 16, {1.0, -1.0}},
                                    {9.0 / 16, {1.0, 1.0}}});
    BroodLaw const zero_or_two = finite("zero-or-two", {{0.3, {}}, {0.7, {0.5, -0.5}}});
    BroodLaw const variable = finite(
        "one-two-three", {{0.2, {0.0}}, {0.5, {-1.0, 1.0}}, {0.3, {-1.0, 0.0, 2.0}}});

    struct Setup
    {
        std::string name;
        std::shared_ptr<EnvironmentModel const> model;
        std::vector<std::uint32_t> sequence;
        double theta;
        PathFunctional f;
        std::optional<std::vector<double>> caps;
    };
    auto one = [](std::span<double const>) { return 1.0; };
    auto mixture = [](std::vector<BroodLaw> laws, std::vector<double> w) {
        return std::make_shared<EnvironmentModel const>(
            EnvironmentModel::mixture(std::move(laws), std::move(w)));
    };
    auto point = [](BroodLaw law) {
        return std::make_shared<EnvironmentModel const>(EnvironmentModel::point_mass(std::move(law)));
    };

    std::vector<Setup> setups;
    setups.push_back({"binary-zero", point(binary_zero), {0, 0, 0}, 1.0, one, std::nullopt});
    setups.push_back({"binary-pm1-exp", point(binary_pm), {0, 0, 0}, 1.0,
                      [](std::span<double const> v) { return std::exp(-v[0]); }, std::nullopt});
    setups.push_back({"pm1-ternary-below-zero",
                      mixture({binary_pm, ternary}, {0.5, 0.5}),
                      {0, 1, 0},
                      0.8,
                      [](std::span<double const> v) {
                          return std::all_of(v.begin(), v.end(), [](double x) { return x <= 0; })
                                     ? 1.0
                                     : 0.0;
                      },
                      std::nullopt});
    setups.push_back({"iid-pm1-endpoint",
                      mixture({iid_pm, zero_or_two}, {0.6, 0.4}),
                      {0, 1, 0},
                      0.6,
                      [](std::span<double const> v) { return std::max(0.0, 1.0 + v.back()); },
                      std::nullopt});
    setups.push_back({"variable-count-capped",
                      mixture({variable, iid_pm, ternary}, {0.5, 0.3, 0.2}),
                      {0, 2, 0},
                      0.7,
                      [](std::span<double const> v) {
                          double s = 0;
                          for (double x : v)
                              s += x * x;
                          return std::exp(-0.3 * s);
                      },
                      std::vector<double>{2, 3, 1}});
    setups.push_back({"variable-count-uncapped",
                      mixture({variable, iid_pm, ternary}, {0.5, 0.3, 0.2}),
                      {0, 2, 0},
                      0.7,
                      [](std::span<double const> v) { return 1.0 + std::tanh(v.back()); },
                      std::nullopt});

    std::vector<ManyToOneFixture> fixtures;
    for (auto const& s : setups)
    {
        RealizedEnvironment const env = make_environment(s.model, s.sequence, s.theta);
        for (std::size_t depth = 1; depth <= 3; ++depth)
            fixtures.push_back(
                {s.name + "/n=" + std::to_string(depth), env, depth, s.f, s.caps});
    }
    return fixtures;
}

//---------------------------------------------------------------------------//
AssociatedWalkPath
sample_associated_walk(RealizedEnvironment const& env, std::size_t n, std::uint64_t seed)
{
    if (n > env.length())
        throw config_error("walk length exceeds the environment length");
    std::vector<std::optional<TiltedStepLaw>> tilted(env.model->size());
    RandomStream rng = RandomStream(seed).split(stream_slot::walk);
    AssociatedWalkPath path;
    path.T.assign(n + 1, 0.0);
    path.xi.resize(n);
    for (std::size_t i = 1; i <= n; ++i)
    {
        auto& law = tilted[env.law_index[i - 1]];
        if (!law)
            law.emplace(env.law(i), env.theta);
        TiltedStep const step = law->sample(rng);
        path.T[i] = path.T[i - 1] + env.theta * step.step + env.kappa[i - 1];
        path.xi[i - 1] = step.mark;
    }
    return path;
}

//---------------------------------------------------------------------------//
PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values))
{
    if (knots_.size() < 2 || knots_.size() != values_.size())
        throw config_error("profile needs matching knot and value lists of length >= 2");
    if (knots_.front() != 0.0 || knots_.back() != 1.0)
        throw config_error("profile knots must start at 0 and end at 1");
    for (std::size_t i = 1; i < knots_.size(); ++i)
        if (!(knots_[i] > knots_[i - 1]))
            throw config_error("profile knots must be strictly increasing");
    for (double v : values_)
        if (!std::isfinite(v))
            throw config_error("profile values must be finite");
}

double PiecewiseLinear::operator()(double s) const noexcept
{
    if (s <= 0)
        return values_.front();
    if (s >= 1)
        return values_.back();
    auto const it = std::upper_bound(knots_.begin(), knots_.end(), s);
    auto const j = static_cast<std::size_t>(it - knots_.begin());
    double const w = (s - knots_[j - 1]) / (knots_[j] - knots_[j - 1]);
    return values_[j - 1] + w * (values_[j] - values_[j - 1]);
}

namespace {

std::vector<double> merged_knots(PiecewiseLinear const& a, PiecewiseLinear const& b)
{
    std::vector<double> k = a.knots();
    k.insert(k.end(), b.knots().begin(), b.knots().end());
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

}  // namespace

void TubeSpec::validate() const
{
    if (!(alpha > 0 && alpha < 0.5))
        throw config_error("tube alpha must lie in (0, 1/2)");
    // The gap h - g is linear between merged knots, so checking knots suffices.
    for (double s : merged_knots(lower, upper))
        if (!(lower(s) < upper(s)))
            throw config_error("tube needs g(s) < h(s); violated at s = " + std::to_string(s));
    double const g0 = lower(0), h0 = upper(0);
    if (!(entry.lo <= entry.hi && entry.lo > g0 && entry.hi <= h0))
        throw config_error("entry window must lie in (g(0), h(0)]");
    if (start == TubeStart::entry_midpoint && !(entry.hi < h0))
        throw config_error("entry window may touch h(0) only in boundary-start mode");
    if (start == TubeStart::upper_boundary)
        for (double s : upper.knots())
            if (upper(s) < h0)
                throw config_error("boundary-start mode requires h(s) >= h(0)");
    if (exit && !(exit->lo <= exit->hi && exit->lo >= lower(1) && exit->hi <= upper(1)))
        throw config_error("exit window must lie in [g(1), h(1)]");
    if (cap_exponent && !(*cap_exponent > 0 && *cap_exponent < 1))
        throw config_error("cap exponent must lie in (0, 1)");
}

double TubeSpec::c_gh() const
{
    auto const k = merged_knots(lower, upper);
    double total = 0;
    for (std::size_t i = 1; i < k.size(); ++i)
    {
        double const d0 = upper(k[i - 1]) - lower(k[i - 1]);
        double const d1 = upper(k[i]) - lower(k[i]);
        total += (k[i] - k[i - 1]) / (d0 * d1);
    }
    return total;
}

TubeEstimate tube_probability(EnvironmentModel const& model,
                              ModelConstants const& constants,
                              TubeSpec const& tube,
                              std::size_t n,
                              std::size_t replicas,
                              std::uint64_t seed,
                              Executor const& executor)
{
    tube.validate();
    if (n < 1)
        throw config_error("tube horizon must be >= 1");
    if (replicas < 1)
        throw config_error("tube needs at least one replica");
    double const theta = constants.theta_star;
    if (!(theta > 0))
        throw config_error("tube estimate needs the critical tilt");

    std::vector<TiltedStepLaw> tilted;
    tilted.reserve(model.size());
    for (std::size_t j = 0; j < model.size(); ++j)
        tilted.emplace_back(model.law(j), theta);
    std::vector<double> const kappa = kappa_table(model, theta);

    double const nd = static_cast<double>(n);
    double const scale = std::pow(nd, tube.alpha);
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 1; i <= n; ++i)
    {
        lo[i - 1] = tube.lower(static_cast<double>(i) / nd) * scale;
        hi[i - 1] = tube.upper(static_cast<double>(i) / nd) * scale;
    }
    double const start = tube.start == TubeStart::upper_boundary
                             ? tube.upper(0) * scale
                             : 0.5 * (tube.entry.lo + tube.entry.hi) * scale;
    bool const capped = tube.cap_exponent.has_value();
    double const cap = tube.cap_exponent ? std::exp(std::pow(nd, *tube.cap_exponent))
                                         : std::numeric_limits<double>::infinity();

    RandomStream const root = RandomStream(seed).split(stream_slot::replicas);
    std::vector<unsigned char> hit(replicas, 0);
    executor.parallel_for(replicas, [&](std::size_t r) {
        RandomStream const rs = root.split(r);
        RandomStream env_rng = rs.split(stream_slot::environment);
        RandomStream walk_rng = rs.split(stream_slot::walk);
        // Laws before t_n are drawn so the environment matches a full draw;
        // the walk itself is pinned at the start point at time t_n.
        for (std::size_t i = 0; i < tube.start_offset; ++i)
            (void)model.draw_index(env_rng);
        double t = start;
        for (std::size_t i = 0; i < n; ++i)
        {
            std::size_t const j = model.draw_index(env_rng);
            if (capped)
            {
                TiltedStep const step = tilted[j].sample(walk_rng);
                t += theta * step.step + kappa[j];
                if (static_cast<double>(step.mark) > cap)
                    return;
            }
            else
            {
                t += theta * tilted[j].sample_step(walk_rng) + kappa[j];
            }
            if (t < lo[i] || t > hi[i])
                return;
        }
        if (tube.exit && (t < tube.exit->lo * scale || t > tube.exit->hi * scale))
            return;
        hit[r] = 1;
    });

    TubeEstimate est{};
    est.n = n;
    est.replicas = replicas;
    est.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    double const rate_scale = std::pow(nd, 1 - 2 * tube.alpha);
    double const rd = static_cast<double>(replicas);
    if (est.hits == 0)
    {
        // 95% one-sided upper bound on p; the rate is then a lower bound.
        est.one_sided = true;
        est.p_hat = 1 - std::pow(0.05, 1 / rd);
    }
    else
    {
        est.p_hat = static_cast<double>(est.hits) / rd;
    }
    est.normalized_rate = -std::log(est.p_hat) / rate_scale;
    est.predicted_rate = tube.c_gh() * constants.gamma_sigma;
    return est;
}

void write_tube_csv(std::ostream& os, std::vector<TubeEstimate> const& estimates)
{
    CsvRow(os) << "n" << "replicas" << "hits" << "p_hat" << "normalized_rate"
               << "predicted_rate";
    for (auto const& e : estimates)
        CsvRow(os) << static_cast<std::uint64_t>(e.n) << static_cast<std::uint64_t>(e.replicas)
                   << static_cast<std::uint64_t>(e.hits) << e.p_hat << e.normalized_rate
                   << e.predicted_rate;
}

}  // namespace brwre
