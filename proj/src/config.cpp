// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include "brwre/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "brwre/error.hpp"

namespace brwre {
namespace {

std::string_view trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto const last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Split on any of the separators, dropping empty pieces.
std::vector<std::string_view> tokens(std::string_view s, std::string_view separators)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size())
    {
        auto const end = s.find_first_of(separators, start);
        auto const piece = trim(s.substr(start, end == std::string_view::npos ? end : end - start));
        if (!piece.empty())
            out.push_back(piece);
        if (end == std::string_view::npos)
            break;
        start = end + 1;
    }
    return out;
}

std::vector<std::string_view> split_keep_empty(std::string_view s, char separator)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;)
    {
        auto const end = s.find(separator, start);
        out.push_back(trim(s.substr(start, end == std::string_view::npos ? end : end - start)));
        if (end == std::string_view::npos)
            return out;
        start = end + 1;
    }
}

// "k:p k:p" offspring-count pmf.
std::vector<CountAtom> parse_counts(std::string_view text, std::string const& key)
{
    std::vector<CountAtom> pmf;
    for (auto tok : tokens(text, " ,\t"))
    {
        auto const colon = tok.find(':');
        if (colon == std::string_view::npos)
            throw config_error(key + ": count atoms are written k:p, got '" + std::string(tok) + "'");
        double const k = parse_real(tok.substr(0, colon), key);
        if (!(k >= 0) || k != std::floor(k))
            throw config_error(key + ": offspring count must be a non-negative integer");
        pmf.push_back({static_cast<std::size_t>(k), parse_real(tok.substr(colon + 1), key)});
    }
    if (pmf.empty())
        throw config_error(key + ": empty count law");
    return pmf;
}

// "p: z1 z2 ; p: z1" finite brood atoms.
std::vector<BroodAtom> parse_atoms(std::string_view text, std::string const& key)
{
    std::vector<BroodAtom> atoms;
    for (auto piece : split_keep_empty(text, ';'))
    {
        if (piece.empty())
            continue;
        auto const colon = piece.find(':');
        if (colon == std::string_view::npos)
            throw config_error(key + ": brood atoms are written p: z1 z2 ...");
        BroodAtom atom{parse_real(piece.substr(0, colon), key), {}};
        for (auto z : tokens(piece.substr(colon + 1), " ,\t"))
            atom.displacements.push_back(parse_real(z, key));
        atoms.push_back(std::move(atom));
    }
    if (atoms.empty())
        throw config_error(key + ": empty brood law");
    return atoms;
}

// "s:v s:v" profile knots, or a single constant.
PiecewiseLinear parse_profile(std::string_view text, std::string const& key)
{
    auto const toks = tokens(text, " ,\t");
    if (toks.size() == 1 && toks[0].find(':') == std::string_view::npos)
        return PiecewiseLinear::constant(parse_real(toks[0], key));
    std::vector<double> knots, values;
    for (auto tok : toks)
    {
        auto const colon = tok.find(':');
        if (colon == std::string_view::npos)
            throw config_error(key + ": profile knots are written s:value");
        knots.push_back(parse_real(tok.substr(0, colon), key));
        values.push_back(parse_real(tok.substr(colon + 1), key));
    }
    return {std::move(knots), std::move(values)};
}

Window parse_window(std::string_view text, std::string const& key)
{
    auto const v = parse_reals(text, key);
    if (v.size() != 2)
        throw config_error(key + ": window needs two numbers");
    return {v[0], v[1]};
}

template<class T>
T pick(std::string const& value,
       std::string const& key,
       std::initializer_list<std::pair<char const*, T>> choices)
{
    std::string allowed;
    for (auto const& [name, v] : choices)
    {
        if (value == name)
            return v;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw config_error(key + ": expected one of " + allowed + ", got '" + value + "'");
}

BroodLaw law_from_config(Config const& config, std::string const& id)
{
    std::string const base = "model.law." + id + ".";
    std::string const kind = config.text(base + "kind", "");
    if (kind == "gaussian")
    {
        auto const counts = config.text(base + "counts");
        if (!counts)
            throw config_error(base + "counts is required for a gaussian law");
        return BroodLaw::gaussian(id,
                                  parse_counts(*counts, base + "counts"),
                                  config.real(base + "mu", 0.0),
                                  config.real(base + "sigma", 1.0));
    }
    if (kind == "finite")
    {
        auto const atoms = config.text(base + "atoms");
        if (!atoms)
            throw config_error(base + "atoms is required for a finite law");
        return BroodLaw::finite(id, parse_atoms(*atoms, base + "atoms"));
    }
    throw config_error(base + "kind must be gaussian or finite");
}

}  // namespace

//---------------------------------------------------------------------------//
double parse_real(std::string_view text, std::string const& context)
{
    text = trim(text);
    if (text == "inf" || text == "+inf")
        return std::numeric_limits<double>::infinity();
    if (text == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double value = 0;
    auto const [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
        throw config_error(context + ": '" + std::string(text) + "' is not a number");
    return value;
}

std::vector<double> parse_reals(std::string_view text, std::string const& context)
{
    std::vector<double> out;
    for (auto tok : tokens(text, " ,\t"))
        out.push_back(parse_real(tok, context));
    return out;
}

Config Config::parse(std::string_view text)
{
    Config config;
    std::size_t line_no = 0;
    for (auto line : split_keep_empty(text, '\n'))
    {
        ++line_no;
        if (auto const hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty())
            continue;
        auto const eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            throw config_error("config line " + std::to_string(line_no) + ": empty key");
        if (config.has(key))
            throw config_error("config line " + std::to_string(line_no) + ": duplicate key '" + key
                               + "'");
        config.entries_.emplace(std::move(key), std::move(value));
    }
    return config;
}

Config Config::load(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot read config file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void Config::set(std::string key, std::string value)
{
    entries_[std::move(key)] = std::move(value);
}

std::optional<std::string> Config::text(std::string const& key) const
{
    auto const it = entries_.find(key);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

std::string Config::text(std::string const& key, std::string const& fallback) const
{
    return text(key).value_or(fallback);
}

std::optional<double> Config::real(std::string const& key) const
{
    auto const t = text(key);
    if (!t)
        return std::nullopt;
    return parse_real(*t, key);
}

double Config::real(std::string const& key, double fallback) const
{
    return real(key).value_or(fallback);
}

std::uint64_t Config::unsigned_integer(std::string const& key, std::uint64_t fallback) const
{
    auto const t = text(key);
    if (!t)
        return fallback;
    std::uint64_t value = 0;
    auto const [end, ec] = std::from_chars(t->data(), t->data() + t->size(), value);
    if (ec != std::errc{} || end != t->data() + t->size() || t->empty())
        throw config_error(key + ": '" + *t + "' is not a non-negative integer");
    return value;
}

std::vector<double> Config::reals(std::string const& key, std::vector<double> const& fallback) const
{
    auto const t = text(key);
    if (!t)
        return fallback;
    return parse_reals(*t, key);
}

std::vector<std::string> Config::words(std::string const& key) const
{
    std::vector<std::string> out;
    if (auto const t = text(key))
        for (auto tok : tokens(*t, " ,\t"))
            out.emplace_back(tok);
    return out;
}

std::uint64_t Config::hash() const noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s)
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (auto const& [key, value] : entries_)
    {
        mix(key);
        mix("=");
        mix(value);
        mix("\n");
    }
    return h;
}

void check_known_keys(Config const& config)
{
    static std::set<std::string, std::less<>> const known{
        "seed",
        "model.family", "model.count_laws", "model.shapes", "model.tau1", "model.tau2",
        "model.laws",
        "gamma.horizon", "gamma.dt", "gamma.grid", "gamma.replicas", "gamma.window_start",
        "gamma.killing", "gamma.width", "gamma.betas",
        "conditions.lambda1", "conditions.lambda2", "conditions.lambda3", "conditions.lambda4",
        "conditions.lambda5", "conditions.y_levels",
        "barrier.a", "barrier.a_factor", "barrier.alpha", "barrier.mode",
        "survive.n", "survive.replicas", "survive.cap",
        "rate.horizons", "rate.replicas", "rate.cap", "rate.method", "rate.stage_length",
        "rate.ray_b", "rate.mesh", "rate.switch_gap", "rate.log_step",
        "tube.lower", "tube.upper", "tube.alpha", "tube.entry", "tube.exit", "tube.offset",
        "tube.start", "tube.cap_exponent", "tube.horizons", "tube.replicas",
        "sweep.a", "sweep.a_factors",
    };
    static std::set<std::string, std::less<>> const law_fields{
        "kind", "counts", "mu", "sigma", "atoms", "weight"};
    for (auto const& [key, value] : config.entries())
    {
        if (known.count(key))
            continue;
        std::string_view const k(key);
        if (k.starts_with("model.law."))
        {
            auto const dot = k.rfind('.');
            if (dot > 10 && law_fields.count(k.substr(dot + 1)))
                continue;
        }
        throw config_error("unknown config key '" + key + "'");
    }
}

//---------------------------------------------------------------------------//
EnvironmentModel model_from_config(Config const& config)
{
    std::string const family = config.text("model.family", "");
    if (family == "gaussian")
    {
        GaussianFamilySpec spec;
        auto const counts = config.text("model.count_laws");
        auto const shapes = config.text("model.shapes");
        if (!counts || !shapes)
            throw config_error("gaussian family needs model.count_laws and model.shapes");
        // "pmf @ weight ; pmf @ weight"; the weight may be omitted for a single entry.
        for (auto piece : split_keep_empty(*counts, ';'))
        {
            auto const at = piece.find('@');
            double const w = at == std::string_view::npos ? 1.0 : parse_real(piece.substr(at + 1), "model.count_laws");
            spec.count_laws.push_back({w, parse_counts(piece.substr(0, at), "model.count_laws")});
        }
        for (auto piece : split_keep_empty(*shapes, ';'))
        {
            auto const at = piece.find('@');
            double const w = at == std::string_view::npos ? 1.0 : parse_real(piece.substr(at + 1), "model.shapes");
            auto const ms = parse_reals(piece.substr(0, at), "model.shapes");
            if (ms.size() != 2)
                throw config_error("model.shapes: each shape is 'mu sigma [@ weight]'");
            spec.shapes.push_back({w, ms[0], ms[1]});
        }
        spec.tau1 = config.real("model.tau1", spec.tau1);
        spec.tau2 = config.real("model.tau2", spec.tau2);
        return EnvironmentModel::gaussian_family(std::move(spec));
    }
    if (family == "laws")
    {
        auto const ids = config.words("model.laws");
        if (ids.empty())
            throw config_error("model.laws must list at least one law id");
        std::vector<BroodLaw> laws;
        std::vector<double> weights;
        for (auto const& id : ids)
        {
            laws.push_back(law_from_config(config, id));
            weights.push_back(config.real("model.law." + id + ".weight", ids.size() == 1 ? 1.0 : 0.0));
        }
        return EnvironmentModel::mixture(std::move(laws), std::move(weights));
    }
    throw config_error("model.family must be gaussian or laws");
}

GammaParams gamma_params_from_config(Config const& config)
{
    GammaParams p;
    p.horizon = config.real("gamma.horizon", p.horizon);
    p.dt = config.real("gamma.dt", p.dt);
    p.grid = config.unsigned_integer("gamma.grid", p.grid);
    p.replicas = config.unsigned_integer("gamma.replicas", p.replicas);
    p.window_start = config.real("gamma.window_start", p.window_start);
    p.width = config.real("gamma.width", p.width);
    p.seed = config.unsigned_integer("seed", 0);
    p.killing = pick<KillingMode>(config.text("gamma.killing", "continuous"),
                                  "gamma.killing",
                                  {{"continuous", KillingMode::continuous},
                                   {"grid_times", KillingMode::grid_times}});
    p.validate();
    return p;
}

ConditionExponents exponents_from_config(Config const& config)
{
    ConditionExponents e;
    e.lambda1 = config.real("conditions.lambda1", e.lambda1);
    e.lambda2 = config.real("conditions.lambda2", e.lambda2);
    e.lambda3 = config.real("conditions.lambda3", e.lambda3);
    e.lambda4 = config.real("conditions.lambda4", e.lambda4);
    e.lambda5 = config.real("conditions.lambda5", e.lambda5);
    e.y_levels = config.reals("conditions.y_levels", e.y_levels);
    return e;
}

BarrierSpec barrier_from_config(Config const& config, double a_c)
{
    BarrierSpec b;
    auto const a = config.real("barrier.a");
    auto const factor = config.real("barrier.a_factor");
    if (a && factor)
        throw config_error("give either barrier.a or barrier.a_factor, not both");
    if (factor)
    {
        if (!std::isfinite(a_c))
            throw config_error("barrier.a_factor needs a_c, which is unavailable for this model");
        b.a = *factor * a_c;
    }
    else
    {
        b.a = a.value_or(0.0);
    }
    b.alpha = config.real("barrier.alpha", b.alpha);
    b.mode = pick<BarrierMode>(config.text("barrier.mode", "random"),
                               "barrier.mode",
                               {{"random", BarrierMode::random_centered},
                                {"fixed", BarrierMode::fixed_centered}});
    b.validate();
    return b;
}

TubeSpec tube_from_config(Config const& config)
{
    TubeSpec t;
    if (auto const v = config.text("tube.lower"))
        t.lower = parse_profile(*v, "tube.lower");
    if (auto const v = config.text("tube.upper"))
        t.upper = parse_profile(*v, "tube.upper");
    t.alpha = config.real("tube.alpha", t.alpha);
    if (auto const v = config.text("tube.entry"))
        t.entry = parse_window(*v, "tube.entry");
    else
        t.entry = {0.5 * t.lower(0), 0.5 * t.upper(0)};
    if (auto const v = config.text("tube.exit"))
        t.exit = parse_window(*v, "tube.exit");
    t.start_offset = config.unsigned_integer("tube.offset", 0);
    t.start = pick<TubeStart>(config.text("tube.start", "midpoint"),
                              "tube.start",
                              {{"midpoint", TubeStart::entry_midpoint},
                               {"boundary", TubeStart::upper_boundary}});
    if (auto const v = config.real("tube.cap_exponent"))
        t.cap_exponent = *v;
    t.validate();
    return t;
}

RateSolverOptions rate_solver_options_from_config(Config const& config)
{
    RateSolverOptions o;
    o.mesh = config.unsigned_integer("rate.mesh", o.mesh);
    o.switch_gap = config.real("rate.switch_gap", o.switch_gap);
    o.log_step = config.real("rate.log_step", o.log_step);
    return o;
}

ExtinctionRateOptions extinction_options_from_config(Config const& config)
{
    ExtinctionRateOptions o;
    o.replicas = config.unsigned_integer("rate.replicas", o.replicas);
    o.cap = config.unsigned_integer("rate.cap", o.cap);
    o.method = pick<RateMethod>(config.text("rate.method", "direct"),
                                "rate.method",
                                {{"direct", RateMethod::direct},
                                 {"splitting", RateMethod::splitting}});
    o.stage_length = config.unsigned_integer("rate.stage_length", o.stage_length);
    if (auto const b = config.real("rate.ray_b"))
        o.ray_b = *b;
    if (o.replicas < 1)
        throw config_error("rate.replicas must be >= 1");
    if (o.cap < 1)
        throw config_error("rate.cap must be >= 1");
    return o;
}

}  // namespace brwre
