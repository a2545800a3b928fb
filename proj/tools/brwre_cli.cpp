// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "brwre/brw_sim.hpp"
#include "brwre/config.hpp"
#include "brwre/csv.hpp"
#include "brwre/error.hpp"
#include "brwre/gamma_engine.hpp"
#include "brwre/laplace_stats.hpp"
#include "brwre/rate_solver.hpp"
#include "brwre/tilted_walk.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace brwre;

namespace {

enum ExitCode
{
    exit_ok = 0,
    exit_config = 2,
    exit_numeric = 3,
    exit_io = 4
};

struct Run
{
    Config config;
    std::uint64_t seed = 0;
    std::uint64_t hash = 0;
    fs::path out;
    Executor executor;

    std::string header() const
    {
        char buffer[64];
        std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
        return "# config_hash=" + std::string(buffer) + " seed=" + std::to_string(seed) + "\n";
    }

    void write(std::string const& name, std::string const& body) const
    {
        fs::path const path = out / name;
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw io_error("cannot open '" + path.string() + "' for writing");
        os << header() << body;
        if (!os.flush())
            throw io_error("write to '" + path.string() + "' failed");
    }
};

// JSON numbers cannot carry inf/nan; emit them as strings.
ordered_json real_json(double v)
{
    if (std::isfinite(v))
        return v;
    return format_real(v);
}

std::vector<std::size_t> horizons(Config const& config, std::string const& key, std::vector<double> fallback)
{
    std::vector<std::size_t> out;
    for (double v : config.reals(key, fallback))
    {
        if (!(v >= 1) || v != std::floor(v) || v > 1e9)
            throw config_error(key + ": horizons must be positive integers, got " + format_real(v));
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty())
        throw config_error(key + ": at least one horizon is required");
    return out;
}

std::size_t positive_count(Config const& config, std::string const& key, std::size_t fallback)
{
    auto const v = config.unsigned_integer(key, fallback);
    if (v < 1)
        throw config_error(key + " must be >= 1");
    return v;
}

ModelConstants constants_for(Run const& run, EnvironmentModel const& model)
{
    return model_constants(model, gamma_params_from_config(run.config), run.executor);
}

ordered_json constants_json(ModelConstants const& c)
{
    ordered_json j;
    j["theta_star"] = real_json(c.theta_star);
    j["sigma_A"] = real_json(c.sigma_A);
    j["sigma_Q"] = real_json(c.sigma_Q);
    j["gamma_sigma"] = real_json(c.gamma_sigma);
    j["a_c"] = real_json(c.a_c);
    j["kappa0"] = real_json(c.kappa0);
    j["residual"] = real_json(c.residual);
    j["degenerate"] = c.degenerate;
    return j;
}

int cmd_constants(Run const& run)
{
    auto const model = model_from_config(run.config);
    auto const c = constants_for(run, model);
    auto j = constants_json(c);
    std::string const text = j.dump(2) + "\n";
    run.write("constants.json", text);
    std::cout << text;
    return exit_ok;
}

int cmd_gamma(Run const& run)
{
    auto const params = gamma_params_from_config(run.config);
    auto const betas = run.config.reals("gamma.betas", {0.0});
    std::vector<GammaEstimate> estimates;
    std::ostringstream summary;
    CsvRow(summary) << "beta" << "value" << "stderr";
    for (double beta : betas)
    {
        estimates.push_back(estimate_gamma(beta, params, run.executor));
        CsvRow(summary) << beta << estimates.back().value << estimates.back().stderr_value;
    }
    std::ostringstream detail;
    write_gamma_csv(detail, estimates);
    run.write("gamma.csv", detail.str());
    run.write("gamma_summary.csv", summary.str());
    std::cout << summary.str();
    return exit_ok;
}

ordered_json verdict_json(ConditionVerdict const& v)
{
    ordered_json j;
    j["satisfied"] = v.satisfied;
    j["moments"] = ordered_json::array();
    for (auto const& m : v.moments)
    {
        ordered_json mj;
        mj["name"] = m.name;
        mj["exponent"] = real_json(m.exponent);
        mj["value"] = real_json(m.value);
        mj["stderr"] = real_json(m.stderr_value);
        mj["finite"] = m.finite;
        j["moments"].push_back(mj);
    }
    return j;
}

int cmd_conditions(Run const& run)
{
    auto const model = model_from_config(run.config);
    auto const report = check_conditions(model, exponents_from_config(run.config));
    ordered_json j;
    j["kappa0"] = real_json(report.kappa0);
    j["theta_star"] = real_json(report.theta_star);
    j["residual"] = real_json(report.residual);
    j["condition1"] = report.condition1;
    j["condition2"] = verdict_json(report.condition2);
    j["condition3"] = verdict_json(report.condition3);
    j["condition4"] = verdict_json(report.condition4);
    j["all_satisfied"] = report.all_satisfied();
    j["verdict_source"] = report.verdict_source;
    j["notes"] = report.notes;
    std::string const text = j.dump(2) + "\n";
    run.write("conditions.json", text);
    std::cout << text;
    return exit_ok;
}

int cmd_survive(Run const& run)
{
    auto const model = model_from_config(run.config);
    auto const c = constants_for(run, model);
    auto const barrier = barrier_from_config(run.config, c.a_c);
    auto const ns = horizons(run.config, "survive.n", {100});
    auto const replicas = positive_count(run.config, "survive.replicas", 500);
    auto const cap = positive_count(run.config, "survive.cap", kDefaultPopulationCap);

    std::vector<SurvivalEstimate> estimates;
    std::ostringstream summary;
    CsvRow(summary) << "n" << "replicas" << "survivors" << "p_hat" << "stderr" << "truncation_rate";
    for (std::size_t k = 0; k < ns.size(); ++k)
    {
        auto const seed_k = RandomStream(run.seed).split(k)();
        estimates.push_back(
            estimate_survival(model, c, barrier, ns[k], replicas, cap, seed_k, run.executor));
        auto const& e = estimates.back();
        CsvRow(summary) << std::uint64_t(e.n) << std::uint64_t(e.replicas)
                        << std::uint64_t(e.survivors) << e.p_hat << e.stderr_value
                        << e.truncation_rate;
    }
    std::ostringstream detail;
    write_survival_csv(detail, estimates);
    run.write("survival.csv", detail.str());
    run.write("survival_summary.csv", summary.str());
    std::cout << summary.str();
    return exit_ok;
}

int cmd_rate(Run const& run)
{
    auto const model = model_from_config(run.config);
    auto const c = constants_for(run, model);
    auto const barrier = barrier_from_config(run.config, c.a_c);
    auto const ns = horizons(run.config, "rate.horizons", {64, 216, 512});
    auto const options = extinction_options_from_config(run.config);
    auto const points = estimate_extinction_rate(model, c, barrier, ns, options, run.seed, run.executor);
    std::ostringstream os;
    write_rate_csv(os, points);
    run.write("rate.csv", os.str());
    std::cout << os.str();
    return exit_ok;
}

int cmd_tube(Run const& run)
{
    auto const model = model_from_config(run.config);
    auto const c = constants_for(run, model);
    auto const tube = tube_from_config(run.config);
    auto const ns = horizons(run.config, "tube.horizons", {1000});
    auto const replicas = positive_count(run.config, "tube.replicas", 10000);
    std::vector<TubeEstimate> estimates;
    for (std::size_t k = 0; k < ns.size(); ++k)
    {
        auto const seed_k = RandomStream(run.seed).split(k)();
        estimates.push_back(tube_probability(model, c, tube, ns[k], replicas, seed_k, run.executor));
    }
    std::ostringstream os;
    write_tube_csv(os, estimates);
    run.write("tube.csv", os.str());
    std::cout << os.str();
    return exit_ok;
}

int cmd_m2o(Run const& run)
{
    constexpr double tolerance = 1e-10;
    std::ostringstream os;
    CsvRow(os) << "fixture" << "depth" << "lhs" << "rhs" << "gap" << "relative_gap";
    bool ok = true;
    for (auto const& fx : many_to_one_fixtures())
    {
        auto const r = many_to_one_check(fx.env, fx.depth, fx.f, fx.caps);
        ok = ok && r.relative_gap <= tolerance;
        CsvRow(os) << fx.name << std::uint64_t(fx.depth) << r.lhs << r.rhs << r.gap << r.relative_gap;
    }
    run.write("m2o.csv", os.str());
    std::cout << os.str();
    if (!ok)
    {
        std::cerr << R"({"error":"numeric","message":"many-to-one gap above 1e-10"})" << "\n";
        return exit_numeric;
    }
    return exit_ok;
}

int cmd_sweep(Run const& run)
{
    auto const model = model_from_config(run.config);
    auto const c = constants_for(run, model);
    auto const options = rate_solver_options_from_config(run.config);
    std::vector<double> grid;
    if (run.config.has("sweep.a") && run.config.has("sweep.a_factors"))
        throw config_error("give either sweep.a or sweep.a_factors, not both");
    if (run.config.has("sweep.a"))
        grid = run.config.reals("sweep.a", {});
    else
        for (double f : run.config.reals("sweep.a_factors", {0.0, 0.25, 0.5, 0.75}))
            grid.push_back(f * c.a_c);
    if (grid.empty())
        throw config_error("sweep: empty a-grid");
    for (double a : grid)
        if (!(a >= 0) || !(a < c.a_c))
            throw config_error("sweep: a = " + format_real(a) + " is outside [0, a_c = "
                               + format_real(c.a_c) + ")");
    std::vector<RateSolution> solutions;
    for (double a : grid)
        solutions.push_back(solve_q_shooting(a, c.gamma_sigma, c.theta_star, options));
    std::ostringstream os;
    write_sweep_csv(os, solutions);
    run.write("sweep.csv", os.str());
    std::cout << os.str();
    return exit_ok;
}

char const* kind_name(ErrorKind kind)
{
    switch (kind)
    {
        case ErrorKind::config: return "config";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

int exit_for(ErrorKind kind)
{
    switch (kind)
    {
        case ErrorKind::numeric: return exit_numeric;
        case ErrorKind::io: return exit_io;
        default: return exit_config;
    }
}

void report(char const* kind, std::string const& message)
{
    ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Branching random walk in random environment: experiment driver"};
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out = ".";

    app.add_option("--config", config_path, "Experiment config file");
    auto* seed_opt = app.add_option("--seed", seed, "Root seed (overrides the config)");
    app.add_option("--threads", threads, "Worker threads (never changes results)")
        ->check(CLI::Range(1u, 4096u));
    app.add_option("--out", out, "Output directory");
    app.require_subcommand(1);

    using Handler = int (*)(Run const&);
    std::vector<std::pair<CLI::App*, Handler>> commands{
        {app.add_subcommand("constants", "theta*, sigma_A, sigma_Q, gamma_sigma, a_c as JSON"), cmd_constants},
        {app.add_subcommand("gamma", "Quenched tube decay rate gamma(beta)"), cmd_gamma},
        {app.add_subcommand("conditions", "Moment hypotheses report"), cmd_conditions},
        {app.add_subcommand("survive", "Survival frequency below the barrier"), cmd_survive},
        {app.add_subcommand("rate", "Normalised extinction rate over horizons"), cmd_rate},
        {app.add_subcommand("tube", "Associated-walk tube probabilities"), cmd_tube},
        {app.add_subcommand("m2o-check", "Many-to-one enumeration fixtures"), cmd_m2o},
        {app.add_subcommand("sweep", "Rate solver over an a-grid"), cmd_sweep},
    };

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        report("config", e.what());
        return exit_config;
    }
    seed_given = seed_opt->count() > 0;

    try
    {
        Run run;
        if (!config_path.empty())
            run.config = Config::load(config_path);
        check_known_keys(run.config);
        if (seed_given)
            run.config.set("seed", std::to_string(seed));
        run.seed = run.config.unsigned_integer("seed", 0);
        run.hash = run.config.hash();
        run.executor = Executor(threads);
        run.out = out;
        std::error_code ec;
        fs::create_directories(run.out, ec);
        if (ec)
            throw io_error("cannot create output directory '" + out + "': " + ec.message());

        for (auto const& [sub, handler] : commands)
            if (sub->parsed())
                return handler(run);
        report("config", "unknown subcommand");
        return exit_config;
    }
    catch (Error const& e)
    {
        report(kind_name(e.kind()), e.what());
        return exit_for(e.kind());
    }
    catch (std::exception const& e)
    {
        report("internal", e.what());
        return exit_numeric;
    }
}
