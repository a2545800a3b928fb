// SPDX-FileCopyrightText: 2026 brwre authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brw_sim.hpp"
#include "environment.hpp"
#include "gamma_engine.hpp"
#include "laplace_stats.hpp"
#include "rate_solver.hpp"
#include "tilted_walk.hpp"

namespace brwre {

/*!
 * Flat experiment configuration: one `section.key = value` pair per line,
 * `#` starts a comment. Keys are unique; typed getters report the key on
 * malformed values.
 */
class Config
{
  public:
    static Config parse(std::string_view text);
    static Config load(std::filesystem::path const& path);

    void set(std::string key, std::string value);
    bool has(std::string const& key) const { return entries_.count(key) != 0; }
    std::map<std::string, std::string> const& entries() const noexcept { return entries_; }

    std::string text(std::string const& key, std::string const& fallback) const;
    std::optional<std::string> text(std::string const& key) const;
    double real(std::string const& key, double fallback) const;
    std::optional<double> real(std::string const& key) const;
    std::uint64_t unsigned_integer(std::string const& key, std::uint64_t fallback) const;
    std::vector<double> reals(std::string const& key, std::vector<double> const& fallback) const;
    std::vector<std::string> words(std::string const& key) const;

    //! FNV-1a 64 over the sorted `key=value` lines.
    std::uint64_t hash() const noexcept;

  private:
    std::map<std::string, std::string> entries_;
};

//! Rejects keys outside the documented schema (catches typos).
void check_known_keys(Config const& config);

double parse_real(std::string_view text, std::string const& context);
std::vector<double> parse_reals(std::string_view text, std::string const& context);

//! `model.*` keys: a Gaussian family or an explicit list of laws.
EnvironmentModel model_from_config(Config const& config);

GammaParams gamma_params_from_config(Config const& config);
ConditionExponents exponents_from_config(Config const& config);
BarrierSpec barrier_from_config(Config const& config, double a_c);
TubeSpec tube_from_config(Config const& config);
RateSolverOptions rate_solver_options_from_config(Config const& config);
ExtinctionRateOptions extinction_options_from_config(Config const& config);

}  // namespace brwre
