#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "kcoddp/chain.hpp"
#include "kcoddp/model.hpp"

namespace kcoddp::pipeline {

inline constexpr const char* kSeedEnvVar = "KCODDP_SEED";

struct RunConfig {
  std::uint64_t seed = 1;
  ttmcmc::ChainConfig chain;
  model::Hyper hyper;
  double epsilon = 0.01;  // computational-region tolerance
  std::size_t n_chains = 1;
  std::size_t threads = 1;

  RunConfig();
};

using ConfigMap = std::map<std::string, std::string>;

/// key = value lines; '#' starts a comment; blank lines ignored.
ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);

/// Applies every entry; unknown keys and malformed values throw ParseError.
void apply_config(RunConfig& config, const ConfigMap& entries);

/// Serialises every key, so the output can be read back with apply_config.
std::string format_config(const RunConfig& config);

/// Seed from the environment variable, if set and valid.
std::optional<std::uint64_t> seed_from_env();

/// Precedence: explicit flag, then environment, then file/default value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const RunConfig& from_file);

}  // namespace kcoddp::pipeline
