#ifndef CONLEYBIF_CONFIG_HPP
#define CONLEYBIF_CONFIG_HPP

#include "conleybif/sweep.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conleybif {

struct RunConfig {
  // system
  std::string family;
  std::optional<double> lambda;
  std::vector<double> lambdas;
  std::optional<Box> domain;
  double epsilon = 0.0;
  int ode_substeps = 64;
  std::string table_manifest;
  std::string base_family;
  double base_lambda = 0.0;
  double conj_rate_a = 0.0;
  double conj_rate_b = 0.0;
  // noise
  NoiseModel noise;
  int radius = 32;
  std::vector<std::uint64_t> seeds;
  // grid, index, enclosure
  DecompositionParams params;
  EnclosureSettings encl;
  // sweep
  double tol = 0.02;
  // output
  std::string out_dir;
  // checks
  int check_trials = 200;
  double check_tol = 1e-6;
  int check_max_steps = 8;
  double conj_a = 1.0, conj_b = 0.0;
  // simulate
  double sim_x0 = 0.0;
  int sim_steps = 50;

  /// Every known key with its effective value, in registry order.
  nlohmann::ordered_json resolved;

  double require_lambda() const;
  /// Rebuilds `resolved` after programmatic edits (seeds, threads).
  void refresh_resolved();
};

/// Line-oriented `key = value` document; '#' starts a comment. Throws
/// ConfigError naming the key and line for unknown or duplicate keys, type
/// mismatches and failed validation.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

/// Keys accepted by parse_config, in registry order.
std::vector<std::string> config_keys();

/// Comma-separated unsigned integers.
std::vector<std::uint64_t> parse_seed_list(const std::string &text);

/// lambda -> SystemDef for the configured family.
FamilyFactory make_family(const RunConfig &cfg);

SweepSettings sweep_settings(const RunConfig &cfg, unsigned threads);

}  // namespace conleybif

#endif  // CONLEYBIF_CONFIG_HPP
