#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "mfg/fictitious_play.hpp"

namespace mfg {

/// Invalid configuration (bad file, unknown field, out-of-range value).
/// The CLI maps this to exit code 2; runtime failures exit with 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string env;
  nlohmann::ordered_json env_params = nlohmann::ordered_json::object();
  std::string mode = "finite";         // finite | discounted
  std::string backend = "model_based"; // model_based | model_free
  int iterations = 100;
  int eval_every = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int threads = 1;
  bool snapshots = true;
  bool proxy_metric = false;
  bool ql_warm_start = true;
  int ql_episodes = 0;
  Scalar ql_alpha = 0.1;
  Scalar ql_epsilon = 0.2;
  int empirical_episodes = 0;
};

RunConfig run_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

/// Parses and validates a config file; parse failures report the line number.
RunConfig load_run_config(const std::string& path);

/// Maps the declared backends onto an FPConfig.
FPConfig fp_config_from(const RunConfig& cfg);

/// Builds the environment, runs fictitious play, and writes
/// exploitability.csv, distribution_final.csv, distribution_snapshots/ and
/// run_meta.json under cfg.output_dir. Every file is written atomically and
/// exactly once; files already written survive a later runtime failure.
void execute_run(const RunConfig& cfg);

/// The lq benchmark: fictitious play against the grid-projected closed-form
/// policy, plus the closed-form-versus-integrated terminal-value cross-check.
/// Writes benchmark.csv, riccati_check.csv and run_meta.json.
void execute_bench_lq(const std::string& output_dir, int iterations, std::uint64_t seed,
                      int threads);

}  // namespace mfg
