#include "mfg/harness.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mfg/environments.hpp"
#include "mfg/io.hpp"
#include "mfg/metrics.hpp"
#include "mfg/registry.hpp"
#include "mfg/version.hpp"

namespace mfg {

namespace {

using nlohmann::ordered_json;

const std::set<std::string> kKnownKeys = {
    "env",        "env_params",    "mode",          "backend",      "iterations",
    "eval_every", "seed",          "output_dir",    "threads",      "snapshots",
    "proxy_metric", "ql_warm_start", "ql_episodes", "ql_alpha",     "ql_epsilon",
    "empirical_episodes"};

}  // namespace

RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config field '" + key + "'");

  RunConfig cfg;
  if (!j.contains("env")) throw ConfigError("config field 'env' is required");
  cfg.env = j.at("env").get<std::string>();

  bool known = false;
  for (const EnvironmentEntry& e : environment_registry()) known = known || e.name == cfg.env;
  if (!known) throw ConfigError("unknown environment '" + cfg.env + "'");

  if (j.contains("env_params")) {
    if (!j.at("env_params").is_object()) throw ConfigError("env_params must be an object");
    cfg.env_params = j.at("env_params");
  }

  cfg.mode = j.value("mode", cfg.env == "beach_bar_gamma" ? "discounted" : "finite");
  if (cfg.mode != "finite" && cfg.mode != "discounted")
    throw ConfigError("mode must be 'finite' or 'discounted'");
  if ((cfg.env == "beach_bar_gamma") != (cfg.mode == "discounted"))
    throw ConfigError("mode '" + cfg.mode + "' does not match environment '" + cfg.env + "'");

  cfg.backend = j.value("backend", std::string("model_based"));
  if (cfg.backend != "model_based" && cfg.backend != "model_free")
    throw ConfigError("backend must be 'model_based' or 'model_free'");

  cfg.iterations = j.value("iterations", 100);
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");
  cfg.eval_every = j.value("eval_every", 1);
  if (cfg.eval_every < 1) throw ConfigError("eval_every must be >= 1");
  cfg.seed = j.value("seed", std::uint64_t(0));
  cfg.output_dir = j.value("output_dir", std::string("out"));
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  cfg.threads = j.value("threads", 1);
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  cfg.snapshots = j.value("snapshots", true);
  cfg.proxy_metric = j.value("proxy_metric", false);
  cfg.ql_warm_start = j.value("ql_warm_start", true);
  cfg.ql_episodes = j.value("ql_episodes", 0);
  cfg.ql_alpha = j.value("ql_alpha", 0.1);
  cfg.ql_epsilon = j.value("ql_epsilon", 0.2);
  cfg.empirical_episodes = j.value("empirical_episodes", 0);
  return cfg;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["env"] = cfg.env;
  j["env_params"] = cfg.env_params;
  j["mode"] = cfg.mode;
  j["backend"] = cfg.backend;
  j["iterations"] = cfg.iterations;
  j["eval_every"] = cfg.eval_every;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["snapshots"] = cfg.snapshots;
  j["proxy_metric"] = cfg.proxy_metric;
  j["ql_warm_start"] = cfg.ql_warm_start;
  j["ql_episodes"] = cfg.ql_episodes;
  j["ql_alpha"] = cfg.ql_alpha;
  j["ql_epsilon"] = cfg.ql_epsilon;
  j["empirical_episodes"] = cfg.empirical_episodes;
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
  return run_config_from_json(j);
}

FPConfig fp_config_from(const RunConfig& cfg) {
  FPConfig fp;
  fp.iterations = cfg.iterations;
  fp.eval_every = cfg.eval_every;
  fp.seed = cfg.seed;
  fp.threads = cfg.threads;
  if (cfg.backend == "model_free") {
    fp.br_backend = BRBackend::ModelFree;
    fp.density_backend = DensityBackend::Empirical;
  }
  fp.ql_episodes = cfg.ql_episodes;
  fp.ql_alpha = cfg.ql_alpha;
  fp.ql_epsilon = cfg.ql_epsilon;
  fp.ql_warm_start = cfg.ql_warm_start;
  fp.empirical_episodes = cfg.empirical_episodes;
  fp.record_snapshots = cfg.snapshots;
  fp.proxy_metric = cfg.proxy_metric;
  return fp;
}

namespace {

FiniteMFG build_and_validate(const RunConfig& cfg) {
  FiniteMFG model;
  try {
    model = build_environment(cfg.env, cfg.env_params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const ValidationReport report = validate_mfg(model);
  if (!report.ok()) throw ConfigError("model failed validation:\n" + report.to_string());
  const bool wants_finite = cfg.mode == "finite";
  if (model.finite_horizon() != wants_finite)
    throw ConfigError("environment mode does not match the configured mode");
  return model;
}

std::string snapshot_name(int iteration) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "iter_%06d.csv", iteration);
  return buffer;
}

void write_run_meta(const std::string& dir, const ordered_json& config_echo,
                    const std::string& br_backend, const std::string& density_backend,
                    std::uint64_t seed) {
  ordered_json meta;
  meta["library_version"] = kLibraryVersion;
  meta["config"] = config_echo;
  meta["seed"] = seed;
  meta["br_backend"] = br_backend;
  meta["density_backend"] = density_backend;
  write_file_atomic(dir + "/run_meta.json", meta.dump(2) + "\n");
}

}  // namespace

void execute_run(const RunConfig& cfg) {
  const FiniteMFG model = build_and_validate(cfg);
  const FPConfig fp = fp_config_from(cfg);

  // The meta file is the reproduction recipe; it goes first so a failed run
  // still leaves it behind.
  write_run_meta(cfg.output_dir, run_config_to_json(cfg), to_string(fp.br_backend),
                 to_string(fp.density_backend), cfg.seed);

  const FPResult result = run_fp(model, fp);

  write_file_atomic(cfg.output_dir + "/exploitability.csv", exploitability_csv(result.trace));
  write_file_atomic(cfg.output_dir + "/distribution_final.csv", flow_csv(model, result.mu_bar));
  for (const auto& [iteration, flow] : result.snapshots)
    write_file_atomic(cfg.output_dir + "/distribution_snapshots/" + snapshot_name(iteration),
                      flow_csv(model, flow));
}

void execute_bench_lq(const std::string& output_dir, int iterations, std::uint64_t seed,
                      int threads) {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  const LQParams params;
  const FiniteMFG model = build_lq(params);

  ordered_json echo;
  echo["benchmark"] = "lq";
  echo["iterations"] = iterations;
  echo["threads"] = threads;
  write_run_meta(output_dir, echo, "model_based", "exact", seed);

  // Closed-form versus integrated terminal-value cross-check at step times.
  const auto ode = lq_riccati_ode(params);
  std::ostringstream riccati;
  riccati << "n,t,eta_closed_form,eta_ode,abs_err\n";
  for (int n = 0; n <= params.horizon; ++n) {
    const auto& [t, eta_ode] = ode[static_cast<std::size_t>(n)];
    const Scalar eta_cf = lq_riccati_eta(t, params);
    riccati << n << ',' << format_double(t) << ',' << format_double(eta_cf) << ','
            << format_double(eta_ode) << ',' << format_double(std::abs(eta_cf - eta_ode)) << '\n';
  }
  write_file_atomic(output_dir + "/riccati_check.csv", riccati.str());

  const PolicyFlow projected = lq_exact_policy(params);
  const Scalar phi_projected = exploitability(model, projected, threads).phi;

  FPConfig fp;
  fp.iterations = iterations;
  fp.seed = seed;
  fp.threads = threads;
  const FPResult result = run_fp(model, fp);

  std::ostringstream bench;
  bench << "iteration,phi_fp,phi_exact_projected\n";
  for (const FPTracePoint& point : result.trace)
    bench << point.iteration << ',' << format_double(point.phi) << ','
          << format_double(phi_projected) << '\n';
  write_file_atomic(output_dir + "/benchmark.csv", bench.str());
}

}  // namespace mfg
