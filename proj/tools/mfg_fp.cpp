// Command-line experiment runner for the finite mean field game solver.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "mfg/harness.hpp"
#include "mfg/io.hpp"
#include "mfg/registry.hpp"
#include "mfg/version.hpp"

namespace {

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MFG_FP_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_run(const std::string& config_path, int threads_flag) {
  mfg::RunConfig cfg = mfg::load_run_config(config_path);
  if (threads_flag > 0 || cfg.threads <= 1) cfg.threads = resolve_threads(threads_flag);
  mfg::execute_run(cfg);
  std::cout << "run complete: " << cfg.output_dir << "\n";
  return 0;
}

int cmd_list_envs(const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const mfg::EnvironmentEntry& e : mfg::environment_registry())
      out.push_back({{"name", e.name}, {"description", e.description}, {"defaults", e.defaults}});
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  for (const mfg::EnvironmentEntry& e : mfg::environment_registry()) {
    std::cout << e.name << ": " << e.description << "\n";
    std::cout << "  defaults: " << e.defaults.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite mean field game solver - fictitious play experiments"};
  app.set_version_flag("--version", mfg::kLibraryVersion);
  app.require_subcommand(1);

  std::string config_path;
  int threads = 0;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config_path, "path to the run configuration")->required();
  run->add_option("--threads", threads, "worker cap (default: MFG_FP_THREADS or all cores)");

  std::string format = "text";
  CLI::App* list_envs = app.add_subcommand("list-envs", "list builtin environments");
  list_envs->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::string bench_dir = "out/bench_lq";
  int bench_iterations = 200;
  std::uint64_t bench_seed = 0;
  int bench_threads = 0;
  CLI::App* bench = app.add_subcommand("bench-lq", "benchmark against the closed-form lq policy");
  bench->add_option("--output-dir", bench_dir, "output directory");
  bench->add_option("--iterations", bench_iterations, "fictitious play iterations");
  bench->add_option("--seed", bench_seed, "rng seed");
  bench->add_option("--threads", bench_threads, "worker cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, threads);
    if (list_envs->parsed()) return cmd_list_envs(format);
    if (bench->parsed())
      return (mfg::execute_bench_lq(bench_dir, bench_iterations, bench_seed,
                                    resolve_threads(bench_threads)),
              0);
  } catch (const mfg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
