// Command-line front end: simulation campaigns, bit allocation and
// per-drop precoding runs.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "phasefb/bit_allocation.hpp"
#include "phasefb/config.hpp"
#include "phasefb/precoding.hpp"
#include "phasefb/sim_harness.hpp"

namespace {

using json = nlohmann::json;
using namespace phasefb;

enum ExitCode { kOk = 0, kUsage = 2, kConfig = 3, kRuntime = 4 };

int report(const std::string& kind, const std::string& message,
           const std::optional<std::string>& field, int code) {
  json err = {{"error", {{"kind", kind}, {"message", message}}}};
  if (field) err["error"]["field"] = *field;
  std::cerr << err.dump() << '\n';
  return code;
}

struct RunOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool paper_scale = false;
};

void add_run_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--config", opt.config, "scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out, "output CSV path")->required();
  cmd->add_option("--seed", opt.seed, "master seed (overrides the file)");
  cmd->add_option("--workers", opt.workers, "worker threads, 0 = all cores");
  cmd->add_flag("--paper-scale", opt.paper_scale, "publication-size N and K");
}

ScenarioConfig prepare(const RunOptions& opt) {
  ScenarioConfig cfg = load_config(opt.config, &std::clog);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.paper_scale) apply_paper_scale(cfg);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phasefb: phase-feedback channel reconstruction and robust precoding"};
  app.require_subcommand(1);

  RunOptions sim_opt;
  std::string experiment;
  auto* sim = app.add_subcommand("sim", "run a Monte Carlo campaign and write aggregated CSV");
  sim->add_option("experiment", experiment, "mse, delta or se")
      ->required()
      ->check(CLI::IsMember({"mse", "delta", "se"}));
  add_run_options(sim, sim_opt);

  std::vector<double> weights;
  int budget = 0;
  std::string allocator = "greedy";
  auto* alloc = app.add_subcommand("allocate", "split a bit budget across paths");
  alloc->add_option("--weights", weights, "squared path gains")->required()->delimiter(',');
  alloc->add_option("--budget", budget, "total bits")->required();
  alloc->add_option("--allocator", allocator, "greedy, uniform or bruteforce")
      ->check(CLI::IsMember({"greedy", "uniform", "bruteforce"}));

  RunOptions pre_opt;
  std::string method;
  auto* precode = app.add_subcommand("precode", "per-drop sum SE for one precoder");
  precode->add_option("--method", method, "gpip, zf or wmmse")
      ->required()
      ->check(CLI::IsMember({"gpip", "zf", "wmmse"}));
  add_run_options(precode, pre_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), std::nullopt, kUsage);
  }

  try {
    if (*sim) {
      const ScenarioConfig cfg = prepare(sim_opt);
      std::vector<ExperimentRecord> records;
      if (experiment == "mse") records = run_mse_experiment(cfg);
      else if (experiment == "delta") records = run_delta_experiment(cfg);
      else records = run_se_experiment(cfg);
      emit_csv(records, sim_opt.out);
    } else if (*alloc) {
      const AllocationProblem p{weights, budget};
      p.validate();
      Allocation a;
      if (allocator == "greedy") a = allocate_greedy(p);
      else if (allocator == "uniform") a = allocate_uniform(p);
      else a = allocate_bruteforce(p);
      const json out = {{"allocator", allocator},
                        {"budget", budget},
                        {"weights", weights},
                        {"bits", a.bits},
                        {"objective", a.objective}};
      std::cout << out.dump() << '\n';
    } else if (*precode) {
      const ScenarioConfig cfg = prepare(pre_opt);
      PrecoderKind kind = PrecoderKind::kGpip;
      if (method == "zf") kind = PrecoderKind::kZf;
      else if (method == "wmmse") kind = PrecoderKind::kWmmse;
      emit_csv(run_precode(cfg, kind), pre_opt.out);
    }
  } catch (const ConfigError& e) {
    return report("config", e.what(), e.field(), kConfig);
  } catch (const SolverError& e) {
    return report("solver", e.what(), std::nullopt, kRuntime);
  } catch (const std::invalid_argument& e) {
    return report("invalid_argument", e.what(), std::nullopt, kUsage);
  } catch (const std::exception& e) {
    return report("runtime", e.what(), std::nullopt, kRuntime);
  }
  return kOk;
}
