// sdm: run experiments from JSON configs and replay acceptance scenarios.
//
//   sdm <mdp|lqr|lqg|mpc|bandit|search> --config FILE [--seed N] [--out DIR] [--format csv|jsonl]
//   sdm repro <name>|--all [--out DIR]
//
// Exit status: 0 success, 1 experiment failure, 2 invalid invocation or config.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sdm/acceptance.hpp"
#include "sdm/experiment.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
};

int run_family(const std::string& family, const RunOptions& opt) {
  sdm::ExperimentConfig cfg;
  try {
    if (!std::filesystem::exists(opt.config)) throw sdm::ValidationError(opt.config, "config file not found");
    cfg = sdm::ExperimentConfig::load(opt.config);
    if (cfg.experiment != family)
      throw sdm::ValidationError("experiment", "config is for '" + cfg.experiment + "', not '" + family + "'");
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.format.empty()) cfg.format = sdm::ExperimentConfig::parse_format(opt.format, "--format");
  } catch (const sdm::ValidationError& e) {
    std::cerr << "sdm: invalid config: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    const sdm::Report report = sdm::run_experiment(cfg);
    const std::string dir = sdm::resolve_output_dir(cfg, opt.out.empty() ? std::nullopt : std::optional(opt.out));
    sdm::write_report(report, dir, cfg.format);
    std::cout << report.headline() << " -> " << dir << "\n";
    return 0;
  } catch (const sdm::ValidationError& e) {
    std::cerr << "sdm: invalid config: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "sdm: " << family << " failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_repro(const std::string& name, bool all, const std::string& out_flag) {
  std::vector<const sdm::Scenario*> chosen;
  if (all) {
    if (!name.empty()) {
      std::cerr << "sdm: repro takes a scenario name or --all, not both\n";
      return kExitValidation;
    }
    for (const auto& s : sdm::acceptance_scenarios()) chosen.push_back(&s);
  } else if (const auto* s = sdm::find_scenario(name)) {
    chosen.push_back(s);
  } else {
    std::cerr << "sdm: unknown scenario '" << name << "'; available:";
    for (const auto& sc : sdm::acceptance_scenarios()) std::cerr << " " << sc.name;
    std::cerr << "\n";
    return kExitValidation;
  }
  std::string out = out_flag;
  if (out.empty()) {
    const char* env = std::getenv(sdm::kOutputDirEnv);
    out = env && *env ? env : "sdm_out";
  }
  const std::filesystem::path dir = std::filesystem::path(out) / "repro";
  bool all_passed = true;
  try {
    std::filesystem::create_directories(dir);
    for (const auto* s : chosen) {
      const auto r = sdm::run_scenario(*s);
      std::cout << r.line() << std::endl;
      sdm::detail::write_text(dir / (r.name + ".json"), r.to_json().dump(2) + "\n");
      all_passed = all_passed && r.passed;
    }
  } catch (const std::exception& e) {
    std::cerr << "sdm: repro failed: " << e.what() << "\n";
    return kExitFailure;
  }
  return all_passed ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential decision-making experiments"};
  app.set_version_flag("--version", std::string(sdm::kVersion));
  app.require_subcommand(1, 1);

  RunOptions opt;
  std::uint64_t seed = 0;
  const std::vector<std::string> families{"mdp", "lqr", "lqg", "mpc", "bandit", "search"};
  std::vector<CLI::App*> family_cmds;
  std::vector<CLI::Option*> seed_opts;
  for (const auto& f : families) {
    auto* cmd = app.add_subcommand(f, "Run a " + f + " experiment from a JSON config");
    cmd->add_option("--config", opt.config, "Experiment config (JSON)")->required();
    seed_opts.push_back(cmd->add_option("--seed", seed, "Override the master seed"));
    cmd->add_option("--out", opt.out, "Output directory (overrides $SDM_OUTPUT_DIR and the config)");
    cmd->add_option("--format", opt.format, "Table format")->check(CLI::IsMember({"csv", "jsonl", "json-lines"}));
    family_cmds.push_back(cmd);
  }

  std::string scenario;
  bool all = false;
  std::string repro_out;
  auto* repro = app.add_subcommand("repro", "Run an acceptance scenario and check its tolerance");
  repro->add_option("name", scenario, "Scenario name");
  repro->add_flag("--all", all, "Run every scenario");
  repro->add_option("--out", repro_out, "Output directory for scenario results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitValidation;
  }

  if (repro->parsed()) {
    if (scenario.empty() && !all) {
      std::cerr << "sdm: repro needs a scenario name or --all\n";
      return kExitValidation;
    }
    return run_repro(scenario, all, repro_out);
  }
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (!family_cmds[i]->parsed()) continue;
    if (seed_opts[i]->count() > 0) opt.seed = seed;
    return run_family(families[i], opt);
  }
  return kExitValidation;
}
