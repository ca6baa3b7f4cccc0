// fchern: experiment runner and invariant checks.
//
//   fchern run <config-file> [--key value ...]
//   fchern list-experiments
//   fchern check [--seed N]
//
// Exit status: 0 success, 1 configuration error, 2 numerical error.

#include "experiments/config.hpp"
#include "experiments/invariants.hpp"
#include "experiments/runner.hpp"

#include "fchern/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

const std::map<std::string, std::string>& experiment_blurbs() {
  static const std::map<std::string, std::string> blurbs = {
      {"transport-sweep", "charge transported per pulse, Q(tau), per band"},
      {"floquet-gaps", "minimal quasienergy gaps at E=0 and E=pi versus tau"},
      {"floquet-bands", "tracked quasienergy branches E(k) at each tau"},
      {"winding-sweep", "band windings (and optionally Floquet Chern numbers) versus tau"},
      {"chern-static", "lattice Chern numbers of the static bands"},
      {"longtime", "Floquet-state long-time average of the current against the Cesaro mean"},
      {"enclosure", "quasienergy windings around a loop in the (tau, k) plane"},
  };
  return blurbs;
}

int run_command(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  using namespace fchern;
  std::string text;
  {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "fchern: cannot read config file '" << path << "'\n";
      return kExitConfig;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  cli::ExperimentConfig config;
  try {
    config = cli::parse_config(text, overrides);
  } catch (const Error& e) {
    std::cerr << "fchern: config error in " << path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::cerr << "fchern: running " << cli::to_string(config.experiment) << " on " << config.model.describe()
              << "\n";
    const cli::RunSummary summary = cli::run_experiment(config, &std::cerr);
    std::cout << summary.csv.string() << " (" << summary.rows << " rows)\n" << summary.manifest.string() << "\n";
    if (summary.plot) std::cout << summary.plot->string() << "\n";
    if (!summary.warnings.empty()) {
      std::cerr << "fchern: " << summary.warnings.size() << " warning(s), see the manifest\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "fchern: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "fchern: invalid request: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidModelError& e) {
    std::cerr << "fchern: invalid model: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "fchern: numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fchern;
  CLI::App app{"Floquet and adiabatic-transport experiments on two-parameter Hamiltonian families"};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment described by a config file");
  std::string config_path;
  run->add_option("config", config_path, "config file of 'key = value' lines")->required();
  std::map<std::string, std::optional<std::string>> flag_values;
  for (const cli::KeyInfo& key : cli::config_keys()) {
    std::string names = "--" + key.key;
    if (key.key.find('_') != std::string::npos) {
      std::string dashed = key.key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      names += ",--" + dashed;
    }
    std::string help = key.help;
    if (!key.default_value.empty()) help += " [default: " + key.default_value + "]";
    run->add_option(names, flag_values[key.key], help);
  }

  app.add_subcommand("list-experiments", "print the available experiments");

  auto* check = app.add_subcommand("check", "run the structural invariant suite");
  unsigned long seed = 1;
  check->add_option("--seed", seed, "seed of the random (model, tau) draws")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const cli::KeyInfo& key : cli::config_keys()) {
      if (const auto& v = flag_values[key.key]) overrides.emplace_back(key.key, *v);
    }
    return run_command(config_path, overrides);
  }
  if (app.got_subcommand("list-experiments")) {
    for (const auto& [value, name] : cli::experiment_names()) {
      std::cout << name << "\t" << experiment_blurbs().at(name) << "\n";
    }
    return 0;
  }
  const auto outcomes = cli::run_invariant_suite(seed, &std::cout);
  int failed = 0;
  for (const auto& o : outcomes) failed += o.passed ? 0 : 1;
  std::cout << (failed == 0 ? "all invariants hold" : std::to_string(failed) + " invariant check(s) failed") << "\n";
  return failed == 0 ? 0 : kExitNumerical;
}
