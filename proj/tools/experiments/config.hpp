#pragma once

// Text configuration of a single experiment run.

#include "fchern/models.hpp"
#include "fchern/topology.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fchern::cli {

enum class Experiment {
  transport_sweep,
  floquet_gaps,
  floquet_bands,
  winding_sweep,
  chern_static,
  longtime,
  enclosure,
};

const std::vector<std::pair<Experiment, std::string>>& experiment_names();
std::string to_string(Experiment e);

enum class Spacing { linear, log, adaptive, list };

struct TauGrid {
  double min = 0.0;
  double max = 0.0;
  int points = 0;
  Spacing spacing = Spacing::list;
  std::vector<double> listed;

  /// Grid values; for adaptive spacing, the uniform seed grid of
  /// max(8, points / 2) values.
  std::vector<double> values() const;
};

TauGrid parse_tau_grid(std::string_view text);

/// Parsed model selection such as "harper:p=1,q=3", "h1", "h2:eps=0.2" or "simon".
struct ModelSpec {
  std::string kind;
  std::map<std::string, double> params;

  bool has_family() const { return kind != "simon"; }
  /// Throws ConfigError for models without a Hamiltonian family (simon).
  ModelFamily family() const;
  FloquetField floquet(double tol) const;
  std::string describe() const;
};

ModelSpec parse_model(std::string_view text);

/// Where a resolved setting came from, for the manifest.
struct SettingRecord {
  std::string key;
  std::string value;
  std::string source;  // "file line N", "flag" or "default"
  std::optional<std::string> shadowed_file_value;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::transport_sweep;
  std::string model_text;
  ModelSpec model;
  std::optional<TauGrid> tau_grid;
  std::optional<int> band;
  std::optional<double> epsilon;
  int k_points = 128;
  double tol = 1e-9;
  std::string out_dir = "out";
  bool emit_plot = false;
  unsigned long seed = 1;

  // experiment-specific
  std::string drive = "pulse";  // transport-sweep: pulse or smooth_pulse
  int grid = 64;                // chern-static starting lattice
  double k = 0.3;               // longtime
  long cesaro_steps = 10000;    // longtime
  double center_tau = 0.0;      // enclosure
  double center_k = 0.0;
  double radius = 0.0;
  int loop_points = 128;
  int refine_minima = 6;        // floquet-gaps
  bool floquet_chern = false;   // winding-sweep: also compute plaquette Chern numbers

  std::vector<SettingRecord> settings;
};

/// Keys accepted in files and as --flags, with their defaults and meaning.
struct KeyInfo {
  std::string key;
  std::string default_value;
  std::string help;
};
const std::vector<KeyInfo>& config_keys();

/// Parses `key = value` lines ('#' starts a comment) and applies the flag
/// overrides, which take precedence. Errors name the offending line (or flag).
ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace fchern::cli
