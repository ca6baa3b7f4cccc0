#pragma once

#include "experiments/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fchern::cli {

extern const char* const kVersion;

struct RunSummary {
  std::filesystem::path csv;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> plot;
  std::size_t rows = 0;
  std::vector<std::string> warnings;
};

/// Runs one experiment, writing <out_dir>/<experiment>.csv, manifest.txt
/// and optionally plot_<experiment>.py. On any failure the CSV is removed
/// and no manifest is left behind; numerical failures name the grid point.
RunSummary run_experiment(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// 17 significant digits, the CSV float format.
std::string format_double(double x);

}  // namespace fchern::cli
