#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "softsim/pipeline.hpp"
#include "softsim/synthgen.hpp"

namespace softsim {

enum class Preset { Baseline, NoPartNoCce, NoPart, Full };

Preset parse_preset(const std::string& name);
std::string preset_name(Preset preset);

/// Applies an ablation preset to the hyperparameters. Idempotent.
void apply_preset(Hyperparams& hp, Preset preset);

struct RunConfig {
  GenConfig generation;
  Hyperparams hyperparams;
  Preset preset = Preset::Full;
  std::string output_dir = "runs/default";

  bool video() const { return generation.video; }
  bool operator==(const RunConfig&) const = default;
};

/// Parses the nested key-value (YAML) config. Missing keys take their
/// defaults; unknown keys and out-of-range values raise ConfigError with the
/// key path in the message. An empty document yields all defaults.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Every field written out explicitly; parsing it back yields the same config.
std::string resolved_config_text(const RunConfig& cfg);

void validate(const RunConfig& cfg);

inline const std::vector<std::string>& sweepable_params() {
  static const std::vector<std::string> names{"lambda", "k", "lambda_c", "lambda_p", "p", "iterations"};
  return names;
}

/// Sets one sweepable parameter on a copy of the hyperparameters.
Hyperparams with_param(const Hyperparams& base, const std::string& name, double value);

struct SweepRow {
  std::string param;
  double value = 0.0;
  IterationMetrics baseline;
  IterationMetrics final;
};

/// One full pipeline run per value, sharing the dataset and seed.
std::vector<SweepRow> sweep(const std::string& param, const std::vector<double>& values, const RunConfig& base,
                            const Dataset& dataset);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_metrics_csv(std::ostream& out, const std::vector<IterationMetrics>& history);
/// Same records as structured text, one block per iteration.
void write_metrics_records(std::ostream& out, const std::vector<IterationMetrics>& history);

}  // namespace softsim
