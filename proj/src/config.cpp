#include "softsim/config.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "softsim/errors.hpp"
#include "softsim/fields.hpp"
#include "softsim/serialize.hpp"

namespace softsim {

namespace {

constexpr int kVideoBaselineEpochs = 30;

template <typename T>
void parse_integer(const std::string& key, const std::string& text, T& out) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: expected an integer, found '{}'", key, text));
  }
  out = v;
}

void parse_scalar(const std::string& key, const std::string& text, int& out) { parse_integer(key, text, out); }
void parse_scalar(const std::string& key, const std::string& text, std::uint64_t& out) { parse_integer(key, text, out); }
void parse_scalar(const std::string& key, const std::string& text, double& out) {
  try {
    out = parse_double(text);
  } catch (const DataError&) {
    throw ConfigError(fmt::format("{}: expected a number, found '{}'", key, text));
  }
}
void parse_scalar(const std::string& key, const std::string& text, bool& out) {
  if (text == "true") {
    out = true;
  } else if (text == "false") {
    out = false;
  } else {
    throw ConfigError(fmt::format("{}: expected true or false, found '{}'", key, text));
  }
}

std::string scalar_text(double v) { return format_double(v); }
std::string scalar_text(int v) { return std::to_string(v); }
std::string scalar_text(std::uint64_t v) { return std::to_string(v); }
std::string scalar_text(bool v) { return v ? "true" : "false"; }

std::string scalar_of(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError(fmt::format("{}: expected a scalar value", key));
  return node.Scalar();
}

// Reads one section into a reflected struct; returns the keys present.
template <typename Config>
std::set<std::string> read_section(const YAML::Node& section, const std::string& name, Config& cfg,
                                   const std::set<std::string>& extra_keys = {}) {
  std::set<std::string> seen;
  if (!section || section.IsNull()) return seen;
  if (!section.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", name));
  for (const auto& entry : section) {
    const std::string key = entry.first.as<std::string>();
    const std::string path = fmt::format("{}.{}", name, key);
    if (extra_keys.contains(key)) continue;
    bool found = false;
    visit_fields(cfg, [&](const char* field, auto& value) {
      if (key != field) return;
      found = true;
      parse_scalar(path, scalar_of(entry.second, path), value);
    });
    if (!found) throw ConfigError(fmt::format("unknown key '{}'", path));
    seen.insert(key);
  }
  return seen;
}

template <typename Config>
void emit_section(YAML::Emitter& out, const char* name, const Config& cfg) {
  out << YAML::Key << name << YAML::Value << YAML::BeginMap;
  visit_fields(cfg, [&](const char* field, const auto& value) {
    out << YAML::Key << field << YAML::Value << scalar_text(value);
  });
  out << YAML::EndMap;
}

}  // namespace

Preset parse_preset(const std::string& name) {
  if (name == "baseline") return Preset::Baseline;
  if (name == "no-part-no-cce") return Preset::NoPartNoCce;
  if (name == "no-part") return Preset::NoPart;
  if (name == "full") return Preset::Full;
  throw ConfigError(fmt::format("run.preset: unknown preset '{}' (baseline | no-part-no-cce | no-part | full)", name));
}

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::Baseline: return "baseline";
    case Preset::NoPartNoCce: return "no-part-no-cce";
    case Preset::NoPart: return "no-part";
    case Preset::Full: return "full";
  }
  return "full";
}

void apply_preset(Hyperparams& hp, Preset preset) {
  switch (preset) {
    case Preset::Baseline:
      hp.lambda = 1.0;
      hp.k = 0;
      break;
    case Preset::NoPartNoCce:
      hp.lambda_p = 0.0;
      hp.lambda_c = 0.0;
      break;
    case Preset::NoPart:
      hp.lambda_p = 0.0;
      break;
    case Preset::Full:
      break;
  }
}

void validate(const RunConfig& cfg) {
  validate(cfg.generation);
  validate(cfg.hyperparams);
  if (cfg.generation.height % cfg.hyperparams.p != 0) {
    throw ConfigError(fmt::format("hyperparams.p: {} does not divide generation.height = {}", cfg.hyperparams.p,
                                  cfg.generation.height));
  }
}

RunConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  RunConfig cfg;
  if (root.IsNull()) {
    validate(cfg);
    return cfg;
  }
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");

  std::set<std::string> hp_keys;
  for (const auto& entry : root) {
    const std::string section = entry.first.as<std::string>();
    if (section == "generation") {
      read_section(entry.second, section, cfg.generation);
    } else if (section == "hyperparams") {
      hp_keys = read_section(entry.second, section, cfg.hyperparams);
    } else if (section == "run") {
      const YAML::Node& run = entry.second;
      if (run.IsNull()) continue;
      if (!run.IsMap()) throw ConfigError("run: expected a mapping");
      for (const auto& kv : run) {
        const std::string key = kv.first.as<std::string>();
        const std::string path = "run." + key;
        if (key == "preset") {
          cfg.preset = parse_preset(scalar_of(kv.second, path));
        } else if (key == "output_dir") {
          cfg.output_dir = scalar_of(kv.second, path);
        } else if (key == "video") {
          parse_scalar(path, scalar_of(kv.second, path), cfg.generation.video);
        } else {
          throw ConfigError(fmt::format("unknown key '{}'", path));
        }
      }
    } else {
      throw ConfigError(fmt::format("unknown key '{}'", section));
    }
  }
  if (cfg.generation.video && !hp_keys.contains("baseline_epochs")) {
    cfg.hyperparams.baseline_epochs = kVideoBaselineEpochs;
  }
  apply_preset(cfg.hyperparams, cfg.preset);
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config file '{}' cannot be read", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string resolved_config_text(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_section(out, "generation", cfg.generation);
  emit_section(out, "hyperparams", cfg.hyperparams);
  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value << preset_name(cfg.preset);
  out << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << cfg.output_dir;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Hyperparams with_param(const Hyperparams& base, const std::string& name, double value) {
  Hyperparams hp = base;
  auto as_int = [&](const char* key) {
    if (value != static_cast<double>(static_cast<int>(value))) {
      throw ConfigError(fmt::format("sweep {}: value {} is not an integer", key, value));
    }
    return static_cast<int>(value);
  };
  if (name == "lambda") {
    hp.lambda = value;
  } else if (name == "k") {
    hp.k = as_int("k");
  } else if (name == "lambda_c") {
    hp.lambda_c = value;
  } else if (name == "lambda_p") {
    hp.lambda_p = value;
  } else if (name == "p") {
    hp.p = as_int("p");
  } else if (name == "iterations") {
    hp.num_iterations = as_int("iterations");
  } else {
    throw ConfigError(fmt::format("sweep: '{}' is not sweepable (lambda, k, lambda_c, lambda_p, p, iterations)", name));
  }
  validate(hp);
  return hp;
}

std::vector<SweepRow> sweep(const std::string& param, const std::vector<double>& values, const RunConfig& base,
                            const Dataset& dataset) {
  std::vector<SweepRow> rows;
  for (double value : values) {
    RunConfig cfg = base;
    cfg.hyperparams = with_param(base.hyperparams, param, value);
    try {
      validate(cfg);
      const TrainState state = run(dataset, cfg.hyperparams);
      rows.push_back({param, value, state.history.front(), state.history.back()});
    } catch (const Error& e) {
      throw Error(fmt::format("sweep {}={}: {}", param, format_double(value), e.what()));
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  CsvWriter csv(out);
  csv.row({"param", "value", "baseline_rank1", "baseline_mAP", "rank1", "rank5", "rank10", "mAP",
           "cross_camera_fraction", "reliable_precision"});
  for (const auto& r : rows) {
    csv.row({r.param, format_double(r.value), format_double(r.baseline.rank1), format_double(r.baseline.map),
             format_double(r.final.rank1), format_double(r.final.rank5), format_double(r.final.rank10),
             format_double(r.final.map), format_double(r.final.cross_camera_fraction),
             format_double(r.final.reliable_precision)});
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<IterationMetrics>& history) {
  CsvWriter csv(out);
  csv.row({"iteration", "rank1", "rank5", "rank10", "mAP", "mean_loss", "cross_camera_fraction", "reliable_precision"});
  for (const auto& m : history) {
    csv.row({std::to_string(m.iteration), format_double(m.rank1), format_double(m.rank5), format_double(m.rank10),
             format_double(m.map), format_double(m.mean_loss), format_double(m.cross_camera_fraction),
             format_double(m.reliable_precision)});
  }
}

void write_metrics_records(std::ostream& out, const std::vector<IterationMetrics>& history) {
  YAML::Emitter emit;
  emit << YAML::BeginSeq;
  for (const auto& m : history) {
    emit << YAML::BeginMap;
    emit << YAML::Key << "iteration" << YAML::Value << m.iteration;
    emit << YAML::Key << "rank1" << YAML::Value << format_double(m.rank1);
    emit << YAML::Key << "rank5" << YAML::Value << format_double(m.rank5);
    emit << YAML::Key << "rank10" << YAML::Value << format_double(m.rank10);
    emit << YAML::Key << "mAP" << YAML::Value << format_double(m.map);
    emit << YAML::Key << "mean_loss" << YAML::Value << format_double(m.mean_loss);
    emit << YAML::Key << "cross_camera_fraction" << YAML::Value << format_double(m.cross_camera_fraction);
    emit << YAML::Key << "reliable_precision" << YAML::Value << format_double(m.reliable_precision);
    emit << YAML::EndMap;
  }
  emit << YAML::EndSeq;
  out << emit.c_str() << '\n';
}

}  // namespace softsim
