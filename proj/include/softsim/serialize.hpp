#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "softsim/pipeline.hpp"
#include "softsim/synthgen.hpp"

namespace softsim {

inline constexpr std::string_view kDatasetMagic = "SOFTSIM-DS-1";
inline constexpr std::string_view kCheckpointMagic = "SOFTSIM-CKPT-1";

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

struct Checkpoint {
  Hyperparams hyperparams;
  TrainState state;

  bool operator==(const Checkpoint&) const = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// CSV with RFC 4180 quoting.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& cells);

  static std::string quote(std::string_view cell);

 private:
  std::ostream& out_;
};

}  // namespace softsim
