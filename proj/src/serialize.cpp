#include "softsim/serialize.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "softsim/errors.hpp"
#include "softsim/fields.hpp"

namespace softsim {

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw DataError("format_double: conversion failed");
  return {buf, ptr};
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(fmt::format("expected a number, found '{}'", text));
  }
  return value;
}

namespace {

// Whitespace-separated token reader with context in its error messages.
class Tokens {
 public:
  Tokens(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::string next() {
    std::string tok;
    if (!(in_ >> tok)) throw DataError(fmt::format("{}: unexpected end of file", what_));
    return tok;
  }
  void expect(std::string_view word) {
    const std::string tok = next();
    if (tok != word) throw DataError(fmt::format("{}: expected '{}', found '{}'", what_, word, tok));
  }
  double number() { return parse_double(next()); }
  long long integer() {
    const std::string tok = next();
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw DataError(fmt::format("{}: expected an integer, found '{}'", what_, tok));
    }
    return v;
  }
  std::size_t count() {
    const long long v = integer();
    if (v < 0) throw DataError(fmt::format("{}: negative count {}", what_, v));
    return static_cast<std::size_t>(v);
  }
  const std::string& what() const { return what_; }

 private:
  std::istream& in_;
  std::string what_;
};

std::string field_text(double v) { return format_double(v); }
std::string field_text(int v) { return std::to_string(v); }
std::string field_text(std::uint64_t v) { return std::to_string(v); }
std::string field_text(bool v) { return v ? "true" : "false"; }

void field_parse(Tokens& t, double& v) { v = t.number(); }
void field_parse(Tokens& t, int& v) { v = static_cast<int>(t.integer()); }
void field_parse(Tokens& t, std::uint64_t& v) {
  const std::string tok = t.next();
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw DataError(fmt::format("{}: bad seed '{}'", t.what(), tok));
}
void field_parse(Tokens& t, bool& v) {
  const std::string tok = t.next();
  if (tok != "true" && tok != "false") throw DataError(fmt::format("{}: expected true/false, found '{}'", t.what(), tok));
  v = tok == "true";
}

template <typename Config>
void write_fields(std::ostream& out, const Config& cfg) {
  visit_fields(cfg, [&](const char* name, const auto& value) { out << name << ' ' << field_text(value) << '\n'; });
}

template <typename Config>
void read_fields(Tokens& t, Config& cfg) {
  visit_fields(cfg, [&](const char* name, auto& value) {
    t.expect(name);
    field_parse(t, value);
  });
}

void write_values(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) out << (i == 0 ? "" : " ") << format_double(values[i]);
  out << '\n';
}

void read_values(Tokens& t, std::span<double> values) {
  for (double& v : values) v = t.number();
}

void write_matrix(std::ostream& out, std::string_view name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  write_values(out, m.values());
}

Matrix read_matrix(Tokens& t, std::string_view name) {
  t.expect(name);
  const std::size_t rows = t.count();
  const std::size_t cols = t.count();
  Matrix m(rows, cols);
  read_values(t, m.values());
  return m;
}

void write_vector(std::ostream& out, std::string_view name, const Vector& v) {
  out << name << ' ' << v.size() << '\n';
  write_values(out, v);
}

Vector read_vector(Tokens& t, std::string_view name) {
  t.expect(name);
  Vector v(t.count());
  read_values(t, v);
  return v;
}

void write_params(std::ostream& out, std::string_view prefix, const ParamSet& p) {
  write_matrix(out, fmt::format("{}.w1", prefix), p.w1);
  write_vector(out, fmt::format("{}.b1", prefix), p.b1);
  write_matrix(out, fmt::format("{}.w2", prefix), p.w2);
  write_vector(out, fmt::format("{}.b2", prefix), p.b2);
}

ParamSet read_params(Tokens& t, std::string_view prefix) {
  ParamSet p;
  p.w1 = read_matrix(t, fmt::format("{}.w1", prefix));
  p.b1 = read_vector(t, fmt::format("{}.b1", prefix));
  p.w2 = read_matrix(t, fmt::format("{}.w2", prefix));
  p.b2 = read_vector(t, fmt::format("{}.b2", prefix));
  if (p.b1.size() != p.w1.cols() || p.w2.rows() != p.w1.cols() || p.b2.size() != p.w2.cols()) {
    throw DataError(fmt::format("{}: inconsistent encoder shapes for '{}'", t.what(), prefix));
  }
  return p;
}

void write_split(std::ostream& out, std::string_view name, const std::vector<SyntheticImage>& images) {
  out << name << ' ' << images.size() << '\n';
  for (const auto& img : images) {
    out << img.identity << ' ' << img.camera << ' ' << (img.tracklet ? std::to_string(*img.tracklet) : "-") << ' '
        << img.pixels.rows() << ' ' << img.pixels.cols() << ' ';
    write_values(out, img.pixels.values());
  }
}

std::vector<SyntheticImage> read_split(Tokens& t, std::string_view name) {
  t.expect(name);
  std::vector<SyntheticImage> images(t.count());
  for (auto& img : images) {
    img.identity = static_cast<int>(t.integer());
    img.camera = static_cast<int>(t.integer());
    const std::string tracklet = t.next();
    if (tracklet != "-") {
      int id = 0;
      const auto [ptr, ec] = std::from_chars(tracklet.data(), tracklet.data() + tracklet.size(), id);
      if (ec != std::errc() || ptr != tracklet.data() + tracklet.size()) {
        throw DataError(fmt::format("{}: bad tracklet id '{}'", t.what(), tracklet));
      }
      img.tracklet = id;
    }
    const std::size_t rows = t.count();
    const std::size_t cols = t.count();
    img.pixels = Matrix(rows, cols);
    read_values(t, img.pixels.values());
  }
  return images;
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::out | std::ios::trunc);
  if (!f) throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
  fn(f);
  if (!f) throw DataError(fmt::format("failed writing '{}'", path.string()));
}

template <typename Fn>
void read_file(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream f(path);
  if (!f) throw DataError(fmt::format("cannot open '{}'", path.string()));
  fn(f);
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << kDatasetMagic << '\n';
  write_fields(out, ds.config);
  out << "end_header\n";
  write_split(out, "train", ds.train);
  write_split(out, "query", ds.query);
  write_split(out, "gallery", ds.gallery);
}

Dataset read_dataset(std::istream& in) {
  Tokens t(in, "dataset");
  if (t.next() != kDatasetMagic) throw DataError(fmt::format("dataset: missing magic '{}'", kDatasetMagic));
  Dataset ds;
  read_fields(t, ds.config);
  t.expect("end_header");
  ds.train = read_split(t, "train");
  ds.query = read_split(t, "query");
  ds.gallery = read_split(t, "gallery");
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  write_file(path, [&](std::ostream& f) { write_dataset(f, ds); });
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset ds;
  read_file(path, [&](std::istream& f) { ds = read_dataset(f); });
  return ds;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const TrainState& s = ckpt.state;
  out << kCheckpointMagic << '\n' << "[hyperparams]\n";
  write_fields(out, ckpt.hyperparams);
  out << "[state]\n";
  out << "iteration " << s.iteration << '\n';
  out << "dropout_rate " << format_double(s.encoder.dropout_rate) << '\n';
  write_params(out, "weights", s.encoder.weights);
  write_params(out, "momentum", s.encoder.momentum);
  out << "table_tau " << format_double(s.table.tau()) << '\n';
  out << "table_momentum " << format_double(s.table.momentum()) << '\n';
  write_matrix(out, "table", s.table.features());
  out << "history " << s.history.size() << '\n';
  for (const auto& m : s.history) {
    out << m.iteration << ' ';
    write_values(out, std::vector<double>{m.rank1, m.rank5, m.rank10, m.map, m.mean_loss, m.cross_camera_fraction,
                                          m.reliable_precision});
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  Tokens t(in, "checkpoint");
  if (t.next() != kCheckpointMagic) throw DataError(fmt::format("checkpoint: missing magic '{}'", kCheckpointMagic));
  Checkpoint ckpt;
  t.expect("[hyperparams]");
  read_fields(t, ckpt.hyperparams);
  t.expect("[state]");
  TrainState& s = ckpt.state;
  t.expect("iteration");
  s.iteration = static_cast<int>(t.integer());
  t.expect("dropout_rate");
  s.encoder.dropout_rate = t.number();
  s.encoder.weights = read_params(t, "weights");
  s.encoder.momentum = read_params(t, "momentum");
  if (!s.encoder.momentum.same_shape(s.encoder.weights)) throw DataError("checkpoint: momentum shape mismatch");
  t.expect("table_tau");
  const double tau = t.number();
  t.expect("table_momentum");
  const double mu = t.number();
  s.table = LookupTable::from_features(read_matrix(t, "table"), tau, mu);
  t.expect("history");
  s.history.resize(t.count());
  for (auto& m : s.history) {
    m.iteration = static_cast<int>(t.integer());
    for (double* field : {&m.rank1, &m.rank5, &m.rank10, &m.map, &m.mean_loss, &m.cross_camera_fraction,
                          &m.reliable_precision}) {
      *field = t.number();
    }
  }
  t.expect("end");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, [&](std::ostream& f) { write_checkpoint(f, ckpt); });
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ckpt;
  read_file(path, [&](std::istream& f) { ckpt = read_checkpoint(f); });
  return ckpt;
}

std::string CsvWriter::quote(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i == 0 ? "" : ",") << quote(cells[i]);
  out_ << "\r\n";
}

}  // namespace softsim
