#pragma once

// Power-trace datasets: CSV loading/writing, the synthetic trojan simulator
// and seeded train/test splitting.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "htdetect/error.hpp"
#include "htdetect/random.hpp"

namespace htdetect {

enum class TrojanState { Disabled, Triggered };
enum class InputMode { FixedInput, ChainedInput };
enum class TraceSource { DatasetFile, Synthetic };

inline std::string_view to_string(TrojanState s) {
  return s == TrojanState::Triggered ? "triggered" : "disabled";
}

/// Positive class is Triggered.
inline int label_of(TrojanState s) { return s == TrojanState::Triggered ? 1 : 0; }

struct PowerTrace {
  std::vector<double> samples;
  std::string trojan_id;
  TrojanState state = TrojanState::Disabled;
  InputMode input_mode = InputMode::FixedInput;
  double temperature_c = 25.0;
  TraceSource source = TraceSource::DatasetFile;

  int label() const { return label_of(state); }

  bool operator==(const PowerTrace&) const = default;
};

inline void validate_samples(std::span<const double> samples, std::string_view what = "trace") {
  if (samples.empty()) throw NumericInputError(std::string(what) + ": no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw NumericInputError(std::string(what) + ": non-finite sample at index " +
                              std::to_string(i));
    }
  }
}

struct Dataset {
  std::vector<PowerTrace> traces;

  std::size_t size() const { return traces.size(); }
  bool empty() const { return traces.empty(); }

  std::size_t count(TrojanState s) const {
    return static_cast<std::size_t>(std::count_if(
        traces.begin(), traces.end(), [s](const PowerTrace& t) { return t.state == s; }));
  }

  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(traces.size());
    for (const auto& t : traces) out.push_back(t.label());
    return out;
  }

  /// Trojan id shared by every trace; empty when the dataset is mixed or empty.
  std::string trojan_id() const {
    if (traces.empty()) return {};
    for (const auto& t : traces) {
      if (t.trojan_id != traces.front().trojan_id) return {};
    }
    return traces.front().trojan_id;
  }

  void append(const Dataset& other) {
    traces.insert(traces.end(), other.traces.begin(), other.traces.end());
  }

  bool operator==(const Dataset&) const = default;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

enum class CsvLayout { RowPerTrace, ColumnPerTrace };

enum class LabelSource {
  Filename,   // state token in the file name, e.g. T500_triggered.csv
  Directory,  // state token in the parent directory name
  Column,     // explicit label cell: a column (row layout) or row (column layout)
};

struct CsvOptions {
  CsvLayout layout = CsvLayout::RowPerTrace;
  LabelSource labeling = LabelSource::Filename;
  std::size_t label_index = 0;  // 0-based; only used with LabelSource::Column
  bool has_header = false;      // first line skipped when set
  std::string trojan_id;        // fallback when no T<number> token is found
  InputMode input_mode = InputMode::FixedInput;
  double temperature_c = 25.0;
};

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> name_tokens(std::string_view name) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

inline std::optional<TrojanState> state_from_token(std::string_view token) {
  static constexpr std::string_view kTriggered[] = {"triggered", "trigger", "enabled",
                                                    "activated", "active", "1"};
  static constexpr std::string_view kDisabled[] = {"disabled", "disable", "inactive", "clean",
                                                   "free",     "golden",  "0"};
  const std::string t = lowercase(token);
  for (auto k : kTriggered)
    if (t == k) return TrojanState::Triggered;
  for (auto k : kDisabled)
    if (t == k) return TrojanState::Disabled;
  return std::nullopt;
}

// Exactly one state token must be present; numeric tokens are ignored here.
inline std::optional<TrojanState> state_from_name(std::string_view name) {
  std::optional<TrojanState> found;
  for (const auto& tok : name_tokens(name)) {
    if (tok == "0" || tok == "1") continue;
    if (auto s = state_from_token(tok)) {
      if (found && *found != *s) return std::nullopt;
      found = s;
    }
  }
  return found;
}

inline std::optional<std::string> trojan_from_name(std::string_view name) {
  for (const auto& tok : name_tokens(name)) {
    if (tok.size() >= 2 && tok[0] == 't' &&
        std::all_of(tok.begin() + 1, tok.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return "T" + tok.substr(1);
    }
  }
  return std::nullopt;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

// Non-blank lines paired with their 1-based physical line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.emplace_back(number, std::move(line));
  }
  return lines;
}

inline std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Loads one CSV file into a Dataset, one PowerTrace per row or column.
inline Dataset load_csv_dataset(const std::filesystem::path& path, const CsvOptions& opts = {}) {
  const std::string source = path.string();
  if (!std::filesystem::exists(path)) throw IoError("input file not found: " + source);
  auto lines = detail::read_lines(path);
  if (opts.has_header && !lines.empty()) lines.erase(lines.begin());
  if (lines.empty()) throw EmptyDatasetError(source + ": no data rows");

  std::optional<TrojanState> file_state;
  if (opts.labeling == LabelSource::Filename) {
    file_state = detail::state_from_name(path.stem().string());
    if (!file_state)
      throw ConfigError(source + ": file name carries no unambiguous trojan state token");
  } else if (opts.labeling == LabelSource::Directory) {
    file_state = detail::state_from_name(path.parent_path().filename().string());
    if (!file_state)
      throw ConfigError(source + ": directory name carries no unambiguous trojan state token");
  }

  std::string trojan = opts.trojan_id;
  if (trojan.empty()) {
    if (auto t = detail::trojan_from_name(path.stem().string())) {
      trojan = *t;
    } else if (auto d = detail::trojan_from_name(path.parent_path().filename().string())) {
      trojan = *d;
    } else {
      trojan = "unknown";
    }
  }

  const bool label_cells = opts.labeling == LabelSource::Column;
  auto parse_state = [&](std::string_view cell, std::size_t row, std::size_t col) {
    auto s = detail::state_from_token(detail::trim(cell));
    if (!s) throw ParseError(source, row, col, "unrecognized label '" + std::string(cell) + "'");
    return *s;
  };

  // Parse into a row-major grid; label cells are kept aside.
  std::vector<std::vector<double>> grid;
  std::vector<TrojanState> row_labels;
  std::vector<TrojanState> column_labels;
  std::size_t width = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto& [number, text] = lines[r];
    const auto cells = detail::split_cells(text);
    if (r == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw ShapeError(source + ": row " + std::to_string(number) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(width));
    }
    const bool label_row = label_cells && opts.layout == CsvLayout::ColumnPerTrace &&
                           r == opts.label_index;
    if (label_row) {
      for (std::size_t c = 0; c < cells.size(); ++c)
        column_labels.push_back(parse_state(cells[c], number, c + 1));
      continue;
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (label_cells && opts.layout == CsvLayout::RowPerTrace && c == opts.label_index) {
        row_labels.push_back(parse_state(cells[c], number, c + 1));
        continue;
      }
      auto v = detail::parse_real(cells[c]);
      if (!v) {
        throw ParseError(source, number, c + 1,
                         "not a finite real: '" + std::string(detail::trim(cells[c])) + "'");
      }
      values.push_back(*v);
    }
    grid.push_back(std::move(values));
  }
  if (label_cells && opts.layout == CsvLayout::RowPerTrace && opts.label_index >= width)
    throw ConfigError(source + ": label column " + std::to_string(opts.label_index) +
                      " out of range");
  if (label_cells && opts.layout == CsvLayout::ColumnPerTrace && column_labels.empty())
    throw ConfigError(source + ": label row " + std::to_string(opts.label_index) +
                      " out of range");
  if (grid.empty() || grid.front().empty()) throw EmptyDatasetError(source + ": no samples");

  auto make_trace = [&](std::vector<double> samples, TrojanState state) {
    PowerTrace t;
    t.samples = std::move(samples);
    t.trojan_id = trojan;
    t.state = state;
    t.input_mode = opts.input_mode;
    t.temperature_c = opts.temperature_c;
    t.source = TraceSource::DatasetFile;
    return t;
  };

  Dataset ds;
  if (opts.layout == CsvLayout::RowPerTrace) {
    ds.traces.reserve(grid.size());
    for (std::size_t r = 0; r < grid.size(); ++r)
      ds.traces.push_back(make_trace(std::move(grid[r]), label_cells ? row_labels[r] : *file_state));
  } else {
    const std::size_t n_traces = grid.front().size();
    ds.traces.reserve(n_traces);
    for (std::size_t c = 0; c < n_traces; ++c) {
      std::vector<double> samples;
      samples.reserve(grid.size());
      for (const auto& row : grid) samples.push_back(row[c]);
      ds.traces.push_back(make_trace(std::move(samples), label_cells ? column_labels[c] : *file_state));
    }
  }
  return ds;
}

/// Writes a dataset loadable with LabelSource::Column, label_index 0 and no
/// header. Values use shortest round-trip formatting. ColumnPerTrace needs
/// equal-length traces.
inline void write_csv_dataset(const Dataset& ds, const std::filesystem::path& path,
                              CsvLayout layout = CsvLayout::RowPerTrace,
                              bool with_label = true) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (layout == CsvLayout::RowPerTrace) {
    for (const auto& t : ds.traces) {
      bool first = true;
      if (with_label) {
        out << to_string(t.state);
        first = false;
      }
      for (double v : t.samples) {
        if (!first) out << ',';
        out << detail::format_real(v);
        first = false;
      }
      out << '\n';
    }
  } else {
    if (ds.empty()) return;
    const std::size_t len = ds.traces.front().samples.size();
    for (const auto& t : ds.traces) {
      if (t.samples.size() != len)
        throw ShapeError("column layout requires equal-length traces");
    }
    if (with_label) {
      for (std::size_t c = 0; c < ds.size(); ++c)
        out << (c ? "," : "") << to_string(ds.traces[c].state);
      out << '\n';
    }
    for (std::size_t r = 0; r < len; ++r) {
      for (std::size_t c = 0; c < ds.size(); ++c)
        out << (c ? "," : "") << detail::format_real(ds.traces[c].samples[r]);
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic traces
// ---------------------------------------------------------------------------

enum class SyntheticEffect { SpikeTrain, HarmonicInjection, VarianceInflation, DutyDrain };

inline std::string_view to_string(SyntheticEffect e) {
  switch (e) {
    case SyntheticEffect::SpikeTrain: return "SpikeTrain";
    case SyntheticEffect::HarmonicInjection: return "HarmonicInjection";
    case SyntheticEffect::VarianceInflation: return "VarianceInflation";
    case SyntheticEffect::DutyDrain: return "DutyDrain";
  }
  return "?";
}

/// Accepts the enum spelling or its snake_case form.
inline SyntheticEffect synthetic_effect_from_string(std::string_view name) {
  auto snake = [](std::string_view s) {
    std::string out;
    for (char ch : s) {
      if (std::isupper(static_cast<unsigned char>(ch))) {
        if (!out.empty()) out += '_';
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      } else {
        out += ch;
      }
    }
    return out;
  };
  for (auto e : {SyntheticEffect::SpikeTrain, SyntheticEffect::HarmonicInjection,
                 SyntheticEffect::VarianceInflation, SyntheticEffect::DutyDrain}) {
    if (name == to_string(e) || name == snake(to_string(e))) return e;
  }
  throw ConfigError("unknown synthetic effect '" + std::string(name) +
                    "' (expected SpikeTrain, HarmonicInjection, VarianceInflation or DutyDrain)");
}

struct SyntheticConfig {
  std::string trojan_id = "SYN";
  std::size_t n_per_class = 200;
  std::size_t trace_len = 256;
  double base_mean = 10.0;
  double base_noise_sd = 1.0;
  std::vector<double> carrier_freqs{0.05, 0.125};
  double separability = 1.0;
  SyntheticEffect effect = SyntheticEffect::VarianceInflation;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticConfig&) const = default;
};

/// Throws ConfigError naming the offending field, prefixed by `where`.
inline void validate(const SyntheticConfig& c, std::string_view where = "synthetic") {
  const std::string p = std::string(where) + ".";
  if (c.n_per_class == 0) throw ConfigError(p + "n_per_class must be positive");
  if (c.trace_len < 8) throw ConfigError(p + "trace_len must be at least 8");
  if (!std::isfinite(c.base_mean)) throw ConfigError(p + "base_mean must be finite");
  if (!std::isfinite(c.base_noise_sd) || c.base_noise_sd < 0.0)
    throw ConfigError(p + "base_noise_sd must be finite and nonnegative");
  if (!(c.separability >= 0.0 && c.separability <= 1.0))
    throw ConfigError(p + "separability must lie in [0, 1]");
  for (std::size_t i = 0; i < c.carrier_freqs.size(); ++i) {
    const double f = c.carrier_freqs[i];
    if (!(f > 0.0 && f < 0.5))
      throw ConfigError(p + "carrier_freqs[" + std::to_string(i) + "] must lie in (0, 0.5)");
  }
  if (c.effect == SyntheticEffect::HarmonicInjection && c.carrier_freqs.empty())
    throw ConfigError(p + "carrier_freqs must be non-empty for HarmonicInjection");
}

namespace detail {

inline constexpr double kCarrierAmplitude = 1.0;

inline std::vector<double> synthesize_trace(const SyntheticConfig& c, TrojanState state,
                                            Rng& rng) {
  const double two_pi = 2.0 * std::numbers::pi;
  const bool triggered = state == TrojanState::Triggered;
  const double s = c.separability;
  const double unit = c.base_noise_sd > 0.0 ? c.base_noise_sd : 1.0;

  std::vector<double> phases;
  for (std::size_t j = 0; j < c.carrier_freqs.size(); ++j) phases.push_back(rng.uniform(0.0, two_pi));

  double noise_sd = c.base_noise_sd;
  if (triggered && c.effect == SyntheticEffect::VarianceInflation) noise_sd *= 1.0 + s;

  std::vector<double> x(c.trace_len);
  for (std::size_t n = 0; n < c.trace_len; ++n) {
    double v = c.base_mean;
    for (std::size_t j = 0; j < c.carrier_freqs.size(); ++j)
      v += kCarrierAmplitude * std::sin(two_pi * c.carrier_freqs[j] * static_cast<double>(n) + phases[j]);
    v += noise_sd * rng.normal();
    x[n] = v;
  }
  if (!triggered) return x;

  switch (c.effect) {
    case SyntheticEffect::SpikeTrain: {
      const std::size_t pulses = std::max<std::size_t>(1, c.trace_len / 32);
      for (std::size_t p = 0; p < pulses; ++p) x[rng.below(c.trace_len)] += 6.0 * s * unit;
      break;
    }
    case SyntheticEffect::HarmonicInjection: {
      const double f = 2.0 * c.carrier_freqs.front();
      const double phase = rng.uniform(0.0, two_pi);
      for (std::size_t n = 0; n < c.trace_len; ++n)
        x[n] += s * kCarrierAmplitude * std::sin(two_pi * f * static_cast<double>(n) + phase);
      break;
    }
    case SyntheticEffect::VarianceInflation:
      break;
    case SyntheticEffect::DutyDrain: {
      const std::size_t period = std::max<std::size_t>(8, c.trace_len / 4);
      const std::size_t offset = rng.below(period);
      for (std::size_t n = 0; n < c.trace_len; ++n)
        if ((n + offset) % period < period / 2) x[n] += 2.0 * s * unit;
      break;
    }
  }
  return x;
}

}  // namespace detail

/// n_per_class Disabled traces followed by n_per_class Triggered traces.
/// Every trace draws from its own stream derived from (seed, state, index).
inline Dataset generate_synthetic(const SyntheticConfig& config) {
  validate(config);
  Dataset ds;
  ds.traces.reserve(2 * config.n_per_class);
  for (auto state : {TrojanState::Disabled, TrojanState::Triggered}) {
    const std::uint64_t class_seed = derive_seed(config.seed, to_string(state));
    for (std::size_t i = 0; i < config.n_per_class; ++i) {
      Rng rng(derive_seed(class_seed, static_cast<std::uint64_t>(i)));
      PowerTrace t;
      t.samples = detail::synthesize_trace(config, state, rng);
      t.trojan_id = config.trojan_id;
      t.state = state;
      t.source = TraceSource::Synthetic;
      ds.traces.push_back(std::move(t));
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;

  bool operator==(const SplitSpec&) const = default;
};

inline void validate(const SplitSpec& s, std::string_view where = "split") {
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
    throw ConfigError(std::string(where) + ".train_fraction must lie in (0, 1)");
}

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;  // positions in the source dataset
  std::vector<std::size_t> test_indices;
};

inline SplitResult split(const Dataset& ds, const SplitSpec& spec) {
  validate(spec);
  if (ds.empty()) throw EmptyDatasetError("cannot split an empty dataset");
  Rng rng(spec.seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;

  auto take = [&](std::vector<std::size_t> idx) {
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(idx.size())));
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  };

  if (spec.stratified) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < ds.size(); ++i)
      (ds.traces[i].state == TrojanState::Triggered ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
      throw StratificationError("stratified split needs both trojan states; got " +
                                std::to_string(neg.size()) + " disabled and " +
                                std::to_string(pos.size()) + " triggered traces");
    take(std::move(neg));
    take(std::move(pos));
    rng.shuffle(std::span<std::size_t>(train_idx));
    rng.shuffle(std::span<std::size_t>(test_idx));
  } else {
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    take(std::move(all));
  }

  SplitResult out;
  out.train.traces.reserve(train_idx.size());
  out.test.traces.reserve(test_idx.size());
  for (auto i : train_idx) out.train.traces.push_back(ds.traces[i]);
  for (auto i : test_idx) out.test.traces.push_back(ds.traces[i]);
  out.train_indices = std::move(train_idx);
  out.test_indices = std::move(test_idx);
  return out;
}

// ---------------------------------------------------------------------------
// JSON mirrors of the configs (field names match the structs)
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, std::string_view where, const char* name, T& out) {
  if (!j.contains(name)) return;
  try {
    out = j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + "." + name + ": wrong type");
  }
}

}  // namespace detail

inline SyntheticConfig synthetic_config_from_json(const nlohmann::json& j,
                                                  std::string_view where = "synthetic") {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  SyntheticConfig c;
  detail::read_field(j, where, "trojan_id", c.trojan_id);
  detail::read_field(j, where, "n_per_class", c.n_per_class);
  detail::read_field(j, where, "trace_len", c.trace_len);
  detail::read_field(j, where, "base_mean", c.base_mean);
  detail::read_field(j, where, "base_noise_sd", c.base_noise_sd);
  detail::read_field(j, where, "carrier_freqs", c.carrier_freqs);
  detail::read_field(j, where, "separability", c.separability);
  detail::read_field(j, where, "seed", c.seed);
  if (j.contains("effect")) {
    std::string name;
    detail::read_field(j, where, "effect", name);
    try {
      c.effect = synthetic_effect_from_string(name);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(where) + ".effect: " + e.what());
    }
  }
  validate(c, where);
  return c;
}

inline nlohmann::json to_json(const SyntheticConfig& c) {
  return {{"trojan_id", c.trojan_id},         {"n_per_class", c.n_per_class},
          {"trace_len", c.trace_len},         {"base_mean", c.base_mean},
          {"base_noise_sd", c.base_noise_sd}, {"carrier_freqs", c.carrier_freqs},
          {"separability", c.separability},   {"effect", std::string(to_string(c.effect))},
          {"seed", c.seed}};
}

inline SplitSpec split_spec_from_json(const nlohmann::json& j, std::string_view where = "split") {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  SplitSpec s;
  detail::read_field(j, where, "train_fraction", s.train_fraction);
  detail::read_field(j, where, "seed", s.seed);
  detail::read_field(j, where, "stratified", s.stratified);
  validate(s, where);
  return s;
}

inline nlohmann::json to_json(const SplitSpec& s) {
  return {{"train_fraction", s.train_fraction}, {"seed", s.seed}, {"stratified", s.stratified}};
}

}  // namespace htdetect
