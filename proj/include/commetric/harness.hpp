#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "commetric/belonging.hpp"
#include "commetric/cover.hpp"
#include "commetric/detector.hpp"
#include "commetric/errors.hpp"
#include "commetric/graph.hpp"
#include "commetric/metrics.hpp"

namespace commetric {

// ---------------------------------------------------------------------------
// Configuration

enum class Scheme { count, strength };
enum class OutputFormat { csv, tsv, markdown };

inline std::string_view scheme_name(Scheme s) { return s == Scheme::count ? "count" : "strength"; }

inline Scheme parse_scheme(std::string_view s) {
  if (s == "count") return Scheme::count;
  if (s == "strength") return Scheme::strength;
  throw ArgumentError("unknown coefficient scheme '" + std::string(s) + "' (expected count or strength)");
}

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "tsv") return OutputFormat::tsv;
  if (s == "markdown") return OutputFormat::markdown;
  throw ArgumentError("unknown output format '" + std::string(s) + "' (expected csv, tsv or markdown)");
}

inline FuzzyCover to_fuzzy(const CrispCover& cc, const Graph& g, Scheme scheme,
                           Diagnostics* diag = nullptr) {
  return scheme == Scheme::count ? crisp_to_fuzzy_count(cc) : crisp_to_fuzzy_strength(cc, g, diag);
}

inline std::vector<double> default_thresholds() {
  return {0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
}

/// Precision value meaning "shortest representation that round-trips".
inline constexpr int full_precision = -1;

struct ExperimentConfig {
  std::filesystem::path graph;

  /// Directory laid out as `<dir>/r<threshold>/sample<k>.cover`, k = 1..samples.
  /// When unset, covers come from the bundled detector, one per seed.
  std::optional<std::filesystem::path> cover_dir;
  std::size_t samples = 10;
  std::size_t iterations = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  std::vector<double> thresholds = default_thresholds();
  Scheme scheme = Scheme::count;
  BelongingFunction function = BelongingFunction::product();
  double logistic_p = BelongingFunction::default_steepness;
  std::vector<Metric> metrics{experiment_metrics.begin(), experiment_metrics.end()};
  OutputFormat format = OutputFormat::csv;
  int precision = 4;
  bool per_sample = false;
  std::size_t threads = 1;

  std::size_t sample_count() const { return cover_dir ? samples : seeds.size(); }

  void validate() const {
    if (thresholds.empty()) throw ArgumentError("at least one threshold is required");
    if (sample_count() == 0) throw ArgumentError("at least one sample per threshold is required");
    if (precision != full_precision && precision < 1) throw ArgumentError("precision must be at least 1");
    if (metrics.empty()) throw ArgumentError("no metrics selected");
    if (function.kind == BelongingKind::logistic) {
      throw ArgumentError("belonging function must be average or product");
    }
    if (!(logistic_p > 0.0)) throw ArgumentError("logistic_p must be positive");
    for (Metric m : metrics) {
      if (std::find(experiment_metrics.begin(), experiment_metrics.end(), m) == experiment_metrics.end()) {
        throw ArgumentError("metric '" + std::string(metric_name(m)) +
                            "' is not available in experiments");
      }
    }
    for (double r : thresholds) {
      if (!(r > 0.0 && r <= 1.0)) throw ArgumentError("threshold " + detail::format_real(r) + " is out of range");
      if (!cover_dir && r > 0.5) {
        throw ArgumentError("detector threshold " + detail::format_real(r) + " exceeds 0.5");
      }
    }
  }
};

namespace detail {

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto t : split_ws(s)) {
    std::size_t start = 0;
    while (start <= t.size()) {
      const auto comma = t.find(',', start);
      const auto piece = t.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                         : comma - start);
      if (!piece.empty()) out.push_back(piece);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

template <class Int>
Int parse_integer(std::string_view text, std::size_t lineno) {
  Int value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(lineno, "invalid integer '" + std::string(text) + "'");
  }
  return value;
}

inline bool parse_bool(std::string_view text, std::size_t lineno) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ParseError(lineno, "invalid boolean '" + std::string(text) + "'");
}

}  // namespace detail

/// Flat `key = value` configuration; '#' starts a comment line. Relative
/// paths resolve against `base_dir`.
///
///     graph = karate.edges
///     covers = covers/            # or: iterations = 100 / seeds = 1,2,3
///     samples = 10
///     thresholds = 0.01, 0.05, 0.1
///     scheme = count              # count | strength
///     function = product          # average | product
///     logistic_p = 30
///     metrics = qov, qds_ov, conductance
///     format = csv                # csv | tsv | markdown
///     precision = 4               # or: full
///     per_sample = false
///     threads = 4
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  bool saw_graph = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    const auto key = detail::trim(std::string_view(line).substr(0, eq));
    auto value = std::string_view(line).substr(eq + 1);
    if (const auto hash = value.find('#'); hash != std::string_view::npos) value = value.substr(0, hash);
    value = detail::trim(value);
    if (value.empty()) throw ParseError(lineno, "missing value for '" + std::string(key) + "'");

    try {
      if (key == "graph") {
        cfg.graph = base_dir / std::filesystem::path(std::string(value));
        saw_graph = true;
      } else if (key == "covers") {
        cfg.cover_dir = base_dir / std::filesystem::path(std::string(value));
      } else if (key == "samples") {
        cfg.samples = detail::parse_integer<std::size_t>(value, lineno);
      } else if (key == "iterations") {
        cfg.iterations = detail::parse_integer<std::size_t>(value, lineno);
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (auto t : detail::split_list(value)) cfg.seeds.push_back(detail::parse_integer<std::uint64_t>(t, lineno));
      } else if (key == "thresholds") {
        cfg.thresholds.clear();
        for (auto t : detail::split_list(value)) cfg.thresholds.push_back(detail::parse_real(t, lineno));
      } else if (key == "scheme") {
        cfg.scheme = parse_scheme(value);
      } else if (key == "function") {
        cfg.function = parse_belonging_function(value);
      } else if (key == "logistic_p") {
        cfg.logistic_p = detail::parse_real(value, lineno);
      } else if (key == "metrics") {
        cfg.metrics.clear();
        for (auto t : detail::split_list(value)) cfg.metrics.push_back(parse_metric(t));
      } else if (key == "format") {
        cfg.format = parse_format(value);
      } else if (key == "precision") {
        cfg.precision = value == "full" ? full_precision : detail::parse_integer<int>(value, lineno);
      } else if (key == "per_sample") {
        cfg.per_sample = detail::parse_bool(value, lineno);
      } else if (key == "threads") {
        cfg.threads = detail::parse_integer<std::size_t>(value, lineno);
      } else {
        throw ParseError(lineno, "unknown key '" + std::string(key) + "'");
      }
    } catch (const ArgumentError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!saw_graph) throw InputError("configuration does not name a graph");
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  try {
    return parse_config(in, path.parent_path());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Experiment table

struct ExperimentTable {
  std::vector<double> thresholds;
  std::vector<Metric> metrics;
  std::vector<std::vector<double>> values;                ///< [row][column], sample mean
  std::vector<std::vector<std::vector<double>>> samples;  ///< [row][column][sample]; may be empty
  std::vector<std::optional<std::size_t>> best;           ///< per row, set by mark_best

  std::size_t rows() const { return metrics.size(); }
  std::size_t columns() const { return thresholds.size(); }
};

/// Marks the best column of every row: the maximum for metrics that improve
/// upwards, the minimum for inter-edges, expansion and conductance. Ties go
/// to the lowest column.
inline ExperimentTable mark_best(ExperimentTable table) {
  if (table.rows() == 0 || table.columns() == 0) throw ArgumentError("cannot mark an empty table");
  table.best.assign(table.rows(), std::nullopt);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto& row = table.values[r];
    const bool up = larger_is_better(table.metrics[r]);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (up ? row[c] > row[best] : row[c] < row[best]) best = c;
    }
    table.best[r] = best;
  }
  return table;
}

/// Cover file for one (threshold, sample) pair; samples count from 1.
inline std::filesystem::path cover_path(const std::filesystem::path& dir, double threshold,
                                        std::size_t sample) {
  return dir / ("r" + detail::format_real(threshold)) / ("sample" + std::to_string(sample) + ".cover");
}

/// Evaluates every selected metric on every (threshold, sample) cover and
/// averages over samples. Work items may run on several threads; the table
/// is assembled in (threshold, sample) order either way.
inline ExperimentTable run_experiment(const ExperimentConfig& cfg, Diagnostics* diag = nullptr) {
  cfg.validate();
  const auto parsed = load_edge_list(cfg.graph);
  if (parsed.duplicate_edges > 0) {
    warn(diag, std::to_string(parsed.duplicate_edges) + " duplicate edges collapsed in " + cfg.graph.string());
  }
  const auto& g = parsed.graph;
  const std::size_t cols = cfg.thresholds.size();
  const std::size_t per = cfg.sample_count();

  if (cfg.cover_dir) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t s = 1; s <= per; ++s) {
        const auto path = cover_path(*cfg.cover_dir, cfg.thresholds[c], s);
        if (!std::filesystem::exists(path)) {
          throw InputError("missing cover for threshold " + detail::format_real(cfg.thresholds[c]) +
                           ", sample " + std::to_string(s) + " (" + path.string() + ")");
        }
      }
    }
  }

  std::vector<QualityReport> reports(cols * per);
  std::vector<Diagnostics> notes(cols * per);
  auto evaluate = [&](std::size_t item) {
    const std::size_t c = item / per;
    const std::size_t s = item % per;
    const double r = cfg.thresholds[c];
    const CrispCover cc = cfg.cover_dir ? load_crisp_cover(cover_path(*cfg.cover_dir, r, s + 1), parsed.labels)
                                        : lpa_detect(g, cfg.iterations, r, cfg.seeds[s]);
    const auto fc = to_fuzzy(cc, g, cfg.scheme, &notes[item]);
    reports[item] = community_report(g, fc, cfg.function,
                                     {cfg.logistic_p, std::string(scheme_name(cfg.scheme)), r}, &notes[item]);
  };

  const std::size_t items = reports.size();
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, items));
  if (workers == 1) {
    for (std::size_t item = 0; item < items; ++item) evaluate(item);
  } else {
    std::size_t next = 0;
    std::mutex lock;
    std::exception_ptr failure;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (;;) {
            std::size_t item;
            {
              std::lock_guard guard(lock);
              if (failure || next == items) return;
              item = next++;
            }
            try {
              evaluate(item);
            } catch (...) {
              std::lock_guard guard(lock);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  if (diag) {
    for (auto& n : notes) {
      for (auto& w : n.warnings) diag->warn(std::move(w));
    }
  }

  ExperimentTable table;
  table.thresholds = cfg.thresholds;
  for (Metric m : experiment_metrics) {
    if (std::find(cfg.metrics.begin(), cfg.metrics.end(), m) != cfg.metrics.end()) table.metrics.push_back(m);
  }
  for (Metric m : table.metrics) {
    auto& row = table.values.emplace_back(cols, 0.0);
    auto& raw = table.samples.emplace_back(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t s = 0; s < per; ++s) raw[c].push_back(reports[c * per + s].value(m));
      double sum = 0.0;
      for (double v : raw[c]) sum += v;
      row[c] = sum / static_cast<double>(per);
    }
  }
  return mark_best(std::move(table));
}

// ---------------------------------------------------------------------------
// Table output

namespace detail {

inline std::string format_fixed(double value, int precision) {
  if (precision == full_precision) return format_real(value);
  char buf[128];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, precision);
  if (ec != std::errc()) return format_real(value);
  std::string s(buf, ptr);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

inline std::string column_label(double threshold) { return "r_" + format_real(threshold); }

}  // namespace detail

/// CSV/TSV: header `metric,r_<t>,...` then one row per metric. With
/// `per_sample`, columns `r_<t>_s<k>` follow the means. Markdown marks the
/// best value of each row as bold italics.
inline void write_table(std::ostream& out, const ExperimentTable& table, OutputFormat format,
                        int precision = 4, bool per_sample = false) {
  const bool samples = per_sample && !table.samples.empty();
  if (format == OutputFormat::markdown) {
    out << "| metric |";
    for (double r : table.thresholds) out << " r=" << detail::format_real(r) << " |";
    out << "\n|---|";
    for (std::size_t c = 0; c < table.columns(); ++c) out << "---:|";
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
      out << "| " << metric_name(table.metrics[r]) << " |";
      for (std::size_t c = 0; c < table.columns(); ++c) {
        const auto text = detail::format_fixed(table.values[r][c], precision);
        const bool best = r < table.best.size() && table.best[r] == c;
        out << ' ' << (best ? "***" + text + "***" : text) << " |";
      }
      out << '\n';
    }
    return;
  }
  const char sep = format == OutputFormat::csv ? ',' : '\t';
  out << "metric";
  for (double r : table.thresholds) out << sep << detail::column_label(r);
  if (samples) {
    for (std::size_t c = 0; c < table.columns(); ++c) {
      for (std::size_t s = 0; s < table.samples[0][c].size(); ++s) {
        out << sep << detail::column_label(table.thresholds[c]) << "_s" << s + 1;
      }
    }
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << metric_name(table.metrics[r]);
    for (double v : table.values[r]) out << sep << detail::format_fixed(v, precision);
    if (samples) {
      for (const auto& col : table.samples[r]) {
        for (double v : col) out << sep << detail::format_fixed(v, precision);
      }
    }
    out << '\n';
  }
}

/// Reads the mean columns of a CSV or TSV table written by write_table.
/// Per-sample columns are read back into `samples` when present.
inline ExperimentTable parse_table(std::istream& in, char sep = ',') {
  ExperimentTable table;
  std::string line;
  std::size_t lineno = 0;
  auto split = [sep](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, sep)) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw InputError("empty table");
  ++lineno;
  const auto header = split(line);
  if (header.empty() || header[0] != "metric") throw ParseError(lineno, "header must start with 'metric'");
  // column index -> (threshold column, sample index or none)
  std::vector<std::pair<std::size_t, std::optional<std::size_t>>> layout;
  for (std::size_t k = 1; k < header.size(); ++k) {
    std::string_view h = header[k];
    if (!h.starts_with("r_")) throw ParseError(lineno, "unexpected column '" + header[k] + "'");
    h.remove_prefix(2);
    const auto us = h.find("_s");
    if (us == std::string_view::npos) {
      table.thresholds.push_back(detail::parse_real(h, lineno));
      layout.emplace_back(table.thresholds.size() - 1, std::nullopt);
    } else {
      const double r = detail::parse_real(h.substr(0, us), lineno);
      const auto pos = std::find(table.thresholds.begin(), table.thresholds.end(), r);
      if (pos == table.thresholds.end()) throw ParseError(lineno, "sample column for unknown threshold");
      layout.emplace_back(static_cast<std::size_t>(pos - table.thresholds.begin()),
                          detail::parse_integer<std::size_t>(h.substr(us + 2), lineno) - 1);
    }
  }
  const bool has_samples = std::any_of(layout.begin(), layout.end(), [](const auto& l) { return l.second.has_value(); });
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ParseError(lineno, "wrong number of cells");
    table.metrics.push_back(parse_metric(cells[0]));
    auto& row = table.values.emplace_back(table.thresholds.size(), 0.0);
    if (has_samples) table.samples.emplace_back(table.thresholds.size());
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const double v = detail::parse_real(cells[k], lineno);
      const auto [col, sample] = layout[k - 1];
      if (!sample) {
        row[col] = v;
      } else {
        auto& bucket = table.samples.back()[col];
        if (bucket.size() <= *sample) bucket.resize(*sample + 1, 0.0);
        bucket[*sample] = v;
      }
    }
  }
  return table;
}

}  // namespace commetric
