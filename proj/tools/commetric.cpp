// commetric: community quality metrics from the command line.
//
// Exit codes: 0 success, 1 input error, 2 undefined metric.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commetric/commetric.hpp"

namespace cm = commetric;

namespace {

constexpr int exit_input_error = 1;
constexpr int exit_undefined_metric = 2;

void print_warnings(const cm::Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
}

/// Writes to `path`, or to stdout when it is empty.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw cm::InputError("cannot write '" + path + "'");
  write(out);
}

/// Labels in order of first appearance in a cover file, for conversions that
/// run without a graph. Fuzzy entries contribute the part before the last ':'.
cm::NodeLabels labels_from_cover(const std::string& path, bool fuzzy) {
  auto in = cm::detail::open_input(path);
  cm::NodeLabels labels;
  std::string line;
  while (std::getline(in, line)) {
    for (auto t : cm::detail::split_ws(line)) {
      if (fuzzy) {
        const auto colon = t.rfind(':');
        if (colon != std::string_view::npos) t = t.substr(0, colon);
      }
      labels.intern(t);
    }
  }
  return labels;
}

struct MetricsArgs {
  std::string graph;
  std::string cover;
  bool fuzzy = false;
  std::string scheme = "count";
  std::string function = "product";
  double logistic_p = cm::BelongingFunction::default_steepness;
  std::vector<std::string> metrics;
  std::string format = "csv";
  int precision = cm::full_precision;
  bool allow_orphans = false;
  bool per_community = false;
};

int run_metrics(const MetricsArgs& a) {
  cm::Diagnostics diag;
  const auto parsed = cm::load_edge_list(a.graph);
  if (parsed.duplicate_edges) diag.warn(std::to_string(parsed.duplicate_edges) + " duplicate edges collapsed");
  const auto& g = parsed.graph;
  const auto policy = a.allow_orphans ? cm::OrphanPolicy::singleton : cm::OrphanPolicy::reject;
  const auto f = cm::parse_belonging_function(a.function);
  const auto scheme = cm::parse_scheme(a.scheme);
  const auto format = cm::parse_format(a.format);

  std::optional<cm::CrispCover> crisp;
  cm::FuzzyCover fuzzy;
  if (a.fuzzy) {
    fuzzy = cm::load_fuzzy_cover(a.cover, parsed.labels);
  } else {
    crisp = cm::load_crisp_cover(a.cover, parsed.labels, policy);
    fuzzy = cm::to_fuzzy(*crisp, g, scheme, &diag);
  }

  std::vector<cm::Metric> wanted;
  if (a.metrics.empty()) {
    const bool partition = crisp ? crisp->is_partition() : fuzzy.is_partition();
    for (cm::Metric m : cm::all_metrics) {
      if (!partition && (m == cm::Metric::modularity || m == cm::Metric::qds)) continue;
      wanted.push_back(m);
    }
  } else {
    for (const auto& name : a.metrics) wanted.push_back(cm::parse_metric(name));
  }

  const auto report = cm::community_report(g, fuzzy, f, {a.logistic_p, a.fuzzy ? "given" : a.scheme, std::nullopt}, &diag);
  auto partition_cover = [&]() -> cm::CrispCover {
    if (crisp) return *crisp;
    if (!fuzzy.is_partition()) throw cm::ArgumentError("cover has overlapping communities; use qov / qds_ov");
    return cm::fuzzy_to_crisp(fuzzy, 0.0);
  };

  std::vector<std::pair<std::string, double>> rows;
  for (cm::Metric m : wanted) {
    double v = 0.0;
    switch (m) {
      case cm::Metric::modularity: v = cm::modularity(g, partition_cover()); break;
      case cm::Metric::qds: v = cm::qds(g, partition_cover()); break;
      case cm::Metric::qov_prime: v = cm::qov_prime(g, fuzzy, f); break;
      case cm::Metric::qov_zhang: v = cm::qov_zhang(g, fuzzy); break;
      default: v = report.value(m); break;
    }
    rows.emplace_back(std::string(cm::metric_name(m)), v);
  }

  print_warnings(diag);
  const char sep = format == cm::OutputFormat::tsv ? '\t' : ',';
  if (format == cm::OutputFormat::markdown) {
    std::cout << "| metric | value |\n|---|---:|\n";
    for (const auto& [name, v] : rows) std::cout << "| " << name << " | " << cm::detail::format_fixed(v, a.precision) << " |\n";
  } else {
    std::cout << "metric" << sep << "value\n";
    for (const auto& [name, v] : rows) std::cout << name << sep << cm::detail::format_fixed(v, a.precision) << '\n';
  }
  if (a.per_community) {
    std::cout << '\n'
              << "community" << sep << "size" << sep << "intra_edges" << sep << "intra_density" << sep
              << "contraction" << sep << "inter_edges" << sep << "expansion" << sep << "conductance\n";
    for (const auto& c : report.communities) {
      std::cout << c.community;
      for (double v : {c.size, c.intra_edges, c.intra_density, c.contraction, c.inter_edges, c.expansion, c.conductance}) {
        std::cout << sep << cm::detail::format_fixed(v, a.precision);
      }
      std::cout << '\n';
    }
  }
  return 0;
}

struct ConvertArgs {
  std::string cover;
  std::string graph;
  std::string to;
  std::string scheme = "count";
  double threshold = 0.0;
  bool allow_orphans = false;
  std::string output;
};

int run_convert(const ConvertArgs& a) {
  cm::Diagnostics diag;
  const bool to_fuzzy = a.to == "fuzzy";
  const auto scheme = cm::parse_scheme(a.scheme);
  std::optional<cm::ParsedGraph> parsed;
  if (!a.graph.empty()) parsed = cm::load_edge_list(a.graph);
  if (to_fuzzy && scheme == cm::Scheme::strength && !parsed) {
    throw cm::ArgumentError("--scheme strength needs --graph");
  }
  const cm::NodeLabels labels = parsed ? parsed->labels : labels_from_cover(a.cover, !to_fuzzy);

  if (to_fuzzy) {
    const auto policy = a.allow_orphans ? cm::OrphanPolicy::singleton : cm::OrphanPolicy::reject;
    const auto cc = cm::load_crisp_cover(a.cover, labels, policy);
    const auto fc = scheme == cm::Scheme::count ? cm::crisp_to_fuzzy_count(cc)
                                                : cm::crisp_to_fuzzy_strength(cc, parsed->graph, &diag);
    print_warnings(diag);
    emit(a.output, [&](std::ostream& out) { cm::write_fuzzy_cover(out, fc, labels); });
  } else {
    const auto fc = cm::load_fuzzy_cover(a.cover, labels);
    const auto cc = cm::fuzzy_to_crisp(fc, a.threshold);
    emit(a.output, [&](std::ostream& out) { cm::write_crisp_cover(out, cc, labels); });
  }
  return 0;
}

int run_experiment_cmd(const std::string& config_path, const std::string& output) {
  cm::Diagnostics diag;
  const auto cfg = cm::load_config(config_path);
  const auto table = cm::run_experiment(cfg, &diag);
  print_warnings(diag);
  emit(output, [&](std::ostream& out) { cm::write_table(out, table, cfg.format, cfg.precision, cfg.per_sample); });
  return 0;
}

struct DetectArgs {
  std::string graph;
  std::size_t iterations = 100;
  double r = 0.5;
  std::uint64_t seed = 1;
  std::string output;
};

int run_detect(const DetectArgs& a) {
  const auto parsed = cm::load_edge_list(a.graph);
  const auto cc = cm::lpa_detect(parsed.graph, a.iterations, a.r, a.seed);
  emit(a.output, [&](std::ostream& out) { cm::write_crisp_cover(out, cc, parsed.labels); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community quality metrics for disjoint and overlapping covers"};
  app.require_subcommand(1);

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "Evaluate quality metrics of one cover");
  metrics->add_option("--graph", ma.graph, "Edge-list file")->required();
  metrics->add_option("--cover", ma.cover, "Cover file")->required();
  metrics->add_flag("--fuzzy", ma.fuzzy, "Cover file holds label:coefficient entries");
  metrics->add_option("--scheme", ma.scheme, "Crisp-to-fuzzy coefficient scheme")->check(CLI::IsMember({"count", "strength"}));
  metrics->add_option("--function", ma.function, "Belonging function")->check(CLI::IsMember({"average", "product"}));
  metrics->add_option("--logistic-p", ma.logistic_p, "Logistic steepness for qov_edge");
  metrics->add_option("--metric", ma.metrics, "Metric to report (repeatable)");
  metrics->add_option("--format", ma.format)->check(CLI::IsMember({"csv", "tsv", "markdown"}));
  metrics->add_option("--precision", ma.precision, "Decimal places (default: shortest round-trip)");
  metrics->add_flag("--allow-orphans", ma.allow_orphans, "Put uncovered nodes in singleton communities");
  metrics->add_flag("--per-community", ma.per_community, "Also print the per-community metrics");

  ConvertArgs ca;
  auto* convert = app.add_subcommand("convert", "Convert between crisp and fuzzy covers");
  convert->add_option("--cover", ca.cover, "Input cover file")->required();
  convert->add_option("--to", ca.to, "Target representation")->required()->check(CLI::IsMember({"fuzzy", "crisp"}));
  convert->add_option("--graph", ca.graph, "Edge-list file (required for --scheme strength)");
  convert->add_option("--scheme", ca.scheme)->check(CLI::IsMember({"count", "strength"}));
  convert->add_option("--threshold", ca.threshold, "Keep memberships with coefficient above this value");
  convert->add_flag("--allow-orphans", ca.allow_orphans);
  convert->add_option("-o,--output", ca.output, "Output file (default stdout)");

  std::string config_path, experiment_output;
  auto* experiment = app.add_subcommand("run-experiment", "Threshold sweep averaged over sample covers");
  experiment->add_option("--config", config_path, "key = value configuration file")->required();
  experiment->add_option("-o,--output", experiment_output, "Output file (default stdout)");

  DetectArgs da;
  auto* detect = app.add_subcommand("detect", "Seeded overlapping label propagation");
  detect->add_option("--graph", da.graph, "Edge-list file")->required();
  detect->add_option("--iterations", da.iterations, "Propagation iterations");
  detect->add_option("--r", da.r, "Post-processing threshold in (0, 0.5]");
  detect->add_option("--seed", da.seed, "RNG seed");
  detect->add_option("-o,--output", da.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_input_error;
  }

  try {
    if (*metrics) return run_metrics(ma);
    if (*convert) return run_convert(ca);
    if (*experiment) return run_experiment_cmd(config_path, experiment_output);
    if (*detect) return run_detect(da);
  } catch (const cm::UndefinedMetricError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_undefined_metric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_input_error;
  }
  return 0;
}
