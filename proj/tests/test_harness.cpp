#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "support.hpp"

namespace cm = commetric;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("commetric-harness-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  void write(const fs::path& rel, const std::string& text) const {
    fs::create_directories((path_ / rel).parent_path());
    std::ofstream(path_ / rel) << text;
  }

 private:
  fs::path path_;
};

cm::ExperimentConfig parse(const std::string& text, const fs::path& base = {}) {
  std::istringstream in(text);
  return cm::parse_config(in, base);
}

std::size_t row_of(const cm::ExperimentTable& t, cm::Metric m) {
  return static_cast<std::size_t>(std::find(t.metrics.begin(), t.metrics.end(), m) - t.metrics.begin());
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse("graph = g.edges\n");
  EXPECT_EQ(cfg.graph, fs::path("g.edges"));
  EXPECT_FALSE(cfg.cover_dir.has_value());
  EXPECT_EQ(cfg.thresholds.size(), 11u);
  EXPECT_EQ(cfg.thresholds.front(), 0.01);
  EXPECT_EQ(cfg.thresholds.back(), 0.5);
  EXPECT_EQ(cfg.sample_count(), 10u);
  EXPECT_EQ(cfg.precision, 4);
  EXPECT_EQ(cfg.metrics.size(), 9u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, AllKeys) {
  const auto cfg = parse(
      "# experiment\n"
      "graph = net.txt\n"
      "covers = runs   # sample covers\n"
      "samples = 3\n"
      "iterations = 50\n"
      "seeds = 4, 5\n"
      "thresholds = 0.1 0.2,0.3\n"
      "scheme = strength\n"
      "function = average\n"
      "logistic_p = 12.5\n"
      "metrics = conductance, qov\n"
      "format = markdown\n"
      "precision = full\n"
      "per_sample = true\n"
      "threads = 3\n",
      "/base");
  EXPECT_EQ(cfg.graph, fs::path("/base/net.txt"));
  EXPECT_EQ(cfg.cover_dir, fs::path("/base/runs"));
  EXPECT_EQ(cfg.samples, 3u);
  EXPECT_EQ(cfg.iterations, 50u);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(cfg.thresholds, (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(cfg.scheme, cm::Scheme::strength);
  EXPECT_EQ(cfg.function, cm::BelongingFunction::average());
  EXPECT_EQ(cfg.logistic_p, 12.5);
  EXPECT_EQ(cfg.metrics, (std::vector<cm::Metric>{cm::Metric::conductance, cm::Metric::qov}));
  EXPECT_EQ(cfg.format, cm::OutputFormat::markdown);
  EXPECT_EQ(cfg.precision, cm::full_precision);
  EXPECT_TRUE(cfg.per_sample);
  EXPECT_EQ(cfg.threads, 3u);
  EXPECT_EQ(cfg.sample_count(), 3u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("samples = 3\n"), cm::InputError);
  EXPECT_THROW(parse("graph = g\nbogus = 1\n"), cm::ParseError);
  EXPECT_THROW(parse("graph = g\nsamples = three\n"), cm::ParseError);
  EXPECT_THROW(parse("graph = g\nfunction = max\n"), cm::ParseError);
  EXPECT_THROW(parse("graph\n"), cm::ParseError);
  EXPECT_THROW(parse("graph = g\nprecision = 0\n").validate(), cm::ArgumentError);
  EXPECT_THROW(parse("graph = g\nmetrics = modularity\n").validate(), cm::ArgumentError);
  EXPECT_THROW(parse("graph = g\nthresholds = 0.7\n").validate(), cm::ArgumentError);
  EXPECT_NO_THROW(parse("graph = g\ncovers = d\nthresholds = 0.7\n").validate());
  EXPECT_THROW(parse("graph = g\ncovers = d\nsamples = 0\n").validate(), cm::ArgumentError);
}

TEST(CoverPath, Layout) {
  EXPECT_EQ(cm::cover_path("d", 0.5, 1), fs::path("d/r0.5/sample1.cover"));
  EXPECT_EQ(cm::cover_path("d", 0.05, 10), fs::path("d/r0.05/sample10.cover"));
}

TEST(RunExperiment, TriangleSingleCommunity) {
  TempDir dir;
  dir.write("g.edges", "0 1\n1 2\n0 2\n");
  dir.write("covers/r0.5/sample1.cover", "0 1 2\n");
  cm::ExperimentConfig cfg;
  cfg.graph = dir.path() / "g.edges";
  cfg.cover_dir = dir.path() / "covers";
  cfg.samples = 1;
  cfg.thresholds = {0.5};
  const auto t = cm::run_experiment(cfg);
  EXPECT_EQ(t.columns(), 1u);
  EXPECT_EQ(t.rows(), 9u);
  EXPECT_EQ(t.metrics.front(), cm::Metric::qov);
  EXPECT_NEAR(t.values[0][0], 0.0, 1e-15);
}

TEST(RunExperiment, IdenticalSamplesAverageExactly) {
  TempDir dir;
  dir.write("g.edges", "0 1\n0 2\n1 2\n2 3\n2 4\n3 4\n");
  for (int s = 1; s <= 2; ++s) dir.write("c/r0.3/sample" + std::to_string(s) + ".cover", "0 1 2\n2 3 4\n");
  dir.write("single/r0.3/sample1.cover", "0 1 2\n2 3 4\n");
  cm::ExperimentConfig cfg;
  cfg.graph = dir.path() / "g.edges";
  cfg.cover_dir = dir.path() / "c";
  cfg.samples = 2;
  cfg.thresholds = {0.3};
  cfg.function = cm::BelongingFunction::average();
  const auto two = cm::run_experiment(cfg);
  cfg.cover_dir = dir.path() / "single";
  cfg.samples = 1;
  const auto one = cm::run_experiment(cfg);
  for (std::size_t r = 0; r < one.rows(); ++r) EXPECT_EQ(two.values[r][0], one.values[r][0]);
  EXPECT_EQ(two.samples[0][0].size(), 2u);
}

TEST(RunExperiment, MissingCoverNamesPair) {
  TempDir dir;
  dir.write("g.edges", "0 1\n1 2\n0 2\n");
  dir.write("c/r0.1/sample1.cover", "0 1 2\n");
  cm::ExperimentConfig cfg;
  cfg.graph = dir.path() / "g.edges";
  cfg.cover_dir = dir.path() / "c";
  cfg.samples = 2;
  cfg.thresholds = {0.1};
  try {
    cm::run_experiment(cfg);
    FAIL() << "expected InputError";
  } catch (const cm::InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("threshold 0.1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sample 2"), std::string::npos) << msg;
  }
}

TEST(RunExperiment, CoverErrorPropagates) {
  TempDir dir;
  dir.write("g.edges", "0 1\n1 2\n0 2\n");
  dir.write("c/r0.1/sample1.cover", "0 1\n");
  cm::ExperimentConfig cfg;
  cfg.graph = dir.path() / "g.edges";
  cfg.cover_dir = dir.path() / "c";
  cfg.samples = 1;
  cfg.thresholds = {0.1};
  EXPECT_THROW(cm::run_experiment(cfg), cm::InputError);
  cfg.threads = 4;
  EXPECT_THROW(cm::run_experiment(cfg), cm::InputError);
}

TEST(RunExperiment, DetectorColumnsMatchDirectEvaluation) {
  cm::ExperimentConfig cfg;
  cfg.graph = COMMETRIC_DATA_DIR "/karate.edges";
  cfg.seeds = {1, 2, 3};
  cfg.thresholds = {0.1, 0.5};
  const auto t = cm::run_experiment(cfg);
  ASSERT_EQ(t.columns(), 2u);
  const auto k = support::karate();
  double sum = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const auto fc = cm::crisp_to_fuzzy_count(cm::lpa_detect(k.graph, 100, 0.1, seed));
    sum += cm::qov(k.graph, fc, cm::BelongingFunction::product());
  }
  EXPECT_NEAR(t.values[row_of(t, cm::Metric::qov)][0], sum / 3.0, 1e-15);

  cfg.threads = 4;
  const auto parallel = cm::run_experiment(cfg);
  EXPECT_EQ(parallel.values, t.values);
  EXPECT_EQ(parallel.samples, t.samples);
}

TEST(MarkBest, Examples) {
  cm::ExperimentTable t;
  t.thresholds = {0.1, 0.2, 0.3};
  t.metrics = {cm::Metric::qov, cm::Metric::inter_edges};
  t.values = {{0.1, 0.3, 0.2}, {5, 3, 3}};
  const auto marked = cm::mark_best(t);
  EXPECT_EQ(marked.best[0], std::optional<std::size_t>(1));
  EXPECT_EQ(marked.best[1], std::optional<std::size_t>(1));
  EXPECT_THROW(cm::mark_best(cm::ExperimentTable{}), cm::ArgumentError);
}

TEST(MarkBest, ConductanceRowOfReferenceTable) {
  cm::ExperimentTable t;
  t.thresholds = cm::default_thresholds();
  t.metrics = {cm::Metric::conductance};
  t.values = {{0.333, 0.3206, 0.2842, 0.2682, 0.2677, 0.2628, 0.2523, 0.2704, 0.23, 0.2141, 0.2121}};
  const auto marked = cm::mark_best(t);
  EXPECT_EQ(t.thresholds[*marked.best[0]], 0.5);
}

TEST(WriteTable, CsvLayoutAndIdempotence) {
  cm::ExperimentTable t;
  t.thresholds = {0.01, 0.5};
  t.metrics = {cm::Metric::qov, cm::Metric::conductance};
  t.values = {{0.123456, -0.00001}, {1.0 / 3.0, 0.25}};
  t.samples = {{{0.1, 0.146912}, {-0.00001, -0.00001}}, {{1.0 / 3.0, 1.0 / 3.0}, {0.25, 0.25}}};
  std::ostringstream out;
  cm::write_table(out, t, cm::OutputFormat::csv, 4);
  EXPECT_EQ(out.str(), "metric,r_0.01,r_0.5\nqov,0.1235,0.0000\nconductance,0.3333,0.2500\n");

  std::ostringstream full;
  cm::write_table(full, t, cm::OutputFormat::csv, cm::full_precision, true);
  std::istringstream in(full.str());
  const auto back = cm::parse_table(in);
  EXPECT_EQ(back.thresholds, t.thresholds);
  EXPECT_EQ(back.metrics, t.metrics);
  EXPECT_EQ(back.values, t.values);
  EXPECT_EQ(back.samples, t.samples);
  std::ostringstream again;
  cm::write_table(again, back, cm::OutputFormat::csv, cm::full_precision, true);
  EXPECT_EQ(again.str(), full.str());
}

TEST(WriteTable, TsvAndMarkdown) {
  cm::ExperimentTable t;
  t.thresholds = {0.1, 0.2};
  t.metrics = {cm::Metric::expansion};
  t.values = {{0.5, 0.25}};
  t = cm::mark_best(t);
  std::ostringstream tsv;
  cm::write_table(tsv, t, cm::OutputFormat::tsv, 2);
  EXPECT_EQ(tsv.str(), "metric\tr_0.1\tr_0.2\nexpansion\t0.50\t0.25\n");
  std::ostringstream md;
  cm::write_table(md, t, cm::OutputFormat::markdown, 2);
  EXPECT_EQ(md.str(), "| metric | r=0.1 | r=0.2 |\n|---|---:|---:|\n| expansion | 0.50 | ***0.25*** |\n");
}
