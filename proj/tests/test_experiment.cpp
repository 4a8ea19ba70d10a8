#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "portsim/experiment.hpp"
#include "test_support.hpp"

using namespace portsim;
namespace fs = std::filesystem;

namespace {

const LabeledDataset& data() {
  static const LabeledDataset d = fixtures::small_dataset(4, 60);
  return d;
}

ExperimentGrid small_grid(std::vector<Condition> conds, std::vector<Algorithm> algos, std::vector<std::uint64_t> seeds) {
  ExperimentGrid g;
  g.conditions = std::move(conds);
  g.algorithms = std::move(algos);
  g.seeds = std::move(seeds);
  g.base.cycles = 6;
  g.eval_cycles = 3;
  g.base.hyper.als.factors = g.base.hyper.bpr.factors = 8;
  g.base.hyper.als.sweeps = 3;
  g.base.hyper.bpr.epochs = 3;
  return g;
}

// Hand-built trace: one consumer and one provider per group, fixed values.
SimulationTrace synthetic_trace(Condition c, Algorithm a, std::uint64_t seed, double niche_u, double generic_u,
                                std::uint64_t niche_clicks, std::size_t cycles = 6) {
  SimulationTrace t;
  t.config.condition = c;
  t.config.algorithm = a;
  t.config.seed = seed;
  t.config.cycles = static_cast<std::uint32_t>(cycles);
  t.dataset_digest = "d";
  t.consumer_ids = {"n", "g"};
  t.provider_ids = {"pn", "pg"};
  for (std::uint32_t k = 1; k <= cycles; ++k) {
    CycleTrace ct;
    ct.cycle = k;
    ct.consumers.push_back({0, Group::Niche, 0, niche_u, niche_u, 3, 0});
    ct.consumers.push_back({1, Group::Generic, 0, generic_u, generic_u, 3, 0});
    ct.providers.push_back({0, Group::Niche, niche_clicks});
    ct.providers.push_back({1, Group::Generic, 6 - niche_clicks});
    t.cycles.push_back(ct);
  }
  return t;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("portsim_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Grid, RunCounts) {
  EXPECT_EQ(small_grid({Condition::ColdStart}, {Algorithm::ALS}, {1, 2}).runs().size(), 4u);
  ExperimentGrid full;
  EXPECT_EQ(full.runs().size(), 75u);
}

TEST(Grid, ValidationErrors) {
  auto g = small_grid({Condition::ColdStart}, {Algorithm::ALS}, {1, 1});
  EXPECT_THROW(g.validate(), ConfigError);
  g = small_grid({Condition::ColdStart}, {Algorithm::ALS}, {1});
  g.eval_cycles = 7;
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Grid, ParseConfig) {
  std::size_t workers = 0;
  const auto g = parse_grid_config(
      nlohmann::json{{"conditions", {"baseline", "universal"}}, {"algorithms", {"als"}}, {"seeds", {3, 4}},
                     {"tau", 0.25}, {"workers", 3}, {"eval_cycles", 4}},
      &workers);
  EXPECT_EQ(g.conditions, (std::vector<Condition>{Condition::Universal}));
  EXPECT_EQ(g.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(g.base.utility.tau, 0.25);
  EXPECT_EQ(g.eval_cycles, 4u);
  EXPECT_EQ(workers, 3u);
  EXPECT_THROW(parse_grid_config(nlohmann::json{{"seed", 1}}), ConfigError);
  EXPECT_THROW(parse_grid_config(nlohmann::json{{"bogus", 1}}), ConfigError);
}

TEST(Grid, RerunGivesIdenticalDigestAcrossWorkers) {
  const auto g = small_grid({Condition::UserOwnership}, {Algorithm::ItemKNN, Algorithm::BPR}, {1, 2});
  const auto a = run_grid(data(), g, 1);
  const auto b = run_grid(data(), g, 3);
  EXPECT_EQ(a.traces.size(), 8u);
  EXPECT_EQ(a.result.digest(), b.result.digest());
}

TEST(Grid, FailingRunIsNamed) {
  const auto g = small_grid({Condition::ColdStart}, {Algorithm::ALS}, {1});
  try {
    run_grid(LabeledDataset{}, g, 1);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("baseline/als/seed 1"), std::string::npos) << msg;
  }
}

TEST(Aggregate, ConstantUtility) {
  std::vector<SimulationTrace> t{synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 2)};
  const auto r = aggregate(t, 5);
  EXPECT_DOUBLE_EQ(r.find(Condition::Baseline, Algorithm::ALS, Stakeholder::Consumer, Group::Niche)->mean, 0.3);
  EXPECT_DOUBLE_EQ(r.find(Condition::Baseline, Algorithm::ALS, Stakeholder::Provider, Group::Niche)->mean, 2.0);
}

TEST(Aggregate, CrossSeedMean) {
  std::vector<SimulationTrace> t{synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.2, 0.5, 1),
                                 synthetic_trace(Condition::Baseline, Algorithm::ALS, 2, 0.4, 0.5, 3)};
  const auto r = aggregate(t, 5);
  const auto* row = r.find(Condition::Baseline, Algorithm::ALS, Stakeholder::Consumer, Group::Niche);
  EXPECT_NEAR(row->mean, 0.3, 1e-15);
  EXPECT_EQ(row->seeds, 2u);
}

TEST(Aggregate, OnlyEvaluationWindowCounts) {
  auto t = synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 2);
  t.cycles[0].consumers[0].running_utility = 0.9;  // outside the last 5 of 6 cycles
  std::vector<SimulationTrace> ts{t};
  EXPECT_DOUBLE_EQ(aggregate(ts, 5).find(Condition::Baseline, Algorithm::ALS, Stakeholder::Consumer, Group::Niche)->mean,
                   0.3);
}

TEST(Aggregate, DeltaAgainstBaseline) {
  std::vector<SimulationTrace> t{synthetic_trace(Condition::Baseline, Algorithm::BPR, 1, 0.122, 0.5, 2),
                                 synthetic_trace(Condition::AlgorithmSpecific, Algorithm::BPR, 1, 0.136, 0.5, 3)};
  const auto r = aggregate(t, 5);
  const auto* row = r.find(Condition::AlgorithmSpecific, Algorithm::BPR, Stakeholder::Consumer, Group::Niche);
  ASSERT_TRUE(row->pct_delta);
  EXPECT_NEAR(*row->pct_delta, 100.0 * (0.136 - 0.122) / 0.122, 1e-9);
  EXPECT_EQ(format_delta(row->pct_delta), "+11.5%");
  EXPECT_EQ(*r.find(Condition::Baseline, Algorithm::BPR, Stakeholder::Consumer, Group::Niche)->pct_delta, 0.0);
  EXPECT_EQ(format_delta(r.find(Condition::Baseline, Algorithm::BPR, Stakeholder::Consumer, Group::Niche)->pct_delta),
            "+0.0%");
}

// The printed example pairs rounded means 0.122 -> 0.136 with +12.1%; that
// delta is reachable from unrounded means inside the rounding intervals.
TEST(Aggregate, PrintedDeltaReachableWithinRounding) {
  bool reachable = false;
  for (double b = 0.1215; b < 0.1225; b += 1e-5)
    for (double c = 0.1355; c < 0.1365; c += 1e-5)
      reachable = reachable || format_delta(percent_delta(c, b)) == "+12.1%";
  EXPECT_TRUE(reachable);
}

TEST(Aggregate, ZeroBaselineDeltaUndefined) {
  std::vector<SimulationTrace> t{synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 0),
                                 synthetic_trace(Condition::ColdStart, Algorithm::ALS, 1, 0.3, 0.3, 2)};
  const auto r = aggregate(t, 5);
  const auto* row = r.find(Condition::ColdStart, Algorithm::ALS, Stakeholder::Provider, Group::Niche);
  EXPECT_FALSE(row->pct_delta);
  EXPECT_EQ(format_delta(row->pct_delta), "n/a");
}

TEST(Aggregate, PermutationInvariant) {
  std::vector<SimulationTrace> t;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    t.push_back(synthetic_trace(Condition::Baseline, Algorithm::ALS, s, 0.1 * s, 0.37 / s, s % 4));
    t.push_back(synthetic_trace(Condition::Universal, Algorithm::ALS, s, 0.11 * s, 0.3 / s, (s + 1) % 4));
  }
  const auto ref = aggregate(t, 5).digest();
  std::mt19937 gen(3);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(t.begin(), t.end(), gen);
    EXPECT_EQ(aggregate(t, 5).digest(), ref);
  }
}

TEST(Aggregate, RejectsInconsistentInput) {
  std::vector<SimulationTrace> t{synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 2),
                                 synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 2)};
  EXPECT_THROW(aggregate(t, 5), Error);
  t[1] = synthetic_trace(Condition::Baseline, Algorithm::ALS, 2, 0.3, 0.3, 2, 4);
  EXPECT_THROW(aggregate(t, 3), Error);
  std::vector<SimulationTrace> one{synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 2, 4)};
  EXPECT_THROW(aggregate(one, 5), Error);
}

TEST(Export, CsvShapeAndRoundTrip) {
  const auto g = small_grid({Condition::ColdStart, Condition::Universal}, {Algorithm::ItemKNN}, {1});
  const auto out = run_grid(data(), g, 1);
  const auto dir = temp_dir("export");
  export_results(out.result, build_manifest(out.traces, out.result), dir, true);
  for (auto s : {Stakeholder::Consumer, Stakeholder::Provider}) {
    const auto path = dir / (std::string(to_string(s)) + "_utility.csv");
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "condition,algorithm,group,mean_utility,pct_delta_vs_baseline");
    const auto rows = read_result_csv(path, s);
    std::size_t non_baseline = 0;
    for (const auto& r : rows) non_baseline += r.condition != Condition::Baseline;
    EXPECT_EQ(non_baseline, 2u * 1u * 2u);
    for (const auto& r : rows) {
      const auto* orig = out.result.find(r.condition, r.algorithm, s, r.group);
      ASSERT_NE(orig, nullptr);
      EXPECT_EQ(r.mean, orig->mean);
      EXPECT_EQ(r.pct_delta, orig->pct_delta);
    }
    EXPECT_GT(fs::file_size(dir / (std::string(to_string(s)) + "_utility.svg")), 0u);
  }
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "summary.md"));
  fs::remove_all(dir);
}

TEST(Export, ManifestDigestTracksConfigAndDataset) {
  std::vector<SimulationTrace> t{synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 2)};
  const auto r = aggregate(t, 5);
  const auto m1 = build_manifest(t, r);
  EXPECT_EQ(build_manifest(t, r)["digest"], m1["digest"]);
  auto t2 = t;
  t2[0].config.utility.tau = 0.3;
  EXPECT_NE(build_manifest(t2, r)["digest"], m1["digest"]);
  auto t3 = t;
  t3[0].dataset_digest = "other";
  EXPECT_NE(build_manifest(t3, aggregate(t3, 5))["digest"], m1["digest"]);
  EXPECT_EQ(m1["config"]["seeds"], nlohmann::json::array({1}));
}

TEST(Export, UnwritableDirectoryFailsBeforeWriting) {
  std::vector<SimulationTrace> t{synthetic_trace(Condition::Baseline, Algorithm::ALS, 1, 0.3, 0.3, 2)};
  const auto r = aggregate(t, 5);
  const auto blocker = temp_dir("blocker");
  { std::ofstream(blocker) << "x"; }  // a file where a directory is expected
  EXPECT_THROW(export_results(r, build_manifest(t, r), blocker / "out", false), Error);
  fs::remove_all(blocker);
}

TEST(Export, TracesSaveAndReload) {
  const auto g = small_grid({Condition::ColdStart}, {Algorithm::ItemKNN}, {1, 2});
  const auto out = run_grid(data(), g, 2);
  const auto dir = temp_dir("runs");
  fs::create_directories(dir);
  for (const auto& t : out.traces) save_trace(t, dir / run_file_name(t.config));
  const auto back = load_runs(dir);
  EXPECT_EQ(back.size(), out.traces.size());
  EXPECT_EQ(aggregate(back, g.eval_cycles).digest(), out.result.digest());
  fs::remove_all(dir);
}

TEST(Format, DeltaStrings) {
  EXPECT_EQ(format_delta(-4.24), "-4.2%");
  EXPECT_EQ(format_delta(-0.01), "+0.0%");
  EXPECT_EQ(format_delta(192.2), "+192.2%");
}
