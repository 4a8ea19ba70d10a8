#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "portsim/engine.hpp"

namespace portsim {

enum class Stakeholder { Consumer, Provider };
std::string_view to_string(Stakeholder s);

struct ExperimentGrid {
  /// Portability conditions to compare; the baseline is always added.
  std::vector<Condition> conditions{Condition::AlgorithmSpecific, Condition::ColdStart, Condition::UserOwnership,
                                    Condition::Universal};
  std::vector<Algorithm> algorithms{Algorithm::BPR, Algorithm::ALS, Algorithm::ItemKNN};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  SimConfig base;
  std::uint32_t eval_cycles = 5;

  void validate() const;
  /// Baseline runs for every (algorithm, seed), then every (condition, algorithm, seed).
  std::vector<SimConfig> runs() const;
};

/// Reads a grid from a JSON config document: conditions, algorithms, seeds,
/// eval_cycles, workers plus any SimConfig key. PORTSIM_SEED, when set,
/// replaces the seed list with that single seed.
ExperimentGrid parse_grid_config(const nlohmann::json& j, std::size_t* workers = nullptr);
ExperimentGrid load_grid_config(const std::filesystem::path& path, std::size_t* workers = nullptr);

struct AggregateRow {
  Condition condition;
  Algorithm algorithm;
  Stakeholder stakeholder;
  Group group;
  double mean = 0.0;
  std::optional<double> pct_delta;  // empty when the baseline mean is 0 or missing
  std::size_t seeds = 0;

  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

struct AggregateResult {
  std::uint32_t eval_cycles = 5;
  std::vector<AggregateRow> rows;

  const AggregateRow* find(Condition c, Algorithm a, Stakeholder s, Group g) const;
  std::uint64_t digest() const;
};

/// Consumers: mean running utility over the last eval_cycles cycles, averaged
/// per consumer, then over the group's consumers, then across seeds.
/// Providers: the same with per-cycle click counts. Deltas are percentages
/// against the baseline of the same algorithm.
AggregateResult aggregate(std::span<const SimulationTrace> traces, std::uint32_t eval_cycles);

std::optional<double> percent_delta(double condition_mean, double baseline_mean);

/// "+11.5%", "-4.2%", "+0.0%" or "n/a".
std::string format_delta(std::optional<double> pct);

struct GridOutput {
  std::vector<SimulationTrace> traces;
  AggregateResult result;
};

/// Runs every grid cell on up to `workers` threads. A failing run aborts the
/// grid with an Error naming its condition, algorithm and seed.
GridOutput run_grid(const LabeledDataset& dataset, const ExperimentGrid& grid, std::size_t workers = 1);

/// "<condition>__<algo>__seed<N>.jsonl"
std::string run_file_name(const SimConfig& c);

void save_trace(const SimulationTrace& trace, const std::filesystem::path& path);
SimulationTrace load_trace(const std::filesystem::path& path);
/// Every *.jsonl trace in dir, in file-name order.
std::vector<SimulationTrace> load_runs(const std::filesystem::path& dir);

/// Run manifest: shared config, conditions, algorithms, seeds, dataset digest,
/// per-run trace digests and a digest over (config, dataset).
nlohmann::json build_manifest(std::span<const SimulationTrace> traces, const AggregateResult& result);

/// Writes consumer_utility.csv, provider_utility.csv, summary.md and
/// manifest.json (plus consumer_utility.svg and provider_utility.svg when
/// plots is set). Checks the directory is writable before writing anything.
void export_results(const AggregateResult& result, const nlohmann::json& manifest, const std::filesystem::path& out_dir,
                    bool plots);

/// Parses an exported utility CSV back into rows of the given stakeholder.
std::vector<AggregateRow> read_result_csv(const std::filesystem::path& path, Stakeholder stakeholder);

/// SVG bar chart: one panel per algorithm, bars per condition and group,
/// baseline means drawn as horizontal reference lines.
std::string render_plot_svg(const AggregateResult& result, Stakeholder stakeholder);

}  // namespace portsim
