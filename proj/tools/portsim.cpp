#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "portsim/config.hpp"
#include "portsim/dataset.hpp"
#include "portsim/experiment.hpp"
#include "portsim/kernels.hpp"
#include "portsim/synthetic.hpp"

namespace fs = std::filesystem;
using namespace portsim;

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* env = std::getenv("PORTSIM_SEED");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError("PORTSIM_SEED must be an unsigned integer");
  return v;
}

void print_report(const LabeledDataset& d) {
  const auto& r = d.load_report;
  std::cerr << "consumers=" << d.consumer_count() << " items=" << d.item_count() << " providers=" << d.provider_count()
            << " interactions=" << d.interactions.size() << " niche_genre=" << d.genre_space.niche_name() << '\n'
            << "dropped_catalog_rows=" << r.dropped_catalog_rows << " dropped_interactions=" << r.dropped_interactions
            << " unknown_item_interactions=" << r.unknown_item_interactions
            << " items_without_genres=" << r.items_without_genres << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-recommender ecosystem simulator with profile portability policies"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Filter, label and store a dataset");
  std::string interactions, catalog, out_dir, niche;
  int k_core = 1;
  prepare->add_option("--interactions", interactions, "Interactions CSV")->required();
  prepare->add_option("--catalog", catalog, "Catalog CSV")->required();
  prepare->add_option("--k-core", k_core, "k-core threshold")->default_val(1);
  prepare->add_option("--niche-genre", niche, "Use this genre as the niche genre");
  std::vector<double> band{0.30, 0.80};
  prepare->add_option("--percentile-band", band, "Demand-share percentile band for niche selection (LO HI)")
      ->expected(2)
      ->check(CLI::Range(0.0, 1.0));
  prepare->add_option("--out", out_dir, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Run one simulation");
  std::string data_dir, condition = "algorithm_specific", algo = "itemknn", config_file;
  SimConfig sim;
  run->add_option("--data", data_dir, "Prepared dataset directory")->required();
  run->add_option("--config", config_file, "JSON config with SimConfig keys (flags override it)");
  auto* cond_opt = run->add_option("--condition", condition, "baseline|algorithm_specific|cold_start|user_ownership|universal");
  auto* algo_opt = run->add_option("--algo", algo, "als|bpr|itemknn");
  auto* seed_opt = run->add_option("--seed", sim.seed, "Master seed");
  auto* cycles_opt = run->add_option("--cycles", sim.cycles, "Cycles");
  auto* days_opt = run->add_option("--days", sim.days_per_cycle, "Days per cycle");
  auto* slate_opt = run->add_option("--slate", sim.slate_size, "Slate size");
  auto* tau_opt = run->add_option("--tau", sim.utility.tau, "Switch threshold");
  auto* beta_opt = run->add_option("--beta", sim.utility.beta, "Running-utility bias");
  auto* workers_opt = run->add_option("--workers", sim.workers, "Threads");
  bool log_days = false;
  run->add_flag("--log-days", log_days, "Record every consumer-day outcome in the trace");
  run->add_option("--out", out_dir, "Output directory")->required();

  // grid
  auto* grid = app.add_subcommand("grid", "Run a condition x algorithm x seed grid");
  std::size_t grid_workers = 0;
  bool no_plots = false;
  grid->add_option("--data", data_dir, "Prepared dataset directory")->required();
  grid->add_option("--config", config_file, "Grid config (JSON)")->required();
  grid->add_option("--out", out_dir, "Output directory")->required();
  grid->add_option("--workers", grid_workers, "Concurrent runs (overrides the config)");
  grid->add_flag("--no-plots", no_plots, "Skip SVG plots");

  // report
  auto* report = app.add_subcommand("report", "Aggregate saved traces into tables, manifest and plots");
  std::string runs_dir;
  bool plots = false;
  std::uint32_t eval_cycles = 5;
  report->add_option("--runs", runs_dir, "Directory of .jsonl traces")->required();
  report->add_option("--out", out_dir, "Output directory")->required();
  report->add_option("--eval-cycles", eval_cycles, "Evaluation window")->default_val(5);
  report->add_flag("--plots", plots, "Write SVG plots");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic raw dataset");
  SyntheticConfig syn;
  synth->add_option("--consumers", syn.consumers)->default_val(syn.consumers);
  synth->add_option("--items", syn.items)->default_val(syn.items);
  synth->add_option("--providers", syn.providers)->default_val(syn.providers);
  synth->add_option("--genres", syn.genres)->default_val(syn.genres);
  synth->add_option("--seed", syn.seed)->default_val(syn.seed);
  synth->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      PipelineConfig cfg;
      cfg.k_core = k_core;
      if (!niche.empty()) cfg.niche_genre_override = niche;
      if (band[0] > band[1]) throw ConfigError("--percentile-band needs LO <= HI");
      cfg.band = {band[0], band[1]};
      auto d = prepare_dataset(load_dataset(interactions, catalog), cfg);
      save_prepared(d, out_dir);
      print_report(d);
    } else if (*run) {
      if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw Error("cannot open config file " + config_file);
        const SimConfig flags = sim;
        sim = apply_sim_config(nlohmann::json::parse(in), SimConfig{}, true);
        if (*seed_opt) sim.seed = flags.seed;
        if (*cycles_opt) sim.cycles = flags.cycles;
        if (*days_opt) sim.days_per_cycle = flags.days_per_cycle;
        if (*slate_opt) sim.slate_size = flags.slate_size;
        if (*tau_opt) sim.utility.tau = flags.utility.tau;
        if (*beta_opt) sim.utility.beta = flags.utility.beta;
        if (*workers_opt) sim.workers = flags.workers;
      }
      if (*cond_opt || config_file.empty()) sim.condition = parse_condition(condition);
      if (*algo_opt || config_file.empty()) sim.algorithm = parse_algorithm(algo);
      if (log_days) sim.log_days = true;
      if (auto s = env_seed()) sim.seed = *s;
      const auto d = load_prepared(data_dir);
      const auto trace = run_simulation(d, sim);
      fs::create_directories(out_dir);
      const auto path = fs::path(out_dir) / run_file_name(sim);
      save_trace(trace, path);
      std::cout << path.string() << " digest=" << to_hex(trace.digest()) << '\n';
    } else if (*grid) {
      std::size_t workers = 1;
      const auto g = load_grid_config(config_file, &workers);
      if (grid_workers > 0) workers = grid_workers;
      const auto d = load_prepared(data_dir);
      std::cerr << "running " << g.runs().size() << " runs on " << workers << " worker(s), kernels="
                << kernels::to_string(kernels::active_backend()) << '\n';
      const auto res = run_grid(d, g, workers);
      const auto manifest = build_manifest(res.traces, res.result);
      export_results(res.result, manifest, out_dir, !no_plots);
      const fs::path runs = fs::path(out_dir) / "runs";
      fs::create_directories(runs);
      for (const auto& t : res.traces) save_trace(t, runs / run_file_name(t.config));
      std::cout << "wrote " << res.traces.size() << " traces and results to " << out_dir << '\n';
    } else if (*report) {
      const auto traces = load_runs(runs_dir);
      const auto result = aggregate(traces, eval_cycles);
      export_results(result, build_manifest(traces, result), out_dir, plots);
      std::cout << "aggregated " << traces.size() << " traces into " << out_dir << '\n';
    } else if (*synth) {
      const auto s = generate_synthetic(syn);
      write_raw_dataset(s.raw, out_dir);
      std::cout << "niche genre: " << s.niche_genre << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
