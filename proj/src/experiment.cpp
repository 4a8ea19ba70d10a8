#include "portsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "portsim/config.hpp"
#include "portsim/csv.hpp"

namespace portsim {

using nlohmann::json;

std::string_view to_string(Stakeholder s) { return s == Stakeholder::Consumer ? "consumer" : "provider"; }

void ExperimentGrid::validate() const {
  if (algorithms.empty()) throw ConfigError("grid needs at least one algorithm");
  if (seeds.empty()) throw ConfigError("grid needs at least one seed");
  if (eval_cycles == 0) throw ConfigError("eval_cycles must be positive");
  if (eval_cycles > base.cycles) throw ConfigError("eval_cycles exceeds the number of cycles");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("duplicate seed in grid");
  base.validate();
}

std::vector<SimConfig> ExperimentGrid::runs() const {
  std::vector<Condition> conds{Condition::Baseline};
  for (auto c : conditions)
    if (std::find(conds.begin(), conds.end(), c) == conds.end()) conds.push_back(c);
  std::vector<SimConfig> out;
  for (auto c : conds)
    for (auto a : algorithms)
      for (auto s : seeds) {
        SimConfig cfg = base;
        cfg.condition = c;
        cfg.algorithm = a;
        cfg.seed = s;
        out.push_back(cfg);
      }
  return out;
}

ExperimentGrid parse_grid_config(const json& j, std::size_t* workers) {
  if (!j.is_object()) throw ConfigError("grid config must be a JSON object");
  ExperimentGrid g;
  json sim = json::object();
  for (const auto& [k, v] : j.items()) {
    if (k == "conditions" || k == "algorithms" || k == "seeds" || k == "eval_cycles") continue;
    if (!is_sim_config_key(k)) throw ConfigError("unknown config key '" + k + "'");
    if (k == "portability") throw ConfigError("'portability' is per-run; use 'conditions' in a grid config");
    if (k == "condition" || k == "algo" || k == "seed")
      throw ConfigError("'" + k + "' is per-run; use '" + k + (k == "algo" ? "rithms'" : "s'") + " in a grid config");
    sim[k] = v;
  }
  g.base = apply_sim_config(sim, SimConfig{}, true);
  try {
    if (j.contains("conditions")) {
      g.conditions.clear();
      for (const auto& c : j.at("conditions")) {
        const auto cond = parse_condition(c.get<std::string>());
        if (cond != Condition::Baseline) g.conditions.push_back(cond);
      }
    }
    if (j.contains("algorithms")) {
      g.algorithms.clear();
      for (const auto& a : j.at("algorithms")) g.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (j.contains("seeds")) g.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("eval_cycles")) g.eval_cycles = j.at("eval_cycles").get<std::uint32_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid config: ") + e.what());
  }
  if (const char* env = std::getenv("PORTSIM_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError("PORTSIM_SEED must be an unsigned integer");
    g.seeds = {v};
  }
  if (workers) *workers = g.base.workers;
  g.base.workers = 1;
  g.validate();
  return g;
}

ExperimentGrid load_grid_config(const std::filesystem::path& path, std::size_t* workers) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_grid_config(j, workers);
}

const AggregateRow* AggregateResult::find(Condition c, Algorithm a, Stakeholder s, Group g) const {
  for (const auto& r : rows)
    if (r.condition == c && r.algorithm == a && r.stakeholder == s && r.group == g) return &r;
  return nullptr;
}

std::uint64_t AggregateResult::digest() const {
  Digest h;
  h.update_u64(eval_cycles);
  for (const auto& r : rows) {
    h.update(to_string(r.condition));
    h.update(to_string(r.algorithm));
    h.update(to_string(r.stakeholder));
    h.update(to_string(r.group));
    h.update(format_double(r.mean));
    h.update(r.pct_delta ? format_double(*r.pct_delta) : std::string("-"));
    h.update_u64(r.seeds);
  }
  return h.value();
}

std::optional<double> percent_delta(double condition_mean, double baseline_mean) {
  if (baseline_mean == 0.0 || !std::isfinite(baseline_mean)) return std::nullopt;
  if (condition_mean == baseline_mean) return 0.0;
  return 100.0 * (condition_mean - baseline_mean) / baseline_mean;
}

std::string format_delta(std::optional<double> pct) {
  if (!pct) return "n/a";
  double v = std::round(*pct * 10.0) / 10.0;
  if (v == 0.0) v = 0.0;  // no "-0.0%"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", v);
  return buf;
}

namespace {

struct GroupMeans {
  std::map<Group, double> consumer, provider;
};

GroupMeans seed_means(const SimulationTrace& t, std::uint32_t eval_cycles) {
  const auto n = t.cycles.size();
  const auto first = n - eval_cycles;
  std::vector<double> cu(t.consumer_ids.size(), 0.0);
  std::vector<Group> cg(t.consumer_ids.size(), Group::Generic);
  std::vector<double> pu(t.provider_ids.size(), 0.0);
  std::vector<Group> pg(t.provider_ids.size(), Group::Generic);
  for (std::size_t c = first; c < n; ++c) {
    for (const auto& r : t.cycles[c].consumers) {
      cu.at(r.consumer) += r.running_utility;
      cg[r.consumer] = r.group;
    }
    for (const auto& r : t.cycles[c].providers) {
      pu.at(r.provider) += static_cast<double>(r.clicks);
      pg[r.provider] = r.group;
    }
  }
  auto reduce = [eval_cycles](const std::vector<double>& sums, const std::vector<Group>& groups) {
    std::map<Group, std::pair<double, std::size_t>> acc;
    for (std::size_t x = 0; x < sums.size(); ++x) {
      auto& a = acc[groups[x]];
      a.first += sums[x] / eval_cycles;
      ++a.second;
    }
    std::map<Group, double> out;
    for (const auto& [g, a] : acc) out[g] = a.first / static_cast<double>(a.second);
    return out;
  };
  return {reduce(cu, cg), reduce(pu, pg)};
}

}  // namespace

AggregateResult aggregate(std::span<const SimulationTrace> traces, std::uint32_t eval_cycles) {
  if (eval_cycles == 0) throw ConfigError("eval_cycles must be positive");
  if (traces.empty()) throw Error("no runs to aggregate");
  const auto cycles = traces.front().cycles.size();
  for (const auto& t : traces) {
    if (t.cycles.size() != cycles) throw Error("runs have different cycle counts");
    if (t.dataset_digest != traces.front().dataset_digest) throw Error("runs were produced from different datasets");
  }
  if (cycles < eval_cycles) throw Error("runs have fewer cycles than eval_cycles");

  // (condition, algorithm) -> seed -> per-group means. Keyed by seed so the
  // result does not depend on input order.
  using Key = std::pair<Condition, Algorithm>;
  std::map<Key, std::map<std::uint64_t, GroupMeans>> cells;
  for (const auto& t : traces) {
    auto& bucket = cells[{t.config.condition, t.config.algorithm}];
    if (!bucket.emplace(t.config.seed, seed_means(t, eval_cycles)).second)
      throw Error("duplicate run " + std::string(to_string(t.config.condition)) + "/" +
                  std::string(to_string(t.config.algorithm)) + "/seed " + std::to_string(t.config.seed));
  }

  AggregateResult res;
  res.eval_cycles = eval_cycles;
  for (const auto& [key, seeds] : cells) {
    for (auto s : {Stakeholder::Consumer, Stakeholder::Provider}) {
      for (auto g : {Group::Niche, Group::Generic}) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [seed, m] : seeds) {
          const auto& groups = s == Stakeholder::Consumer ? m.consumer : m.provider;
          if (auto it = groups.find(g); it != groups.end()) {
            sum += it->second;
            ++n;
          }
        }
        if (n == 0) continue;
        res.rows.push_back({key.first, key.second, s, g, sum / static_cast<double>(n), std::nullopt, n});
      }
    }
  }
  for (auto& r : res.rows) {
    if (const auto* b = res.find(Condition::Baseline, r.algorithm, r.stakeholder, r.group))
      r.pct_delta = percent_delta(r.mean, b->mean);
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
    return std::tuple(a.stakeholder, a.algorithm, a.condition, a.group) <
           std::tuple(b.stakeholder, b.algorithm, b.condition, b.group);
  });
  return res;
}

GridOutput run_grid(const LabeledDataset& dataset, const ExperimentGrid& grid, std::size_t workers) {
  grid.validate();
  const auto runs = grid.runs();
  GridOutput out;
  out.traces.resize(runs.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::string err_msg;
  std::exception_ptr err_ptr;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= runs.size() || failed.load()) return;
      try {
        out.traces[r] = run_simulation(dataset, runs[r]);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (!failed.exchange(true)) {
          err_msg = "run " + std::string(to_string(runs[r].condition)) + "/" + std::string(to_string(runs[r].algorithm)) +
                    "/seed " + std::to_string(runs[r].seed) + " failed: " + e.what();
          err_ptr = std::current_exception();
        }
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, runs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failed) {
    try {
      std::rethrow_exception(err_ptr);
    } catch (const ConfigError&) {
      throw ConfigError(err_msg);
    } catch (...) {
      throw Error(err_msg);
    }
  }
  out.result = aggregate(out.traces, grid.eval_cycles);
  return out;
}

std::string run_file_name(const SimConfig& c) {
  return std::string(to_string(c.condition)) + "__" + std::string(to_string(c.algorithm)) + "__seed" +
         std::to_string(c.seed) + ".jsonl";
}

void save_trace(const SimulationTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_trace(out, trace);
  if (!out) throw Error("write failed for " + path.string());
}

SimulationTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_trace(in, path.string());
}

std::vector<SimulationTrace> load_runs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .jsonl traces in " + dir.string());
  std::vector<SimulationTrace> out;
  for (const auto& f : files) out.push_back(load_trace(f));
  return out;
}

json build_manifest(std::span<const SimulationTrace> traces, const AggregateResult& result) {
  if (traces.empty()) throw Error("no runs for manifest");
  auto shared = [](const SimConfig& c) {
    json j = to_json(c);
    j.erase("condition");
    j.erase("algo");
    j.erase("seed");
    return j;
  };
  const json config = shared(traces.front().config);
  std::set<Condition> conds;
  std::set<Algorithm> algos;
  std::set<std::uint64_t> seeds;
  json runs = json::array();
  for (const auto& t : traces) {
    if (shared(t.config) != config) throw Error("runs use different simulation settings");
    if (t.dataset_digest != traces.front().dataset_digest) throw Error("runs were produced from different datasets");
    conds.insert(t.config.condition);
    algos.insert(t.config.algorithm);
    seeds.insert(t.config.seed);
    runs.push_back({{"file", run_file_name(t.config)},
                    {"condition", std::string(to_string(t.config.condition))},
                    {"algorithm", std::string(to_string(t.config.algorithm))},
                    {"seed", t.config.seed},
                    {"trace_digest", to_hex(t.digest())}});
  }
  std::sort(runs.begin(), runs.end(), [](const json& a, const json& b) { return a["file"] < b["file"]; });

  json cfg = config;
  cfg["eval_cycles"] = result.eval_cycles;
  json cl = json::array(), al = json::array();
  for (auto c : conds) cl.push_back(std::string(to_string(c)));
  for (auto a : algos) al.push_back(std::string(to_string(a)));
  cfg["conditions"] = cl;
  cfg["algorithms"] = al;
  cfg["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());

  Digest cd;
  cd.update(cfg.dump());
  Digest md;
  md.update(cfg.dump());
  md.update(traces.front().dataset_digest);

  return json{{"format", "portsim-manifest/1"},
              {"config", cfg},
              {"config_digest", to_hex(cd.value())},
              {"dataset_digest", traces.front().dataset_digest},
              {"niche_genre", traces.front().niche_genre},
              {"digest", to_hex(md.value())},
              {"result_digest", to_hex(result.digest())},
              {"runs", runs},
              {"units",
               {{"consumer_utility", "mean running slate utility over the evaluation cycles"},
                {"provider_utility", "mean clicks per provider per cycle over the evaluation cycles"},
                {"pct_delta_vs_baseline", "percent change against the baseline of the same algorithm"}}}};
}

}  // namespace portsim
