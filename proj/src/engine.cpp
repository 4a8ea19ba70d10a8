#include "portsim/engine.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "portsim/rng.hpp"

namespace portsim {
namespace {

// Stream tags for seed derivation.
constexpr std::uint64_t kTrainStream = 0x7472;
constexpr std::uint64_t kDayStream = 0x6461;

// Runs fn(begin, end) over [0, n) split into contiguous chunks. The first
// exception raised by any chunk is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b >= e) break;
      threads.emplace_back([&fn, &errors, w, b, e] {
        try {
          fn(b, e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

struct DayResult {
  bool served = false;
  ItemIndex selected = 0;
  DayOutcome outcome;
};

}  // namespace

void SimConfig::validate() const {
  if (cycles == 0) throw ConfigError("cycles must be positive");
  if (days_per_cycle == 0) throw ConfigError("days_per_cycle must be positive");
  if (slate_size < 2) throw ConfigError("slate_size must be at least 2");
  if (warmup_cycles >= cycles) throw ConfigError("warmup_cycles must be smaller than cycles");
  if (exposure_threshold == 0) throw ConfigError("exposure_threshold must be positive");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (hyper.knn.neighbors == 0) throw ConfigError("knn_neighbors must be positive");
  if (hyper.als.factors == 0 || hyper.bpr.factors == 0) throw ConfigError("factors must be positive");
  if (hyper.als.sweeps < 0 || hyper.bpr.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(hyper.als.regularization > 0)) throw ConfigError("ALS regularization must be positive");
  if (!(hyper.bpr.learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  utility.validate();
}

std::vector<RecommenderId> SimConfig::roster() const {
  if (condition == Condition::Baseline) return {kGenericRecommender};
  return {kGenericRecommender, kNicheRecommender};
}

EcosystemState initialize_ecosystem(const LabeledDataset& d, const SimConfig& config) {
  const auto roster = config.roster();
  const auto policy = policy_of(config.condition);
  const ProfileMode mode = policy ? required_mode(*policy) : ProfileMode::Partitioned;

  EcosystemState s{{}, {}, ProfileStore(mode, roster.size(), d.consumer_count()), ExposureTracker(d.consumer_count()),
                   roster, policy};
  s.consumers.resize(d.consumer_count());
  for (ConsumerIndex j = 0; j < d.consumer_count(); ++j) {
    auto& c = s.consumers[j];
    c.id = j;
    c.preferences = d.preferences[j];
    c.attached = kGenericRecommender;
    c.utility_estimates.assign(roster.size(), config.utility.tau);
    c.group = d.consumer_groups[j];
  }
  s.providers.resize(d.provider_count());
  for (ProviderIndex v = 0; v < d.provider_count(); ++v) {
    s.providers[v].id = v;
    s.providers[v].group = d.provider_groups[v];
  }
  return s;
}

SimulationTrace run_simulation(const LabeledDataset& d, const SimConfig& config) {
  config.validate();
  if (d.consumer_count() == 0 || d.item_count() == 0) throw EmptyDatasetError("simulation needs consumers and items");

  EcosystemState s = initialize_ecosystem(d, config);
  const std::size_t n_consumers = d.consumer_count();
  const std::size_t n_items = d.item_count();

  std::vector<Recommender> recs;
  for (RecommenderId k : s.roster) {
    const CandidateFilter filter =
        k == kNicheRecommender ? CandidateFilter::requiring_genre(d.genre_space.niche) : CandidateFilter::all();
    recs.emplace_back(k, config.algorithm, filter, config.hyper, d.item_features);
  }

  SimulationTrace trace;
  trace.config = config;
  trace.dataset_digest = to_hex(d.digest());
  trace.niche_genre = d.genre_space.niche_name();
  trace.consumer_ids = d.consumer_ids;
  trace.provider_ids = d.provider_ids;
  if (config.log_days) trace.item_ids = d.item_ids;

  std::vector<DayResult> day_results(n_consumers);
  std::vector<double> cycle_mu_sum(n_consumers);
  std::vector<std::uint32_t> cycle_served(n_consumers), cycle_skipped(n_consumers);

  for (std::uint32_t cycle = 1; cycle <= config.cycles; ++cycle) {
    const auto withheld = s.exposure.begin_cycle(config.exposure_threshold);

    // Train on profiles as of the end of the previous cycle.
    parallel_for(recs.size(), config.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) {
        Rng rng(derive_seed(config.seed, {kTrainStream, cycle, recs[r].id()}));
        recs[r].train(InteractionMatrix::from_store(s.store, recs[r].id(), n_items), rng);
      }
    });

    std::fill(cycle_mu_sum.begin(), cycle_mu_sum.end(), 0.0);
    std::fill(cycle_served.begin(), cycle_served.end(), 0);
    std::fill(cycle_skipped.begin(), cycle_skipped.end(), 0);
    for (auto& p : s.providers) p.clicks_per_cycle.push_back(0);
    const bool switching = cycle > config.warmup_cycles && s.roster.size() > 1;

    for (std::uint32_t day = 1; day <= config.days_per_cycle; ++day) {
      parallel_for(n_consumers, config.workers, [&](std::size_t b, std::size_t e) {
        std::vector<char> excluded(n_items, 0);
        std::vector<double> utils;
        for (std::size_t jj = b; jj < e; ++jj) {
          const auto j = static_cast<ConsumerIndex>(jj);
          auto& consumer = s.consumers[j];
          auto& result = day_results[j];
          result.served = false;
          const RecommenderId k = consumer.attached;
          const auto profile = s.store.profile(k, j);

          for (ItemIndex i : withheld[j]) excluded[i] = 1;
          for (const auto& ev : profile) excluded[ev.item] = 1;
          Rng rng(derive_seed(config.seed, {kDayStream, cycle, day, j}));
          Slate slate;
          try {
            slate = recs[k].recommend(j, profile, excluded, config.slate_size, rng);
          } catch (const EmptySlateError&) {
            ++cycle_skipped[j];
          }
          for (ItemIndex i : withheld[j]) excluded[i] = 0;
          for (const auto& ev : profile) excluded[ev.item] = 0;
          if (slate.items.empty()) continue;

          utils.resize(slate.size());
          for (std::size_t x = 0; x < slate.size(); ++x)
            utils[x] = item_utility(d.item_features[slate.items[x]], consumer.preferences);
          const double mu = slate_utility(utils);
          double& estimate = consumer.utility_estimates[k];
          estimate = update_running_utility(estimate, mu, config.utility.beta);
          const auto probs = selection_probabilities(utils, config.utility.softmax_temperature);
          const ItemIndex clicked = slate.items[select_index(probs, rng)];

          s.store.append(k, ClickEvent{j, clicked, day, cycle});
          s.exposure.record_slate_exposure(j, slate.items, clicked);
          if (switching) consumer.pending_switch = switch_decision(consumer, s.roster, config.utility.tau);

          cycle_mu_sum[j] += mu;
          ++cycle_served[j];
          result.served = true;
          result.selected = clicked;
          if (config.log_days)
            result.outcome = DayOutcome{cycle, day, j, k, slate.items, slate.sources, clicked, mu, estimate};
        }
      });

      // Deterministic reduction in consumer order.
      for (ConsumerIndex j = 0; j < n_consumers; ++j) {
        if (!day_results[j].served) continue;
        update_provider_utility(s.providers, d.item_provider[day_results[j].selected], cycle);
        if (config.log_days) trace.days.push_back(std::move(day_results[j].outcome));
      }
    }

    CycleTrace ct;
    ct.cycle = cycle;
    ct.consumers.reserve(n_consumers);
    for (ConsumerIndex j = 0; j < n_consumers; ++j) {
      const auto& c = s.consumers[j];
      ConsumerCycleRecord r;
      r.consumer = j;
      r.group = c.group;
      r.attached = c.attached;
      r.running_utility = c.utility_estimates[c.attached];
      if (cycle_served[j] > 0) r.mean_slate_utility = cycle_mu_sum[j] / cycle_served[j];
      r.clicks = cycle_served[j];
      r.skipped_days = cycle_skipped[j];
      ct.clicks += r.clicks;
      ct.skipped_days += r.skipped_days;
      ct.consumers.push_back(r);
    }
    for (const auto& p : s.providers) ct.providers.push_back({p.id, p.group, p.clicks_per_cycle.back()});

    // Cycle end: apply pending switches, then the portability policy.
    for (ConsumerIndex j = 0; j < n_consumers; ++j) {
      auto& c = s.consumers[j];
      if (!c.pending_switch) continue;
      const SwitchEvent ev{j, c.attached, *c.pending_switch, cycle};
      c.attached = *c.pending_switch;
      c.pending_switch.reset();
      if (s.policy) apply_policy(*s.policy, ev, s.store);
      ct.switches.push_back(ev);
    }
    ct.attachments.assign(s.roster.size(), 0);
    for (const auto& c : s.consumers) ++ct.attachments[c.attached];
    trace.cycles.push_back(std::move(ct));
  }
  return trace;
}

}  // namespace portsim
