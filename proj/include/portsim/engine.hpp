#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "portsim/choice.hpp"
#include "portsim/dataset.hpp"
#include "portsim/ecosystem.hpp"
#include "portsim/portability.hpp"
#include "portsim/recommenders.hpp"

namespace portsim {

struct SimConfig {
  std::uint32_t cycles = 10;
  std::uint32_t days_per_cycle = 3;
  std::uint32_t slate_size = 5;
  std::uint32_t warmup_cycles = 2;
  std::uint32_t exposure_threshold = 3;
  UtilityParams utility;
  Condition condition = Condition::AlgorithmSpecific;
  Algorithm algorithm = Algorithm::ItemKNN;
  HyperParams hyper;
  std::uint64_t seed = 1;
  /// Threads used for training and for the per-day consumer loop. Results
  /// do not depend on this value.
  std::size_t workers = 1;
  /// Record every consumer-day outcome (slates included) in the trace.
  bool log_days = false;

  void validate() const;
  /// Active recommenders: R^G alone for the baseline, R^G and R^N otherwise.
  std::vector<RecommenderId> roster() const;
};

struct ConsumerCycleRecord {
  ConsumerIndex consumer = 0;
  Group group = Group::Generic;
  RecommenderId attached = kGenericRecommender;  // recommender used during the cycle
  double running_utility = 0.0;                  // estimate for `attached` at cycle end
  std::optional<double> mean_slate_utility;      // empty when every day was skipped
  std::uint32_t clicks = 0;
  std::uint32_t skipped_days = 0;
};

struct ProviderCycleRecord {
  ProviderIndex provider = 0;
  Group group = Group::Generic;
  std::uint64_t clicks = 0;
};

struct CycleTrace {
  std::uint32_t cycle = 0;
  std::vector<ConsumerCycleRecord> consumers;
  std::vector<ProviderCycleRecord> providers;
  std::vector<SwitchEvent> switches;
  /// Consumers attached to each recommender after cycle-end switching.
  std::vector<std::uint64_t> attachments;
  std::uint64_t clicks = 0;
  std::uint64_t skipped_days = 0;
};

struct DayOutcome {
  std::uint32_t cycle = 0;
  std::uint32_t day = 0;
  ConsumerIndex consumer = 0;
  RecommenderId recommender = 0;
  std::vector<ItemIndex> slate;
  std::vector<SlotSource> sources;
  ItemIndex selected = 0;
  double slate_utility = 0.0;
  double running_utility = 0.0;
};

struct SimulationTrace {
  SimConfig config;
  std::string dataset_digest;
  std::string niche_genre;
  std::vector<std::string> consumer_ids;
  std::vector<std::string> provider_ids;
  std::vector<std::string> item_ids;  // only needed to serialize the day log
  std::vector<CycleTrace> cycles;
  std::vector<DayOutcome> days;

  /// Digest of the serialized trace.
  std::uint64_t digest() const;
};

/// Initial simulation state: everyone attached to R^G, estimates at tau,
/// empty profiles, zero provider clicks.
struct EcosystemState {
  std::vector<ConsumerState> consumers;
  std::vector<ProviderState> providers;
  ProfileStore store;
  ExposureTracker exposure;
  std::vector<RecommenderId> roster;
  std::optional<PolicyKind> policy;
};

EcosystemState initialize_ecosystem(const LabeledDataset& dataset, const SimConfig& config);

/// Runs the full cycle/day loop. Throws ConfigError for an invalid config.
SimulationTrace run_simulation(const LabeledDataset& dataset, const SimConfig& config);

// Trace serialization: JSON lines, one header record followed by one record
// per consumer-cycle, provider-cycle, switch and (optionally) consumer-day.
void write_trace(std::ostream& out, const SimulationTrace& trace);
SimulationTrace read_trace(std::istream& in, const std::string& name = "trace");

}  // namespace portsim
