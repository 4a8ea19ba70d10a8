#include "portsim/portability.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace portsim {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Baseline: return "baseline";
    case Condition::AlgorithmSpecific: return "algorithm_specific";
    case Condition::ColdStart: return "cold_start";
    case Condition::UserOwnership: return "user_ownership";
    case Condition::Universal: return "universal";
  }
  return "unknown";
}

Condition parse_condition(std::string_view s) {
  for (auto c : {Condition::Baseline, Condition::AlgorithmSpecific, Condition::ColdStart, Condition::UserOwnership,
                 Condition::Universal})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown condition '" + std::string(s) +
                    "' (expected algorithm_specific, cold_start, user_ownership, universal or baseline)");
}

std::optional<PolicyKind> policy_of(Condition c) {
  switch (c) {
    case Condition::Baseline: return std::nullopt;
    case Condition::AlgorithmSpecific: return PolicyKind::AlgorithmSpecific;
    case Condition::ColdStart: return PolicyKind::ColdStart;
    case Condition::UserOwnership: return PolicyKind::UserOwnership;
    case Condition::Universal: return PolicyKind::Universal;
  }
  return std::nullopt;
}

PortabilityCoordinates coordinates(PolicyKind p) {
  switch (p) {
    case PolicyKind::AlgorithmSpecific: return {true, true};
    case PolicyKind::ColdStart: return {true, false};
    case PolicyKind::UserOwnership: return {false, false};
    case PolicyKind::Universal: return {false, true};
  }
  return {true, true};
}

ProfileMode required_mode(PolicyKind p) {
  return p == PolicyKind::Universal ? ProfileMode::Shared : ProfileMode::Partitioned;
}

void apply_policy(PolicyKind policy, const SwitchEvent& event, ProfileStore& store) {
  if (store.mode() != required_mode(policy))
    throw ConfigError("portability policy does not match the profile store layout");
  if (event.from == event.to) throw ContractViolation("switch event must change recommender");

  switch (policy) {
    case PolicyKind::AlgorithmSpecific:
    case PolicyKind::Universal:
      // Nothing moves: either each side keeps its own copy, or both already
      // read the same shared list. Still validate the ids.
      (void)store.profile(event.from, event.consumer);
      (void)store.profile(event.to, event.consumer);
      return;
    case PolicyKind::ColdStart:
      store.mutable_profile(event.from, event.consumer).clear();
      (void)store.profile(event.to, event.consumer);
      return;
    case PolicyKind::UserOwnership: {
      auto& origin = store.mutable_profile(event.from, event.consumer);
      auto& dest = store.mutable_profile(event.to, event.consumer);
      std::vector<ClickEvent> merged;
      merged.reserve(origin.size() + dest.size());
      // Stable chronological merge; on equal timestamps destination events come first.
      std::merge(dest.begin(), dest.end(), origin.begin(), origin.end(), std::back_inserter(merged), earlier);
      dest = std::move(merged);
      origin.clear();
      return;
    }
  }
}

}  // namespace portsim
