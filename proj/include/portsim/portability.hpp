#pragma once

// Profile portability conditions, laid out on two axes:
//
//                    permanent            non-permanent
//   exclusive        AlgorithmSpecific    ColdStart
//   non-exclusive    Universal            UserOwnership

#include <optional>
#include <string_view>

#include "portsim/common.hpp"
#include "portsim/ecosystem.hpp"

namespace portsim {

enum class PolicyKind { AlgorithmSpecific, ColdStart, UserOwnership, Universal };

/// A run condition: one of the four policies, or the single-recommender baseline.
enum class Condition { Baseline, AlgorithmSpecific, ColdStart, UserOwnership, Universal };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view s);
std::optional<PolicyKind> policy_of(Condition c);

struct PortabilityCoordinates {
  bool exclusive;  // profile cannot follow the consumer to a competitor
  bool permanent;  // origin keeps the profile after the consumer leaves
};

PortabilityCoordinates coordinates(PolicyKind p);

/// Store layout a policy requires: Universal shares one partition.
ProfileMode required_mode(PolicyKind p);

struct SwitchEvent {
  ConsumerIndex consumer = 0;
  RecommenderId from = 0;
  RecommenderId to = 0;
  std::uint32_t cycle = 0;

  friend bool operator==(const SwitchEvent&, const SwitchEvent&) = default;
};

/// Applies the policy for one switch. Only the switching consumer's lists
/// are touched. Throws ConfigError on a mode mismatch and ContractViolation
/// for from == to.
void apply_policy(PolicyKind policy, const SwitchEvent& event, ProfileStore& store);

}  // namespace portsim
