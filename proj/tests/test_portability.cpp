#include <gtest/gtest.h>

#include <algorithm>
#include <tuple>

#include "portsim/portability.hpp"
#include "portsim/rng.hpp"

using namespace portsim;

namespace {

void fill(ProfileStore& s, RecommenderId k, ConsumerIndex j, int n, std::uint32_t cycle) {
  for (int d = 0; d < n; ++d)
    s.append(k, {j, static_cast<ItemIndex>(d + 10 * k), static_cast<std::uint32_t>(1 + d % 3), cycle + d / 3});
}

std::vector<std::tuple<ItemIndex, std::uint32_t, std::uint32_t>> multiset(const ProfileStore& s, ConsumerIndex j) {
  std::vector<std::tuple<ItemIndex, std::uint32_t, std::uint32_t>> out;
  for (RecommenderId k = 0; k < s.recommender_count(); ++k)
    for (const auto& e : s.profile(k, j)) out.emplace_back(e.item, e.cycle, e.day);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Coordinates, FourQuadrants) {
  auto as = coordinates(PolicyKind::AlgorithmSpecific);
  auto cs = coordinates(PolicyKind::ColdStart);
  auto uo = coordinates(PolicyKind::UserOwnership);
  auto un = coordinates(PolicyKind::Universal);
  EXPECT_TRUE(as.exclusive && as.permanent);
  EXPECT_TRUE(cs.exclusive && !cs.permanent);
  EXPECT_TRUE(!uo.exclusive && !uo.permanent);
  EXPECT_TRUE(!un.exclusive && un.permanent);
  EXPECT_EQ(required_mode(PolicyKind::Universal), ProfileMode::Shared);
  EXPECT_EQ(required_mode(PolicyKind::ColdStart), ProfileMode::Partitioned);
}

TEST(Conditions, ParseAndPrint) {
  for (auto c : {Condition::Baseline, Condition::AlgorithmSpecific, Condition::ColdStart, Condition::UserOwnership,
                 Condition::Universal})
    EXPECT_EQ(parse_condition(to_string(c)), c);
  EXPECT_THROW(parse_condition("portable"), ConfigError);
  EXPECT_FALSE(policy_of(Condition::Baseline));
}

TEST(UserOwnership, TransfersWholeProfile) {
  ProfileStore s(ProfileMode::Partitioned, 2, 1);
  fill(s, 0, 0, 6, 1);
  const auto before = multiset(s, 0);
  apply_policy(PolicyKind::UserOwnership, {0, 0, 1, 3}, s);
  EXPECT_EQ(s.profile(1, 0).size(), 6u);
  EXPECT_TRUE(s.profile(0, 0).empty());
  EXPECT_EQ(multiset(s, 0), before);
}

TEST(UserOwnership, MergeIsChronological) {
  ProfileStore s(ProfileMode::Partitioned, 2, 1);
  s.append(1, {0, 50, 1, 1});
  s.append(1, {0, 51, 3, 3});
  s.append(0, {0, 1, 2, 2});
  s.append(0, {0, 2, 1, 4});
  apply_policy(PolicyKind::UserOwnership, {0, 0, 1, 4}, s);
  const auto p = s.profile(1, 0);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_TRUE(std::is_sorted(p.begin(), p.end(), earlier));
}

TEST(ColdStart, DeletesOrigin) {
  ProfileStore s(ProfileMode::Partitioned, 2, 1);
  fill(s, 0, 0, 6, 1);
  apply_policy(PolicyKind::ColdStart, {0, 0, 1, 3}, s);
  EXPECT_TRUE(s.profile(0, 0).empty());
  EXPECT_TRUE(s.profile(1, 0).empty());
  EXPECT_EQ(s.total_clicks(0), 0u);
}

TEST(AlgorithmSpecific, RoundTripKeepsOriginalProfile) {
  ProfileStore s(ProfileMode::Partitioned, 2, 1);
  fill(s, 0, 0, 4, 1);
  const std::vector<ClickEvent> original(s.profile(0, 0).begin(), s.profile(0, 0).end());
  apply_policy(PolicyKind::AlgorithmSpecific, {0, 0, 1, 3}, s);
  fill(s, 1, 0, 2, 4);
  apply_policy(PolicyKind::AlgorithmSpecific, {0, 1, 0, 4}, s);
  EXPECT_TRUE(std::equal(original.begin(), original.end(), s.profile(0, 0).begin(), s.profile(0, 0).end()));
  EXPECT_EQ(s.profile(1, 0).size(), 2u);
}

TEST(Policies, ModeMismatchIsConfigError) {
  ProfileStore partitioned(ProfileMode::Partitioned, 2, 1);
  ProfileStore shared(ProfileMode::Shared, 2, 1);
  EXPECT_THROW(apply_policy(PolicyKind::Universal, {0, 0, 1, 3}, partitioned), ConfigError);
  EXPECT_THROW(apply_policy(PolicyKind::ColdStart, {0, 0, 1, 3}, shared), ConfigError);
  EXPECT_THROW(apply_policy(PolicyKind::ColdStart, {0, 1, 1, 3}, partitioned), ContractViolation);
}

// Randomized switch sequences over many consumers: each policy's contract
// holds exactly, and only the switching consumer is touched.
TEST(Policies, RandomizedInvariants) {
  for (auto policy : {PolicyKind::AlgorithmSpecific, PolicyKind::ColdStart, PolicyKind::UserOwnership,
                      PolicyKind::Universal}) {
    Rng rng(derive_seed(99, {static_cast<std::uint64_t>(policy)}));
    const std::size_t n = 20;
    ProfileStore s(required_mode(policy), 2, n);
    std::vector<RecommenderId> attached(n, kGenericRecommender);
    int switches = 0;
    for (std::uint32_t cycle = 1; cycle <= 60; ++cycle) {
      for (std::uint32_t day = 1; day <= 3; ++day)
        for (ConsumerIndex j = 0; j < n; ++j) s.append(attached[j], {j, static_cast<ItemIndex>(rng.index(30)), day, cycle});
      for (ConsumerIndex j = 0; j < n; ++j) {
        if (rng.uniform() > 0.4) continue;
        const SwitchEvent ev{j, attached[j], static_cast<RecommenderId>(1 - attached[j]), cycle};
        const auto before_self = multiset(s, j);
        std::vector<decltype(multiset(s, 0))> others;
        for (ConsumerIndex o = 0; o < n; ++o) others.push_back(multiset(s, o));
        const auto digest = s.digest();

        apply_policy(policy, ev, s);
        attached[j] = ev.to;
        ++switches;

        switch (policy) {
          case PolicyKind::AlgorithmSpecific: EXPECT_EQ(s.digest(), digest); break;
          case PolicyKind::ColdStart:
            EXPECT_TRUE(s.profile(ev.from, j).empty());
            EXPECT_EQ(s.total_clicks(j), 0u);
            break;
          case PolicyKind::UserOwnership:
            EXPECT_EQ(multiset(s, j), before_self);
            EXPECT_TRUE(s.profile(ev.from, j).empty());
            break;
          case PolicyKind::Universal: {
            auto a = s.profile(0, j), b = s.profile(1, j);
            EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
            EXPECT_EQ(s.digest(), digest);
            break;
          }
        }
        for (ConsumerIndex o = 0; o < n; ++o)
          if (o != j) EXPECT_EQ(multiset(s, o), others[o]);
      }
    }
    EXPECT_GE(switches, 200);
  }
}
