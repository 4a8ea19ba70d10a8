#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "portsim/dataset.hpp"
#include "portsim/rng.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace portsim;
using portsim::fixtures::parse;

namespace {

std::vector<RawInteraction> random_graph(Rng& rng, std::size_t consumers, std::size_t items, double density) {
  std::vector<RawInteraction> out;
  for (std::size_t c = 0; c < consumers; ++c)
    for (std::size_t i = 0; i < items; ++i)
      if (rng.uniform() < density) out.push_back({"c" + std::to_string(c), "i" + std::to_string(i), 1.0, std::nullopt});
  return out;
}

std::set<std::pair<std::string, std::string>> edge_set(std::span<const RawInteraction> xs) {
  std::set<std::pair<std::string, std::string>> s;
  for (const auto& r : xs) s.emplace(r.consumer_id, r.item_id);
  return s;
}

// One single-genre item per (genre, slot); item k of genre g belongs to
// provider "p<g>_<k>". demand is spread evenly over the genre's items.
struct GenreSpec {
  std::string name;
  int providers;
  int items;
  double demand;
};

std::pair<std::vector<RawInteraction>, std::vector<CatalogEntry>> niche_fixture(const std::vector<GenreSpec>& specs) {
  std::vector<RawInteraction> inter;
  std::vector<CatalogEntry> cat;
  int consumer = 0;
  for (const auto& g : specs) {
    for (int k = 0; k < g.items; ++k) {
      const std::string item = g.name + "_" + std::to_string(k);
      cat.push_back({item, "p" + g.name + "_" + std::to_string(k % g.providers), {g.name}});
      inter.push_back({"u" + std::to_string(consumer++), item, g.demand / g.items, std::nullopt});
    }
  }
  return {inter, cat};
}

}  // namespace

// ------------------------------------------------------------------ loading

TEST(LoadDataset, IdentityLoad) {
  auto raw = parse("consumer_id,item_id,weight\na,i1,1\na,i2,2\nb,i1,1\n", "item_id,provider_id,genres\ni1,p1,X\ni2,p2,X|Y\n");
  EXPECT_EQ(raw.interactions.size(), 3u);
  EXPECT_EQ(raw.catalog.size(), 2u);
  EXPECT_EQ(raw.catalog[1].genres, (std::vector<std::string>{"X", "Y"}));
}

TEST(LoadDataset, DropsItemsWithoutProvider) {
  auto raw = parse("consumer_id,item_id,weight\na,i1,1\na,i2,1\nb,i2,1\n", "item_id,provider_id,genres\ni1,p1,X\ni2,,X\n");
  EXPECT_EQ(raw.report.dropped_catalog_rows, 1u);
  EXPECT_EQ(raw.report.dropped_interactions, 2u);
  EXPECT_EQ(raw.catalog.size(), 1u);
  EXPECT_EQ(raw.interactions.size(), 1u);
}

TEST(LoadDataset, CountsUnknownItems) {
  auto raw = parse("consumer_id,item_id,weight\na,i1,1\na,zz,1\n", "item_id,provider_id,genres\ni1,p1,X\n");
  EXPECT_EQ(raw.report.unknown_item_interactions, 1u);
  EXPECT_EQ(raw.interactions.size(), 1u);
}

TEST(LoadDataset, DropsItemsWithoutGenres) {
  auto raw = parse("consumer_id,item_id,weight\na,i1,1\na,i2,1\n", "item_id,provider_id,genres\ni1,p1,X\ni2,p1,\n");
  EXPECT_EQ(raw.report.items_without_genres, 1u);
  EXPECT_EQ(raw.interactions.size(), 1u);
}

TEST(LoadDataset, MalformedRowNamesLine) {
  try {
    parse("consumer_id,item_id,weight\na,i1,1\na,i1\n", "item_id,provider_id,genres\ni1,p1,X\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("consumer_id,item_id,weight\na,i1,abc\n", "item_id,provider_id,genres\ni1,p1,X\n"), ParseError);
  EXPECT_THROW(parse("consumer_id,item_id,weight\na,i1,-1\n", "item_id,provider_id,genres\ni1,p1,X\n"), ParseError);
  EXPECT_THROW(parse("user,item\n", "item_id,provider_id,genres\ni1,p1,X\n"), ParseError);
}

TEST(LoadDataset, DuplicateTimestampedPairRejected) {
  EXPECT_THROW(parse("consumer_id,item_id,weight,timestamp\na,i1,1,5\na,i1,1,5\n", "item_id,provider_id,genres\ni1,p1,X\n"),
               ParseError);
  EXPECT_NO_THROW(parse("consumer_id,item_id,weight,timestamp\na,i1,1,5\na,i1,1,6\n", "item_id,provider_id,genres\ni1,p1,X\n"));
}

TEST(LoadDataset, EmptyResultIsAnError) {
  EXPECT_THROW(parse("consumer_id,item_id,weight\na,i1,1\n", "item_id,provider_id,genres\ni1,,X\n"), EmptyDatasetError);
}

TEST(LoadDataset, MissingFile) {
  EXPECT_THROW(load_dataset("/nonexistent/a.csv", "/nonexistent/b.csv"), Error);
}

// ------------------------------------------------------------------ k-core

TEST(KCore, AlreadyCoreUnchanged) {
  std::vector<RawInteraction> xs;
  for (auto c : {"a", "b", "c"})
    for (auto i : {"x", "y", "z"}) xs.push_back({c, i, 1.0, std::nullopt});
  const auto out = k_core_filter(xs, 3);
  ASSERT_EQ(out.size(), xs.size());
  for (std::size_t n = 0; n < xs.size(); ++n) EXPECT_EQ(out[n].item_id, xs[n].item_id);
}

TEST(KCore, StarCollapses) {
  std::vector<RawInteraction> xs;
  for (int i = 0; i < 5; ++i) xs.push_back({"c", "i" + std::to_string(i), 1.0, std::nullopt});
  EXPECT_TRUE(k_core_filter(xs, 2).empty());
}

TEST(KCore, RandomGraphMatchesOracle) {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xs = random_graph(rng, 30, 30, 0.12);
    EXPECT_EQ(edge_set(k_core_filter(xs, 3)), oracle::kcore(edge_set(xs), 3)) << "trial " << trial;
  }
}

TEST(KCore, Idempotent) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto xs = random_graph(rng, 25, 20, 0.2);
    const auto once = k_core_filter(xs, 3);
    EXPECT_EQ(edge_set(k_core_filter(once, 3)), edge_set(once));
  }
}

TEST(KCore, RepeatedPairsCountOnce) {
  // Two interactions on the same pair do not make degree 2.
  std::vector<RawInteraction> xs{{"a", "x", 1, 1}, {"a", "x", 1, 2}, {"b", "x", 1, std::nullopt}};
  EXPECT_TRUE(k_core_filter(xs, 2).empty());
}

TEST(KCore, RejectsNonPositiveK) {
  EXPECT_THROW(k_core_filter({}, 0), ContractViolation);
}

// ------------------------------------------------------------------ features

TEST(Features, OneHotGenres) {
  std::vector<CatalogEntry> cat{{"a", "p", {"Romance"}}, {"b", "p", {"Action", "Romance"}}};
  const auto space = make_genre_space(cat);
  ASSERT_EQ(space.genres, (std::vector<std::string>{"Action", "Romance"}));
  const auto f = build_item_features(cat, space);
  EXPECT_EQ(f.at("a"), (FeatureVector{0, 1}));
  EXPECT_EQ(f.at("b"), (FeatureVector{1, 1}));
}

TEST(Features, FiveItemTable) {
  std::vector<CatalogEntry> cat{{"i1", "p", {"A"}},      {"i2", "p", {"B", "C"}}, {"i3", "p", {"C"}},
                                {"i4", "p", {"A", "B", "C"}}, {"i5", "p", {"B"}}};
  const auto f = build_item_features(cat, make_genre_space(cat));
  const std::map<std::string, FeatureVector> expected{
      {"i1", {1, 0, 0}}, {"i2", {0, 1, 1}}, {"i3", {0, 0, 1}}, {"i4", {1, 1, 1}}, {"i5", {0, 1, 0}}};
  EXPECT_EQ(f, expected);
}

TEST(Features, UnknownGenreNamed) {
  GenreSpace space{{"A"}, 0};
  std::vector<CatalogEntry> cat{{"i", "p", {"Zed"}}};
  try {
    build_item_features(cat, space);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Zed"), std::string::npos);
  }
}

TEST(Preferences, SingleInteractionIsOneHot) {
  std::map<std::string, FeatureVector> f{{"r", {0, 1}}};
  std::vector<RawInteraction> xs{{"u", "r", 1.0, std::nullopt}};
  EXPECT_EQ(build_preference_vectors(xs, f).at("u"), (FeatureVector{0, 1}));
}

TEST(Preferences, DisjointEqualWeights) {
  std::map<std::string, FeatureVector> f{{"a", {1, 0}}, {"b", {0, 1}}};
  std::vector<RawInteraction> xs{{"u", "a", 2.0, std::nullopt}, {"u", "b", 2.0, std::nullopt}};
  EXPECT_EQ(build_preference_vectors(xs, f).at("u"), (FeatureVector{0.5, 0.5}));
}

TEST(Preferences, MixedWeightsHandComputed) {
  std::map<std::string, FeatureVector> f{{"a", {1, 0, 0}}, {"b", {1, 1, 0}}, {"c", {0, 0, 1}}, {"d", {0, 1, 1}}};
  std::vector<RawInteraction> xs{{"u", "a", 1, std::nullopt},
                                 {"u", "b", 2, std::nullopt},
                                 {"u", "c", 3, std::nullopt},
                                 {"u", "d", 0.5, std::nullopt}};
  // Histogram: A = 1 + 2 = 3, B = 2 + 0.5 = 2.5, C = 3 + 0.5 = 3.5; total 9.
  const auto p = build_preference_vectors(xs, f).at("u");
  EXPECT_NEAR(p[0], 3.0 / 9, 1e-15);
  EXPECT_NEAR(p[1], 2.5 / 9, 1e-15);
  EXPECT_NEAR(p[2], 3.5 / 9, 1e-15);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(Preferences, ZeroWeightConsumerIsAnError) {
  std::map<std::string, FeatureVector> f{{"a", {1, 0}}};
  std::vector<RawInteraction> xs{{"u", "a", 0.0, std::nullopt}};
  EXPECT_THROW(build_preference_vectors(xs, f), Error);
}

// ------------------------------------------------------------------ niche selection

TEST(Percentile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(percentile({4, 8, 20, 30, 40, 60}, 0.3), 14.0);
  EXPECT_DOUBLE_EQ(percentile({60, 4, 40, 8, 30, 20}, 0.8), 40.0);
  EXPECT_DOUBLE_EQ(percentile({5}, 0.5), 5.0);
}

TEST(NicheSelection, TwoIdenticalGenresTieToFirst) {
  auto [xs, cat] = niche_fixture({{"B", 1, 1, 10}, {"A", 1, 1, 10}});
  const auto space = make_genre_space(cat);
  EXPECT_EQ(space.genres[select_niche_genre(xs, cat, space)], "A");
}

// Six genres; C has ~3x more demand share than supply share and sits inside
// the band. Supply: 3 providers x 3 items -> 3 for every genre except C
// (1 x 1 -> 1); total 16. Demand: A4 B8 D20 C30 E40 F60 (total 162).
// Band over demand: 30th pct = 14, 80th pct = 40 -> {D, C, E}.
// Mismatch: D 20/162-3/16 < 0, C 30/162-1/16 = 0.1227, E 40/162-3/16 = 0.0594.
TEST(NicheSelection, UnderSuppliedGenreInsideBand) {
  auto [xs, cat] = niche_fixture(
      {{"A", 3, 3, 4}, {"B", 3, 3, 8}, {"C", 1, 1, 30}, {"D", 3, 3, 20}, {"E", 3, 3, 40}, {"F", 3, 3, 60}});
  const auto space = make_genre_space(cat);
  const auto st = genre_statistics(xs, cat, space);
  EXPECT_NEAR(st.supply_share[2], 1.0 / 16, 1e-12);
  EXPECT_NEAR(st.demand_share[2], 30.0 / 162, 1e-12);
  EXPECT_NEAR(st.band_low, 14.0 / 162, 1e-12);
  EXPECT_NEAR(st.band_high, 40.0 / 162, 1e-12);
  EXPECT_EQ(st.in_band, (std::vector<bool>{false, false, true, true, true, false}));
  EXPECT_EQ(space.genres[select_niche_genre(xs, cat, space)], "C");
}

// F has the largest mismatch overall (60/162 - 1/14) but lies above the 80th
// percentile; the best in-band genre wins instead.
TEST(NicheSelection, HighestMismatchAboveBandIsSkipped) {
  auto [xs, cat] = niche_fixture(
      {{"A", 3, 3, 4}, {"B", 3, 3, 8}, {"C", 2, 2, 30}, {"D", 3, 3, 20}, {"E", 3, 3, 40}, {"F", 1, 1, 60}});
  const auto space = make_genre_space(cat);
  const auto st = genre_statistics(xs, cat, space);
  const auto best_overall = std::max_element(st.mismatch.begin(), st.mismatch.end()) - st.mismatch.begin();
  EXPECT_EQ(space.genres[best_overall], "F");
  EXPECT_FALSE(st.in_band[5]);
  EXPECT_EQ(space.genres[select_niche_genre(xs, cat, space)], "C");
}

TEST(NicheSelection, ScaleInvariant) {
  auto [xs, cat] = niche_fixture(
      {{"A", 3, 3, 4}, {"B", 3, 3, 8}, {"C", 1, 1, 30}, {"D", 3, 3, 20}, {"E", 3, 3, 40}, {"F", 3, 3, 60}});
  const auto space = make_genre_space(cat);
  const auto base = select_niche_genre(xs, cat, space);
  for (double s : {0.01, 7.3, 1000.0}) {
    auto scaled = xs;
    for (auto& r : scaled) r.weight *= s;
    EXPECT_EQ(select_niche_genre(scaled, cat, space), base);
  }
}

TEST(NicheSelection, EmptyBandAsksForOverride) {
  auto [xs, cat] = niche_fixture({{"A", 1, 1, 10}, {"B", 1, 1, 30}});
  const auto space = make_genre_space(cat);
  try {
    select_niche_genre(xs, cat, space);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("niche"), std::string::npos);
  }
}

// ------------------------------------------------------------------ labels

TEST(Labels, ProviderDominantGenre) {
  std::vector<CatalogEntry> cat{{"1", "P", {"Romance"}}, {"2", "P", {"Romance"}}, {"3", "P", {"Romance"}},
                                {"4", "P", {"Action"}},  {"5", "Q", {"Action"}}};
  auto space = make_genre_space(cat);
  space.niche = space.index_of("Romance");
  const auto labels = label_providers(cat, space);
  EXPECT_EQ(labels.at("P"), Group::Niche);
  EXPECT_EQ(labels.at("Q"), Group::Generic);
}

TEST(Labels, ProviderTieGoesToEarlierGenre) {
  std::vector<CatalogEntry> cat{{"1", "P", {"Adventure"}}, {"2", "P", {"Adventure"}}, {"3", "P", {"Drama"}},
                                {"4", "P", {"Drama"}}};
  auto space = make_genre_space(cat);
  space.niche = space.index_of("Adventure");
  EXPECT_EQ(label_providers(cat, space).at("P"), Group::Niche);
  space.niche = space.index_of("Drama");
  EXPECT_EQ(label_providers(cat, space).at("P"), Group::Generic);
}

TEST(Labels, ConsumerArgmax) {
  GenreSpace space{{"A", "B", "C"}, 1};
  std::map<std::string, FeatureVector> prefs{{"one_hot", {0, 1, 0}}, {"uniform", {1.0 / 3, 1.0 / 3, 1.0 / 3}}};
  const auto l = label_consumers(prefs, space);
  EXPECT_EQ(l.at("one_hot"), Group::Niche);
  EXPECT_EQ(l.at("uniform"), Group::Generic);
}

TEST(Labels, FortyConsumerEnumeration) {
  GenreSpace space{{"A", "B", "C", "D"}, 2};
  Rng rng(40);
  std::map<std::string, FeatureVector> prefs;
  for (int j = 0; j < 40; ++j) {
    FeatureVector p(4);
    double s = 0;
    for (auto& x : p) s += (x = std::floor(rng.uniform() * 4));  // small integers produce ties
    if (s == 0) p[0] = s = 1;
    for (auto& x : p) x /= s;
    prefs["c" + std::to_string(j)] = p;
  }
  std::size_t expected = 0;
  for (const auto& [id, p] : prefs) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < p.size(); ++g)
      if (p[g] > p[best]) best = g;
    expected += best == 2;
  }
  const auto labels = label_consumers(prefs, space);
  const auto niche = std::count_if(labels.begin(), labels.end(), [](auto& kv) { return kv.second == Group::Niche; });
  EXPECT_EQ(static_cast<std::size_t>(niche), expected);
  EXPECT_EQ(labels.size(), 40u);
}

// ------------------------------------------------------------------ prepare / persist

TEST(Prepare, LabelsAreTotalAndDeterministic) {
  const auto a = fixtures::small_dataset(5);
  const auto b = fixtures::small_dataset(5);
  EXPECT_EQ(a.consumer_groups, b.consumer_groups);
  EXPECT_EQ(a.provider_groups, b.provider_groups);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.consumer_groups.size(), a.consumer_count());
  EXPECT_EQ(a.provider_groups.size(), a.provider_count());
  for (const auto& p : a.preferences) {
    double s = 0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Prepare, OverrideMustNameKnownGenre) {
  auto s = generate_synthetic({});
  PipelineConfig p;
  p.niche_genre_override = "no-such-genre";
  EXPECT_ANY_THROW(prepare_dataset(std::move(s.raw), p));
}

TEST(Prepare, SaveLoadRoundTrip) {
  const auto d = fixtures::small_dataset(8);
  const auto dir = std::filesystem::temp_directory_path() / "portsim_test_prepared";
  std::filesystem::remove_all(dir);
  save_prepared(d, dir);
  const auto e = load_prepared(dir);
  EXPECT_EQ(d.digest(), e.digest());
  EXPECT_EQ(d.consumer_ids, e.consumer_ids);
  EXPECT_EQ(d.consumer_groups, e.consumer_groups);
  EXPECT_EQ(d.provider_groups, e.provider_groups);
  EXPECT_EQ(d.preferences, e.preferences);
  EXPECT_EQ(d.genre_space.niche_name(), e.genre_space.niche_name());
  std::filesystem::remove_all(dir);
}
