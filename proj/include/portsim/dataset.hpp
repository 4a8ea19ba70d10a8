#pragma once

// Loading, k-core filtering and niche labeling of interaction datasets.
//
// Interactions file:  consumer_id,item_id,weight[,timestamp]
// Catalog file:       item_id,provider_id,genres   (genres '|'-separated)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "portsim/common.hpp"

namespace portsim {

struct RawInteraction {
  std::string consumer_id;
  std::string item_id;
  double weight = 1.0;
  std::optional<std::int64_t> timestamp;
};

struct CatalogEntry {
  std::string item_id;
  std::string provider_id;
  std::vector<std::string> genres;
};

struct GenreSpace {
  std::vector<std::string> genres;
  std::size_t niche = 0;

  std::size_t size() const { return genres.size(); }
  /// Index of a genre name; throws Error naming the genre if absent.
  std::size_t index_of(const std::string& genre) const;
  const std::string& niche_name() const { return genres.at(niche); }
};

struct LoadReport {
  std::size_t dropped_catalog_rows = 0;       // items without a provider
  std::size_t dropped_interactions = 0;       // interactions on those items
  std::size_t unknown_item_interactions = 0;  // interactions on ids absent from the catalog
  std::size_t items_without_genres = 0;
};

struct RawDataset {
  std::vector<RawInteraction> interactions;
  std::vector<CatalogEntry> catalog;
  LoadReport report;
};

RawDataset load_dataset(const std::filesystem::path& interactions_path, const std::filesystem::path& catalog_path);

/// Stream variant of load_dataset; names are used in error messages only.
RawDataset parse_dataset(std::istream& interactions, std::istream& catalog,
                         const std::string& interactions_name = "interactions",
                         const std::string& catalog_name = "catalog");

/// Maximal subset in which every consumer has >= k distinct items and every
/// item >= k distinct consumers. Input order is preserved.
std::vector<RawInteraction> k_core_filter(std::span<const RawInteraction> interactions, int k);

/// Sorted distinct genres of the catalog. niche is left at 0.
GenreSpace make_genre_space(std::span<const CatalogEntry> catalog);

using FeatureVector = std::vector<double>;

std::map<std::string, FeatureVector> build_item_features(std::span<const CatalogEntry> catalog,
                                                         const GenreSpace& space);

/// Weight-weighted genre histogram per consumer, normalized to sum to 1.
std::map<std::string, FeatureVector> build_preference_vectors(
    std::span<const RawInteraction> interactions, const std::map<std::string, FeatureVector>& item_features);

struct PercentileBand {
  double lower = 0.30;
  double upper = 0.80;
};

/// Per-genre statistics behind niche selection; exposed for reporting and tests.
struct GenreStats {
  std::vector<double> supply_share;
  std::vector<double> demand_share;
  std::vector<double> mismatch;
  double band_low = 0.0;
  double band_high = 0.0;
  std::vector<bool> in_band;
};

GenreStats genre_statistics(std::span<const RawInteraction> interactions, std::span<const CatalogEntry> catalog,
                            const GenreSpace& space, PercentileBand band = {});

/// Index (into space.genres) of the genre with the largest demand-supply
/// mismatch among genres inside the demand-share percentile band.
std::size_t select_niche_genre(std::span<const RawInteraction> interactions, std::span<const CatalogEntry> catalog,
                               const GenreSpace& space, PercentileBand band = {});

/// Linear-interpolation percentile (q in [0,1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

std::map<std::string, Group> label_providers(std::span<const CatalogEntry> catalog, const GenreSpace& space);

std::map<std::string, Group> label_consumers(const std::map<std::string, FeatureVector>& preferences,
                                             const GenreSpace& space);

struct PipelineConfig {
  int k_core = 1;
  std::optional<std::string> niche_genre_override;
  PercentileBand band;
};

/// Dense, index-addressed dataset consumed by the simulator. Consumers,
/// items and providers are sorted by identifier.
struct LabeledDataset {
  std::vector<RawInteraction> interactions;
  std::vector<CatalogEntry> catalog;
  GenreSpace genre_space;

  std::vector<std::string> consumer_ids;
  std::vector<FeatureVector> preferences;
  std::vector<Group> consumer_groups;

  std::vector<std::string> item_ids;
  std::vector<FeatureVector> item_features;
  std::vector<ProviderIndex> item_provider;

  std::vector<std::string> provider_ids;
  std::vector<Group> provider_groups;

  LoadReport load_report;
  int k_core = 1;

  std::size_t consumer_count() const { return consumer_ids.size(); }
  std::size_t item_count() const { return item_ids.size(); }
  std::size_t provider_count() const { return provider_ids.size(); }
  bool item_has_niche_genre(ItemIndex i) const { return item_features[i][genre_space.niche] != 0.0; }

  /// Digest over interactions, catalog and niche genre; stable under
  /// reordering of input rows.
  std::uint64_t digest() const;
};

LabeledDataset prepare_dataset(RawDataset raw, const PipelineConfig& config);

/// Writes interactions.csv, catalog.csv, consumers.csv, providers.csv and
/// meta.json under dir.
void save_prepared(const LabeledDataset& data, const std::filesystem::path& dir);

/// Reads a directory written by save_prepared. Labels are recomputed from the
/// stored rows using the recorded niche genre, so they always agree.
LabeledDataset load_prepared(const std::filesystem::path& dir);

}  // namespace portsim
