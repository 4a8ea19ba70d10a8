#pragma once

// Synthetic interaction/catalog generator with one under-served genre.

#include <cstdint>
#include <filesystem>
#include <string>

#include "portsim/dataset.hpp"

namespace portsim {

struct SyntheticConfig {
  std::size_t consumers = 500;
  std::size_t items = 200;
  std::size_t providers = 40;
  std::size_t genres = 6;
  double niche_consumer_share = 0.05;
  double niche_item_share = 0.15;
  std::size_t min_clicks = 15;
  std::size_t max_clicks = 40;
  /// Popularity multiplier for niche items; below 1 depresses their exposure.
  double niche_popularity = 0.3;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  RawDataset raw;
  std::string niche_genre;
};

/// Deterministic for a given config. The last genre is the niche genre.
SyntheticDataset generate_synthetic(const SyntheticConfig& config);

/// Writes interactions.csv and catalog.csv in the loader's input format.
void write_raw_dataset(const RawDataset& raw, const std::filesystem::path& dir);

}  // namespace portsim
