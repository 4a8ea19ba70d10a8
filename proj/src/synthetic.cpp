#include "portsim/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "portsim/rng.hpp"

namespace portsim {
namespace {

std::string make_id(char prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
  return buf;
}

std::string genre_name(std::size_t g) { return "genre" + std::to_string(g); }

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.genres < 2 || cfg.items == 0 || cfg.consumers == 0 || cfg.providers < 2)
    throw ConfigError("synthetic dataset needs >= 2 genres, >= 2 providers, items and consumers");
  if (cfg.min_clicks == 0 || cfg.min_clicks > cfg.max_clicks || cfg.max_clicks > cfg.items)
    throw ConfigError("synthetic click range must satisfy 0 < min <= max <= items");

  Rng rng(derive_seed(cfg.seed, {0x5359}));
  const std::size_t niche = cfg.genres - 1;
  const std::size_t mainstream = cfg.genres - 1;
  const auto n_niche_items = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.items * cfg.niche_item_share)));
  const auto n_niche_providers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(cfg.providers * cfg.niche_item_share)), 1, cfg.providers - 1);
  const auto n_niche_consumers =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.consumers * cfg.niche_consumer_share)));

  SyntheticDataset out;
  out.niche_genre = genre_name(niche);
  auto& raw = out.raw;

  // Items: the first n_niche_items carry the niche genre, the rest one or two mainstream genres.
  std::vector<std::vector<std::size_t>> item_genres(cfg.items);
  std::vector<double> popularity(cfg.items);
  for (std::size_t i = 0; i < cfg.items; ++i) {
    CatalogEntry e;
    e.item_id = make_id('i', i + 1, 4);
    if (i < n_niche_items) {
      item_genres[i].push_back(niche);
      e.provider_id = make_id('p', 1 + i % n_niche_providers, 3);
      popularity[i] = cfg.niche_popularity;
    } else {
      const std::size_t g = rng.index(mainstream);
      item_genres[i].push_back(g);
      if (rng.uniform() < 0.4) {
        const std::size_t h = rng.index(mainstream);
        if (h != g) item_genres[i].push_back(h);
      }
      e.provider_id = make_id('p', 1 + n_niche_providers + i % (cfg.providers - n_niche_providers), 3);
      popularity[i] = 1.0;
    }
    // Zipf-like popularity skew.
    popularity[i] *= 1.0 / std::sqrt(1.0 + rng.index(cfg.items));
    std::sort(item_genres[i].begin(), item_genres[i].end());
    for (auto g : item_genres[i]) e.genres.push_back(genre_name(g));
    raw.catalog.push_back(std::move(e));
  }

  std::int64_t ts = 0;
  std::vector<double> w(cfg.items);
  std::vector<double> taste(cfg.genres);
  for (std::size_t j = 0; j < cfg.consumers; ++j) {
    const bool is_niche = j < n_niche_consumers;
    double total = 0.0;
    for (std::size_t g = 0; g < cfg.genres; ++g) {
      taste[g] = g == niche ? (is_niche ? 0.0 : 0.02) : -std::log(1.0 - rng.uniform());
      total += taste[g];
    }
    for (auto& t : taste) t /= total;
    if (is_niche) {
      for (auto& t : taste) t *= 0.3;
      taste[niche] = 0.7;
    }
    for (std::size_t i = 0; i < cfg.items; ++i) {
      double affinity = 0.0;
      for (auto g : item_genres[i]) affinity += taste[g];
      w[i] = popularity[i] * (0.05 + affinity * affinity * 20.0);
    }
    const std::size_t clicks = cfg.min_clicks + rng.index(cfg.max_clicks - cfg.min_clicks + 1);
    const std::string cid = make_id('u', j + 1, 4);
    for (std::size_t c = 0; c < clicks; ++c) {
      const double sum = std::accumulate(w.begin(), w.end(), 0.0);
      if (sum <= 0.0) break;
      double r = rng.uniform() * sum;
      std::size_t pick = cfg.items - 1;
      for (std::size_t i = 0; i < cfg.items; ++i) {
        if (w[i] <= 0.0) continue;
        pick = i;
        if (r < w[i]) break;
        r -= w[i];
      }
      w[pick] = 0.0;
      raw.interactions.push_back({cid, raw.catalog[pick].item_id, 1.0, ++ts});
    }
  }
  return out;
}

void write_raw_dataset(const RawDataset& raw, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream in(dir / "interactions.csv");
  std::ofstream cat(dir / "catalog.csv");
  if (!in || !cat) throw Error("cannot write dataset under " + dir.string());
  in << "consumer_id,item_id,weight,timestamp\n";
  for (const auto& r : raw.interactions) {
    in << r.consumer_id << ',' << r.item_id << ',' << r.weight;
    if (r.timestamp) in << ',' << *r.timestamp;
    in << '\n';
  }
  cat << "item_id,provider_id,genres\n";
  for (const auto& e : raw.catalog) {
    cat << e.item_id << ',' << e.provider_id << ',';
    for (std::size_t g = 0; g < e.genres.size(); ++g) cat << (g ? "|" : "") << e.genres[g];
    cat << '\n';
  }
}

}  // namespace portsim
