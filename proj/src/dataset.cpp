#include "portsim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "portsim/csv.hpp"

namespace portsim {

using nlohmann::json;

std::size_t GenreSpace::index_of(const std::string& genre) const {
  auto it = std::find(genres.begin(), genres.end(), genre);
  if (it == genres.end()) throw Error("unknown genre '" + genre + "'");
  return static_cast<std::size_t>(it - genres.begin());
}

// ---------------------------------------------------------------- loading

namespace {

double parse_weight(const std::string& s, const std::string& file, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(file, line, "weight '" + s + "' is not a number");
  if (v < 0) throw ParseError(file, line, "weight must be non-negative");
  return v;
}

std::int64_t parse_timestamp(const std::string& s, const std::string& file, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(file, line, "timestamp '" + s + "' is not an integer");
  return v;
}

std::vector<std::string> split_genres(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('|', start);
    if (end == std::string::npos) end = s.size();
    std::string g = s.substr(start, end - start);
    if (!g.empty() && std::find(out.begin(), out.end(), g) == out.end()) out.push_back(std::move(g));
    start = end + 1;
  }
  return out;
}

}  // namespace

RawDataset parse_dataset(std::istream& interactions, std::istream& catalog, const std::string& interactions_name,
                         const std::string& catalog_name) {
  RawDataset out;

  // Catalog first so interactions can be checked against it.
  CsvReader cat(catalog, catalog_name);
  cat.expect_header({"item_id", "provider_id", "genres"});
  std::set<std::string> kept_items;
  std::set<std::string> dropped_items;
  std::set<std::string> seen_items;
  std::vector<std::string> row;
  while (cat.next(row)) {
    if (row.size() != 3) cat.fail("expected 3 columns, found " + std::to_string(row.size()));
    if (row[0].empty()) cat.fail("empty item_id");
    if (!seen_items.insert(row[0]).second) cat.fail("duplicate item_id '" + row[0] + "'");
    CatalogEntry e{row[0], row[1], split_genres(row[2])};
    if (e.provider_id.empty()) {
      ++out.report.dropped_catalog_rows;
      dropped_items.insert(e.item_id);
      continue;
    }
    if (e.genres.empty()) {
      ++out.report.items_without_genres;
      dropped_items.insert(e.item_id);
      continue;
    }
    kept_items.insert(e.item_id);
    out.catalog.push_back(std::move(e));
  }

  CsvReader in(interactions, interactions_name);
  const auto header = in.header();
  bool with_ts = false;
  if (header == std::vector<std::string>{"consumer_id", "item_id", "weight", "timestamp"}) {
    with_ts = true;
  } else if (header != std::vector<std::string>{"consumer_id", "item_id", "weight"}) {
    in.fail_header("expected header consumer_id,item_id,weight[,timestamp]");
  }
  const std::size_t cols = with_ts ? 4 : 3;
  std::set<std::tuple<std::string, std::string, std::optional<std::int64_t>>> seen_pairs;
  while (in.next(row)) {
    if (row.size() != cols)
      in.fail("expected " + std::to_string(cols) + " columns, found " + std::to_string(row.size()));
    if (row[0].empty() || row[1].empty()) in.fail("empty consumer_id or item_id");
    RawInteraction r{row[0], row[1], parse_weight(row[2], in.name(), in.line()), std::nullopt};
    if (with_ts && !row[3].empty()) r.timestamp = parse_timestamp(row[3], in.name(), in.line());
    if (!seen_pairs.emplace(r.consumer_id, r.item_id, r.timestamp).second)
      in.fail("duplicate interaction for (" + r.consumer_id + ", " + r.item_id + ") with the same timestamp");
    if (dropped_items.count(r.item_id)) {
      ++out.report.dropped_interactions;
      continue;
    }
    if (!kept_items.count(r.item_id)) {
      ++out.report.unknown_item_interactions;
      continue;
    }
    out.interactions.push_back(std::move(r));
  }

  if (out.interactions.empty() || out.catalog.empty())
    throw EmptyDatasetError("dataset is empty after dropping items without provider or genres");
  return out;
}

RawDataset load_dataset(const std::filesystem::path& interactions_path, const std::filesystem::path& catalog_path) {
  std::ifstream in(interactions_path);
  if (!in) throw Error("cannot open " + interactions_path.string());
  std::ifstream cat(catalog_path);
  if (!cat) throw Error("cannot open " + catalog_path.string());
  return parse_dataset(in, cat, interactions_path.string(), catalog_path.string());
}

// ---------------------------------------------------------------- k-core

std::vector<RawInteraction> k_core_filter(std::span<const RawInteraction> interactions, int k) {
  if (k < 1) throw ContractViolation("k-core requires k >= 1");

  std::unordered_map<std::string, std::uint32_t> consumer_index, item_index;
  auto intern = [](auto& map, const std::string& key) {
    return map.emplace(key, static_cast<std::uint32_t>(map.size())).first->second;
  };
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(interactions.size());
  for (const auto& r : interactions) edges.emplace_back(intern(consumer_index, r.consumer_id), intern(item_index, r.item_id));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  // Nodes 0..C-1 are consumers, C.. are items.
  const std::size_t nc = consumer_index.size();
  const std::size_t n = nc + item_index.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (auto [c, i] : edges) {
    adj[c].push_back(static_cast<std::uint32_t>(nc + i));
    adj[nc + i].push_back(c);
  }
  std::vector<std::size_t> degree(n);
  std::vector<char> alive(n, 1);
  std::vector<std::uint32_t> queue;
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = adj[v].size();
    if (degree[v] < static_cast<std::size_t>(k)) {
      alive[v] = 0;
      queue.push_back(static_cast<std::uint32_t>(v));
    }
  }
  while (!queue.empty()) {
    const auto v = queue.back();
    queue.pop_back();
    for (auto u : adj[v]) {
      if (!alive[u]) continue;
      if (--degree[u] < static_cast<std::size_t>(k)) {
        alive[u] = 0;
        queue.push_back(u);
      }
    }
  }

  std::vector<RawInteraction> out;
  for (const auto& r : interactions) {
    if (alive[consumer_index.at(r.consumer_id)] && alive[nc + item_index.at(r.item_id)]) out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------- features

GenreSpace make_genre_space(std::span<const CatalogEntry> catalog) {
  std::set<std::string> all;
  for (const auto& e : catalog) all.insert(e.genres.begin(), e.genres.end());
  GenreSpace space;
  space.genres.assign(all.begin(), all.end());
  return space;
}

std::map<std::string, FeatureVector> build_item_features(std::span<const CatalogEntry> catalog,
                                                         const GenreSpace& space) {
  std::map<std::string, FeatureVector> out;
  for (const auto& e : catalog) {
    if (e.genres.empty()) throw Error("item '" + e.item_id + "' has no genres");
    FeatureVector f(space.size(), 0.0);
    for (const auto& g : e.genres) f[space.index_of(g)] = 1.0;
    out.emplace(e.item_id, std::move(f));
  }
  return out;
}

std::map<std::string, FeatureVector> build_preference_vectors(
    std::span<const RawInteraction> interactions, const std::map<std::string, FeatureVector>& item_features) {
  std::map<std::string, FeatureVector> out;
  const std::size_t dims = item_features.empty() ? 0 : item_features.begin()->second.size();
  for (const auto& r : interactions) {
    auto it = item_features.find(r.item_id);
    if (it == item_features.end()) throw Error("interaction references unknown item '" + r.item_id + "'");
    auto& p = out.try_emplace(r.consumer_id, dims, 0.0).first->second;
    for (std::size_t g = 0; g < dims; ++g) p[g] += r.weight * it->second[g];
  }
  for (auto& [id, p] : out) {
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (!(total > 0.0)) throw Error("consumer '" + id + "' has zero total interaction weight");
    for (auto& x : p) x /= total;
  }
  return out;
}

// ---------------------------------------------------------------- niche selection

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractViolation("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

GenreStats genre_statistics(std::span<const RawInteraction> interactions, std::span<const CatalogEntry> catalog,
                            const GenreSpace& space, PercentileBand band) {
  const std::size_t n = space.size();
  std::vector<double> items(n, 0.0);
  std::vector<std::set<std::string>> providers(n);
  std::unordered_map<std::string, const CatalogEntry*> by_id;
  for (const auto& e : catalog) {
    by_id.emplace(e.item_id, &e);
    for (const auto& g : e.genres) {
      const auto idx = space.index_of(g);
      items[idx] += 1.0;
      providers[idx].insert(e.provider_id);
    }
  }
  std::vector<double> demand(n, 0.0);
  for (const auto& r : interactions) {
    auto it = by_id.find(r.item_id);
    if (it == by_id.end()) continue;
    for (const auto& g : it->second->genres) demand[space.index_of(g)] += r.weight;
  }

  GenreStats s;
  std::vector<double> supply(n);
  std::size_t with_supply = 0;
  for (std::size_t g = 0; g < n; ++g) {
    supply[g] = std::sqrt(static_cast<double>(providers[g].size()) * items[g]);
    if (supply[g] > 0) ++with_supply;
  }
  if (with_supply < 2) throw Error("niche selection needs at least two genres with non-zero supply");
  const double supply_total = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double demand_total = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (!(demand_total > 0)) throw Error("niche selection needs positive total demand");

  s.supply_share.resize(n);
  s.demand_share.resize(n);
  s.mismatch.resize(n);
  for (std::size_t g = 0; g < n; ++g) {
    s.supply_share[g] = supply[g] / supply_total;
    s.demand_share[g] = demand[g] / demand_total;
    s.mismatch[g] = s.demand_share[g] - s.supply_share[g];
  }
  s.band_low = percentile(s.demand_share, band.lower);
  s.band_high = percentile(s.demand_share, band.upper);
  // Shares are ratios, so rescaling weights may move them by an ulp; the
  // slack keeps band membership stable under such rescaling.
  const double slack = 1e-12;
  s.in_band.resize(n);
  for (std::size_t g = 0; g < n; ++g)
    s.in_band[g] = s.demand_share[g] >= s.band_low - slack && s.demand_share[g] <= s.band_high + slack;
  return s;
}

std::size_t select_niche_genre(std::span<const RawInteraction> interactions, std::span<const CatalogEntry> catalog,
                               const GenreSpace& space, PercentileBand band) {
  const GenreStats s = genre_statistics(interactions, catalog, space, band);
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < space.size(); ++g) {
    if (!s.in_band[g]) continue;
    if (!best || s.mismatch[g] > s.mismatch[*best]) best = g;
  }
  if (!best)
    throw ConfigError("no genre falls inside the demand percentile band; set niche_genre_override (--niche-genre)");
  return *best;
}

// ---------------------------------------------------------------- labeling

namespace {

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::map<std::string, Group> label_providers(std::span<const CatalogEntry> catalog, const GenreSpace& space) {
  std::map<std::string, std::vector<double>> counts;
  for (const auto& e : catalog) {
    auto& c = counts.try_emplace(e.provider_id, space.size(), 0.0).first->second;
    for (const auto& g : e.genres) c[space.index_of(g)] += 1.0;
  }
  std::map<std::string, Group> out;
  for (const auto& [provider, c] : counts)
    out.emplace(provider, argmax_first(c) == space.niche ? Group::Niche : Group::Generic);
  return out;
}

std::map<std::string, Group> label_consumers(const std::map<std::string, FeatureVector>& preferences,
                                             const GenreSpace& space) {
  std::map<std::string, Group> out;
  for (const auto& [consumer, p] : preferences)
    out.emplace(consumer, argmax_first(p) == space.niche ? Group::Niche : Group::Generic);
  return out;
}

// ---------------------------------------------------------------- preparation

LabeledDataset prepare_dataset(RawDataset raw, const PipelineConfig& config) {
  if (config.k_core < 1) throw ConfigError("k_core must be >= 1");
  if (!(config.band.lower >= 0 && config.band.lower <= config.band.upper && config.band.upper <= 1))
    throw ConfigError("percentile_band must satisfy 0 <= lower <= upper <= 1");

  LabeledDataset d;
  d.load_report = raw.report;
  d.k_core = config.k_core;
  d.interactions = k_core_filter(raw.interactions, config.k_core);
  if (d.interactions.empty()) throw EmptyDatasetError("no interactions survive " + std::to_string(config.k_core) + "-core filtering");

  std::set<std::string> used_items;
  for (const auto& r : d.interactions) used_items.insert(r.item_id);
  for (auto& e : raw.catalog)
    if (used_items.count(e.item_id)) d.catalog.push_back(std::move(e));
  std::sort(d.catalog.begin(), d.catalog.end(),
            [](const CatalogEntry& a, const CatalogEntry& b) { return a.item_id < b.item_id; });

  d.genre_space = make_genre_space(d.catalog);
  if (d.genre_space.size() < 2) throw Error("dataset needs at least two genres");
  d.genre_space.niche = config.niche_genre_override
                            ? d.genre_space.index_of(*config.niche_genre_override)
                            : select_niche_genre(d.interactions, d.catalog, d.genre_space, config.band);

  const auto features = build_item_features(d.catalog, d.genre_space);
  const auto prefs = build_preference_vectors(d.interactions, features);
  const auto consumer_labels = label_consumers(prefs, d.genre_space);
  const auto provider_labels = label_providers(d.catalog, d.genre_space);

  std::map<std::string, ProviderIndex> provider_index;
  for (const auto& [id, g] : provider_labels) {
    provider_index.emplace(id, static_cast<ProviderIndex>(d.provider_ids.size()));
    d.provider_ids.push_back(id);
    d.provider_groups.push_back(g);
  }
  for (const auto& e : d.catalog) {
    d.item_ids.push_back(e.item_id);
    d.item_features.push_back(features.at(e.item_id));
    d.item_provider.push_back(provider_index.at(e.provider_id));
  }
  for (const auto& [id, p] : prefs) {
    d.consumer_ids.push_back(id);
    d.preferences.push_back(p);
    d.consumer_groups.push_back(consumer_labels.at(id));
  }
  return d;
}

std::uint64_t LabeledDataset::digest() const {
  std::vector<std::string> lines;
  lines.reserve(interactions.size());
  for (const auto& r : interactions) {
    std::ostringstream os;
    os.precision(17);
    os << r.consumer_id << ',' << r.item_id << ',' << r.weight << ',';
    if (r.timestamp) os << *r.timestamp;
    lines.push_back(os.str());
  }
  std::sort(lines.begin(), lines.end());
  Digest h;
  for (const auto& l : lines) {
    h.update(l);
    h.update("\n");
  }
  h.update("--catalog--\n");
  for (const auto& e : catalog) {  // already sorted by item id
    h.update(e.item_id + "," + e.provider_id + ",");
    for (const auto& g : e.genres) h.update(g + "|");
    h.update("\n");
  }
  h.update("--niche--" + genre_space.niche_name());
  return h.value();
}

// ---------------------------------------------------------------- persistence

void save_prepared(const LabeledDataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / "interactions.csv");
    w.row({"consumer_id", "item_id", "weight", "timestamp"});
    for (const auto& r : d.interactions)
      w.row({r.consumer_id, r.item_id, format_double(r.weight), r.timestamp ? std::to_string(*r.timestamp) : ""});
  }
  {
    CsvWriter w(dir / "catalog.csv");
    w.row({"item_id", "provider_id", "genres"});
    for (const auto& e : d.catalog) {
      std::string g;
      for (std::size_t i = 0; i < e.genres.size(); ++i) g += (i ? "|" : "") + e.genres[i];
      w.row({e.item_id, e.provider_id, g});
    }
  }
  {
    CsvWriter w(dir / "consumers.csv");
    std::vector<std::string> head{"consumer_id", "group"};
    for (const auto& g : d.genre_space.genres) head.push_back("pref_" + g);
    w.row(head);
    for (std::size_t j = 0; j < d.consumer_count(); ++j) {
      std::vector<std::string> r{d.consumer_ids[j], std::string(to_string(d.consumer_groups[j]))};
      for (double x : d.preferences[j]) r.push_back(format_double(x));
      w.row(r);
    }
  }
  {
    CsvWriter w(dir / "providers.csv");
    w.row({"provider_id", "group"});
    for (std::size_t v = 0; v < d.provider_count(); ++v)
      w.row({d.provider_ids[v], std::string(to_string(d.provider_groups[v]))});
  }
  std::size_t niche_consumers = std::count(d.consumer_groups.begin(), d.consumer_groups.end(), Group::Niche);
  std::size_t niche_providers = std::count(d.provider_groups.begin(), d.provider_groups.end(), Group::Niche);
  std::size_t niche_items = 0;
  for (ItemIndex i = 0; i < d.item_count(); ++i) niche_items += d.item_has_niche_genre(i);
  json meta = {
      {"format", "portsim-prepared/1"},
      {"genres", d.genre_space.genres},
      {"niche_genre", d.genre_space.niche_name()},
      {"k_core", d.k_core},
      {"digest", to_hex(d.digest())},
      {"load_report",
       {{"dropped_catalog_rows", d.load_report.dropped_catalog_rows},
        {"dropped_interactions", d.load_report.dropped_interactions},
        {"unknown_item_interactions", d.load_report.unknown_item_interactions},
        {"items_without_genres", d.load_report.items_without_genres}}},
      {"counts",
       {{"interactions", d.interactions.size()},
        {"items", d.item_count()},
        {"niche_items", niche_items},
        {"providers", d.provider_count()},
        {"niche_providers", niche_providers},
        {"consumers", d.consumer_count()},
        {"niche_consumers", niche_consumers}}},
  };
  std::ofstream out(dir / "meta.json");
  if (!out) throw Error("cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << '\n';
}

LabeledDataset load_prepared(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw Error("cannot open " + (dir / "meta.json").string() + " (run 'prepare' first)");
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed meta.json: " + std::string(e.what()));
  }
  if (meta.value("format", "") != "portsim-prepared/1") throw Error("unsupported prepared-data format in " + dir.string());
  RawDataset raw = load_dataset(dir / "interactions.csv", dir / "catalog.csv");
  PipelineConfig cfg;
  cfg.k_core = meta.at("k_core").get<int>();
  cfg.niche_genre_override = meta.at("niche_genre").get<std::string>();
  LabeledDataset d = prepare_dataset(std::move(raw), cfg);
  const auto& lr = meta.at("load_report");
  d.load_report.dropped_catalog_rows = lr.at("dropped_catalog_rows").get<std::size_t>();
  d.load_report.dropped_interactions = lr.at("dropped_interactions").get<std::size_t>();
  d.load_report.unknown_item_interactions = lr.at("unknown_item_interactions").get<std::size_t>();
  d.load_report.items_without_genres = lr.value("items_without_genres", std::size_t{0});
  return d;
}

}  // namespace portsim
