// Trace files are JSON lines. Record types:
//
//   {"type":"header", "format":"portsim-trace/1", "config":{...}, ...}
//   {"type":"consumer", "cycle":c, "consumer":id, "group":g, "attached":k,
//    "utility":u, "slate_utility":m|null, "clicks":n, "skipped":n}
//   {"type":"provider", "cycle":c, "provider":id, "group":g, "clicks":n}
//   {"type":"cycle", "cycle":c, "attachments":{...}, "clicks":n, "skipped":n}
//   {"type":"switch", "cycle":c, "consumer":id, "from":k, "to":k}
//   {"type":"day", "cycle":c, "day":d, "consumer":id, "recommender":k,
//    "slate":[...], "sources":[...], "selected":item, "slate_utility":m,
//    "utility":u}
//
// Doubles are written in shortest round-trip form, so reading a trace back
// reproduces every value exactly.

#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "portsim/config.hpp"
#include "portsim/engine.hpp"

namespace portsim {

using nlohmann::json;

void write_trace(std::ostream& out, const SimulationTrace& t) {
  json header = {
      {"type", "header"},
      {"format", "portsim-trace/1"},
      {"config", to_json(t.config)},
      {"dataset_digest", t.dataset_digest},
      {"niche_genre", t.niche_genre},
      {"consumers", t.consumer_ids.size()},
      {"providers", t.provider_ids.size()},
  };
  if (!t.item_ids.empty()) header["items"] = t.item_ids;
  out << header.dump() << '\n';

  for (const auto& c : t.cycles) {
    for (const auto& r : c.consumers) {
      json j = {{"type", "consumer"},
                {"cycle", c.cycle},
                {"consumer", t.consumer_ids.at(r.consumer)},
                {"group", to_string(r.group)},
                {"attached", recommender_name(r.attached)},
                {"utility", r.running_utility},
                {"slate_utility", r.mean_slate_utility ? json(*r.mean_slate_utility) : json(nullptr)},
                {"clicks", r.clicks},
                {"skipped", r.skipped_days}};
      out << j.dump() << '\n';
    }
    for (const auto& r : c.providers) {
      json j = {{"type", "provider"},
                {"cycle", c.cycle},
                {"provider", t.provider_ids.at(r.provider)},
                {"group", to_string(r.group)},
                {"clicks", r.clicks}};
      out << j.dump() << '\n';
    }
    json attach = json::object();
    for (std::size_t k = 0; k < c.attachments.size(); ++k)
      attach[std::string(recommender_name(static_cast<RecommenderId>(k)))] = c.attachments[k];
    out << json{{"type", "cycle"}, {"cycle", c.cycle}, {"attachments", attach}, {"clicks", c.clicks},
                {"skipped", c.skipped_days}}
               .dump()
        << '\n';
    for (const auto& s : c.switches) {
      out << json{{"type", "switch"},
                  {"cycle", s.cycle},
                  {"consumer", t.consumer_ids.at(s.consumer)},
                  {"from", recommender_name(s.from)},
                  {"to", recommender_name(s.to)}}
                 .dump()
          << '\n';
    }
  }
  for (const auto& d : t.days) {
    json slate = json::array();
    json sources = json::array();
    for (auto i : d.slate) slate.push_back(t.item_ids.at(i));
    for (auto s : d.sources) sources.push_back(to_string(s));
    out << json{{"type", "day"},
                {"cycle", d.cycle},
                {"day", d.day},
                {"consumer", t.consumer_ids.at(d.consumer)},
                {"recommender", recommender_name(d.recommender)},
                {"slate", slate},
                {"sources", sources},
                {"selected", t.item_ids.at(d.selected)},
                {"slate_utility", d.slate_utility},
                {"utility", d.running_utility}}
               .dump()
        << '\n';
  }
}

std::uint64_t SimulationTrace::digest() const {
  std::ostringstream os;
  write_trace(os, *this);
  Digest h;
  h.update(os.str());
  return h.value();
}

namespace {

SlotSource parse_source(const std::string& s) {
  if (s == "ranked") return SlotSource::Ranked;
  if (s == "popularity") return SlotSource::PopularitySample;
  if (s == "fallback") return SlotSource::Fallback;
  throw Error("unknown slot source '" + s + "'");
}

template <typename Map>
auto intern(Map& map, std::vector<std::string>& ids, const std::string& key) {
  auto [it, inserted] = map.emplace(key, static_cast<std::uint32_t>(ids.size()));
  if (inserted) ids.push_back(key);
  return it->second;
}

}  // namespace

SimulationTrace read_trace(std::istream& in, const std::string& name) {
  SimulationTrace t;
  std::unordered_map<std::string, std::uint32_t> consumers, providers, items;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;

  auto cycle_slot = [&](std::uint32_t cycle) -> CycleTrace& {
    if (cycle == 0) throw ParseError(name, lineno, "cycle indices are 1-based");
    if (t.cycles.size() < cycle) {
      const auto old = t.cycles.size();
      t.cycles.resize(cycle);
      for (auto c = old; c < cycle; ++c) t.cycles[c].cycle = static_cast<std::uint32_t>(c + 1);
    }
    return t.cycles[cycle - 1];
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (j.at("format").get<std::string>() != "portsim-trace/1") throw ParseError(name, lineno, "unsupported trace format");
        t.config = apply_sim_config(j.at("config"), SimConfig{}, false);
        t.dataset_digest = j.at("dataset_digest").get<std::string>();
        t.niche_genre = j.value("niche_genre", "");
        if (j.contains("items"))
          for (const auto& id : j.at("items")) intern(items, t.item_ids, id.get<std::string>());
        have_header = true;
        continue;
      }
      if (!have_header) throw ParseError(name, lineno, "trace must start with a header record");
      const auto cycle = j.at("cycle").get<std::uint32_t>();
      if (type == "consumer") {
        ConsumerCycleRecord r;
        r.consumer = intern(consumers, t.consumer_ids, j.at("consumer").get<std::string>());
        r.group = parse_group(j.at("group").get<std::string>());
        r.attached = parse_recommender(j.at("attached").get<std::string>());
        r.running_utility = j.at("utility").get<double>();
        if (!j.at("slate_utility").is_null()) r.mean_slate_utility = j.at("slate_utility").get<double>();
        r.clicks = j.at("clicks").get<std::uint32_t>();
        r.skipped_days = j.at("skipped").get<std::uint32_t>();
        cycle_slot(cycle).consumers.push_back(r);
      } else if (type == "provider") {
        ProviderCycleRecord r;
        r.provider = intern(providers, t.provider_ids, j.at("provider").get<std::string>());
        r.group = parse_group(j.at("group").get<std::string>());
        r.clicks = j.at("clicks").get<std::uint64_t>();
        cycle_slot(cycle).providers.push_back(r);
      } else if (type == "cycle") {
        auto& c = cycle_slot(cycle);
        c.clicks = j.at("clicks").get<std::uint64_t>();
        c.skipped_days = j.at("skipped").get<std::uint64_t>();
        c.attachments.clear();
        for (const auto& [k, v] : j.at("attachments").items()) {
          const auto id = parse_recommender(k);
          if (c.attachments.size() <= id) c.attachments.resize(id + 1, 0);
          c.attachments[id] = v.get<std::uint64_t>();
        }
      } else if (type == "switch") {
        SwitchEvent s;
        s.cycle = cycle;
        s.consumer = intern(consumers, t.consumer_ids, j.at("consumer").get<std::string>());
        s.from = parse_recommender(j.at("from").get<std::string>());
        s.to = parse_recommender(j.at("to").get<std::string>());
        cycle_slot(cycle).switches.push_back(s);
      } else if (type == "day") {
        DayOutcome d;
        d.cycle = cycle;
        d.day = j.at("day").get<std::uint32_t>();
        d.consumer = intern(consumers, t.consumer_ids, j.at("consumer").get<std::string>());
        d.recommender = parse_recommender(j.at("recommender").get<std::string>());
        for (const auto& s : j.at("slate")) d.slate.push_back(intern(items, t.item_ids, s.get<std::string>()));
        for (const auto& s : j.at("sources")) d.sources.push_back(parse_source(s.get<std::string>()));
        d.selected = intern(items, t.item_ids, j.at("selected").get<std::string>());
        d.slate_utility = j.at("slate_utility").get<double>();
        d.running_utility = j.at("utility").get<double>();
        t.days.push_back(std::move(d));
      } else {
        throw ParseError(name, lineno, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(name, lineno, e.what());
    } catch (const ConfigError& e) {
      throw ParseError(name, lineno, e.what());
    }
  }
  if (!have_header) throw ParseError(name, lineno, "empty trace");
  t.config.log_days = !t.days.empty();
  return t;
}

}  // namespace portsim
