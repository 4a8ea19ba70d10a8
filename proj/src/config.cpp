#include "portsim/config.hpp"

#include <array>
#include <string>

namespace portsim {

using nlohmann::json;

namespace {

constexpr std::array kSimKeys{
    "cycles",       "days_per_cycle", "slate_size",     "warmup_cycles",       "exposure_threshold",
    "beta",         "tau",            "softmax_temperature", "condition",      "portability", "algo",
    "seed",         "workers",        "log_days",       "factors",             "regularization",
    "epochs",       "learning_rate",  "als_alpha",      "knn_neighbors",       "min_train_consumers",
    "als",          "bpr",            "knn"};

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown config key '" + k + "' in " + where);
  }
}

}  // namespace

bool is_sim_config_key(const std::string& key) {
  for (const char* k : kSimKeys)
    if (key == k) return true;
  return false;
}

json to_json(const SimConfig& c) {
  return json{
      {"cycles", c.cycles},
      {"days_per_cycle", c.days_per_cycle},
      {"slate_size", c.slate_size},
      {"warmup_cycles", c.warmup_cycles},
      {"exposure_threshold", c.exposure_threshold},
      {"beta", c.utility.beta},
      {"tau", c.utility.tau},
      {"softmax_temperature", c.utility.softmax_temperature},
      {"condition", std::string(to_string(c.condition))},
      {"algo", std::string(to_string(c.algorithm))},
      {"seed", c.seed},
      {"min_train_consumers", c.hyper.min_train_consumers},
      {"als",
       {{"factors", c.hyper.als.factors},
        {"regularization", c.hyper.als.regularization},
        {"alpha", c.hyper.als.alpha},
        {"sweeps", c.hyper.als.sweeps}}},
      {"bpr",
       {{"factors", c.hyper.bpr.factors},
        {"learning_rate", c.hyper.bpr.learning_rate},
        {"regularization", c.hyper.bpr.regularization},
        {"epochs", c.hyper.bpr.epochs}}},
      {"knn", {{"neighbors", c.hyper.knn.neighbors}}},
  };
}

SimConfig apply_sim_config(const json& j, SimConfig c, bool strict) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  if (strict)
    for (const auto& [k, v] : j.items())
      if (!is_sim_config_key(k)) throw ConfigError("unknown config key '" + k + "'");

  read(j, "cycles", c.cycles);
  read(j, "days_per_cycle", c.days_per_cycle);
  read(j, "slate_size", c.slate_size);
  read(j, "warmup_cycles", c.warmup_cycles);
  read(j, "exposure_threshold", c.exposure_threshold);
  read(j, "beta", c.utility.beta);
  read(j, "tau", c.utility.tau);
  read(j, "softmax_temperature", c.utility.softmax_temperature);
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);
  read(j, "log_days", c.log_days);
  read(j, "min_train_consumers", c.hyper.min_train_consumers);
  // "portability" is an alias of "condition".
  if (j.contains("condition") && j.contains("portability"))
    throw ConfigError("give either 'condition' or 'portability', not both");
  for (const char* key : {"condition", "portability"})
    if (j.contains(key)) c.condition = parse_condition(j.at(key).get<std::string>());
  if (j.contains("algo")) c.algorithm = parse_algorithm(j.at("algo").get<std::string>());

  if (j.contains("factors")) {
    read(j, "factors", c.hyper.als.factors);
    read(j, "factors", c.hyper.bpr.factors);
  }
  if (j.contains("regularization")) {
    read(j, "regularization", c.hyper.als.regularization);
    read(j, "regularization", c.hyper.bpr.regularization);
  }
  if (j.contains("epochs")) {
    read(j, "epochs", c.hyper.als.sweeps);
    read(j, "epochs", c.hyper.bpr.epochs);
  }
  read(j, "learning_rate", c.hyper.bpr.learning_rate);
  read(j, "als_alpha", c.hyper.als.alpha);
  read(j, "knn_neighbors", c.hyper.knn.neighbors);

  if (j.contains("als")) {
    const auto& a = j.at("als");
    if (strict) check_keys(a, {"factors", "regularization", "alpha", "sweeps"}, "als");
    read(a, "factors", c.hyper.als.factors);
    read(a, "regularization", c.hyper.als.regularization);
    read(a, "alpha", c.hyper.als.alpha);
    read(a, "sweeps", c.hyper.als.sweeps);
  }
  if (j.contains("bpr")) {
    const auto& b = j.at("bpr");
    if (strict) check_keys(b, {"factors", "learning_rate", "regularization", "epochs"}, "bpr");
    read(b, "factors", c.hyper.bpr.factors);
    read(b, "learning_rate", c.hyper.bpr.learning_rate);
    read(b, "regularization", c.hyper.bpr.regularization);
    read(b, "epochs", c.hyper.bpr.epochs);
  }
  if (j.contains("knn")) {
    const auto& k = j.at("knn");
    if (strict) check_keys(k, {"neighbors"}, "knn");
    read(k, "neighbors", c.hyper.knn.neighbors);
  }
  return c;
}

}  // namespace portsim
