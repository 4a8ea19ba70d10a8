#pragma once

// Key-value configuration (JSON documents). Flat keys mirror the CLI flags:
//
//   cycles, days_per_cycle, slate_size, warmup_cycles, exposure_threshold,
//   beta, tau, softmax_temperature, condition, algo, seed, workers, log_days,
//   factors, regularization, epochs, learning_rate, als_alpha,
//   knn_neighbors, min_train_consumers
//
// factors / regularization / epochs apply to whichever factor model runs
// (epochs are ALS sweeps for ALS). Nested "als", "bpr" and "knn" objects set
// per-algorithm values and take precedence over the flat keys.

#include "json.hpp"
#include "portsim/engine.hpp"

namespace portsim {

nlohmann::json to_json(const SimConfig& c);

/// Overlays the keys present in j onto base. Unknown keys are rejected when
/// strict is set, so typos surface as ConfigError instead of silently using
/// defaults.
SimConfig apply_sim_config(const nlohmann::json& j, SimConfig base, bool strict = true);

/// Keys consumed by apply_sim_config.
bool is_sim_config_key(const std::string& key);

}  // namespace portsim
