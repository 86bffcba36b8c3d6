#pragma once

// Run configuration: strict JSON in, validated RunConfig out. The config
// hash (FNV over the canonical JSON dump) stamps every output file so
// artifacts can be traced back to the exact configuration.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qd/emitters.hpp"
#include "qd/hash.hpp"
#include "qd/json_util.hpp"
#include "qd/qd_loop.hpp"
#include "qd/worlds.hpp"

namespace qd {

struct RunConfig {
  WorldId world = WorldId::PointMaze;
  EmitterKind emitter = EmitterKind::Ga;
  int grid_res_x = 50;
  int grid_res_y = 50;
  uint64_t budget_env_steps = 0;
  int batch = 256;
  std::vector<uint64_t> seeds;
  int threads = 1;
  std::string output_dir;
  std::optional<std::vector<int>> hidden;
  std::optional<std::string> layout_path;
  EmitterParams params;
  std::optional<QdScoreConfig> qd_score;
  std::string config_hash;
};

inline RunConfig parse_run_config(const std::string& raw,
                                  const std::string& origin) {
  const Json j = parse_json(raw, origin);
  if (!j.is_object()) throw ConfigError(origin + ": expected a JSON object");
  reject_unknown_keys(j, raw, origin,
                      {"world", "emitter", "grid", "budget_env_steps", "batch",
                       "seeds", "threads", "output_dir", "hidden", "layout",
                       "params", "qd_score"});

  RunConfig config;
  const std::string world_str =
      require_key(j, "world", origin).get<std::string>();
  const std::optional<WorldId> world = world_from_name(world_str);
  if (!world) {
    throw ConfigError(origin + ": unknown world \"" + world_str +
                      "\" (expected pointmaze, antmaze or anttrap)");
  }
  config.world = *world;

  const std::string emitter_str =
      require_key(j, "emitter", origin).get<std::string>();
  const std::optional<EmitterKind> emitter = emitter_from_name(emitter_str);
  if (!emitter) {
    throw ConfigError(origin + ": unknown emitter \"" + emitter_str +
                      "\" (expected ga, gaussian, es, novelty-es or blended-es)");
  }
  config.emitter = *emitter;

  if (j.contains("grid")) {
    const Json& grid = j["grid"];
    if (!grid.is_array() || grid.size() != 2 || !grid[0].is_number_integer() ||
        !grid[1].is_number_integer()) {
      throw ConfigError(origin + ": grid must be [res_x, res_y]");
    }
    config.grid_res_x = grid[0].get<int>();
    config.grid_res_y = grid[1].get<int>();
    if (config.grid_res_x < 1 || config.grid_res_y < 1) {
      throw ConfigError(origin + ": grid resolution must be >= 1 per axis");
    }
  }

  const Json& budget = require_key(j, "budget_env_steps", origin);
  if (!budget.is_number_unsigned() && !budget.is_number_integer()) {
    throw ConfigError(origin + ": budget_env_steps must be an integer");
  }
  if (budget.is_number_integer() && budget.get<int64_t>() <= 0) {
    throw ConfigError(origin + ": budget_env_steps must be > 0");
  }
  config.budget_env_steps = budget.get<uint64_t>();

  if (j.contains("batch")) {
    config.batch = j["batch"].get<int>();
    if (config.batch < 1) throw ConfigError(origin + ": batch must be >= 1");
  }

  const Json& seeds = require_key(j, "seeds", origin);
  if (!seeds.is_array() || seeds.empty()) {
    throw ConfigError(origin + ": seeds must be a non-empty array");
  }
  for (const Json& s : seeds) {
    if (!s.is_number_integer() && !s.is_number_unsigned()) {
      throw ConfigError(origin + ": seeds must be integers");
    }
    config.seeds.push_back(s.get<uint64_t>());
  }

  if (j.contains("threads")) {
    config.threads = j["threads"].get<int>();
    if (config.threads < 1) {
      throw ConfigError(origin + ": threads must be >= 1");
    }
  }
  config.output_dir = require_key(j, "output_dir", origin).get<std::string>();
  if (config.output_dir.empty()) {
    throw ConfigError(origin + ": output_dir must not be empty");
  }

  if (j.contains("hidden")) {
    const Json& hidden = j["hidden"];
    if (!hidden.is_array()) {
      throw ConfigError(origin + ": hidden must be an array of widths");
    }
    std::vector<int> widths;
    for (const Json& h : hidden) {
      const int w = h.get<int>();
      if (w < 1) throw ConfigError(origin + ": hidden widths must be >= 1");
      widths.push_back(w);
    }
    config.hidden = widths;
  }
  if (j.contains("layout")) {
    config.layout_path = j["layout"].get<std::string>();
  }

  if (j.contains("params")) {
    const Json& p = j["params"];
    if (!p.is_object()) throw ConfigError(origin + ": params must be an object");
    reject_unknown_keys(p, raw, origin,
                        {"sigma_iso", "sigma_line", "sigma_gauss", "sigma_es",
                         "lr_es", "novelty_k", "blend"});
    if (p.contains("sigma_iso")) config.params.sigma_iso = p["sigma_iso"].get<double>();
    if (p.contains("sigma_line")) config.params.sigma_line = p["sigma_line"].get<double>();
    if (p.contains("sigma_gauss")) config.params.sigma_gauss = p["sigma_gauss"].get<double>();
    if (p.contains("sigma_es")) config.params.sigma_es = p["sigma_es"].get<double>();
    if (p.contains("lr_es")) config.params.lr_es = p["lr_es"].get<double>();
    if (p.contains("novelty_k")) config.params.novelty_k = p["novelty_k"].get<int>();
    if (p.contains("blend")) config.params.blend = p["blend"].get<double>();
    if (config.params.novelty_k < 1) {
      throw ConfigError(origin + ": novelty_k must be >= 1");
    }
  }

  if (j.contains("qd_score")) {
    const Json& q = j["qd_score"];
    if (!q.is_object()) {
      throw ConfigError(origin + ": qd_score must be an object");
    }
    reject_unknown_keys(q, raw, origin, {"offset", "episode_mean"});
    QdScoreConfig score = default_qd_score(config.world);
    if (q.contains("offset")) score.offset = q["offset"].get<double>();
    if (q.contains("episode_mean")) {
      score.episode_mean = q["episode_mean"].get<bool>();
    }
    config.qd_score = score;
  }

  config.config_hash = hash_hex(fnv1a_str(j.dump()));
  return config;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path), path);
}

// The per-seed loop configuration for a parsed run config. The layout, if
// any, must already be loaded (the CLI resolves the path).
inline LoopConfig make_loop_config(const RunConfig& config, uint64_t seed,
                                   std::optional<MazeLayout> layout) {
  LoopConfig loop;
  loop.world = config.world;
  loop.emitter = config.emitter;
  loop.grid_res_x = config.grid_res_x;
  loop.grid_res_y = config.grid_res_y;
  loop.budget_env_steps = config.budget_env_steps;
  loop.batch = config.batch;
  loop.seed = seed;
  loop.params = config.params;
  loop.qd_score = config.qd_score;
  loop.hidden = config.hidden;
  loop.layout = std::move(layout);
  return loop;
}

}  // namespace qd
