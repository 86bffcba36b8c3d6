#pragma once

// Layout file format (JSON, strict keys):
//
//   {
//     "version": 1,
//     "bounds": {"low": [x, y], "high": [x, y]},
//     "walls": [[ax, ay, bx, by, thickness], ...],
//     "start": [x, y],
//     "goal": [x, y],        // omitted for trap layouts
//     "goal_radius": 0.05    // required alongside goal
//   }
//
// The loader enforces all structural layout invariants, including
// start-to-goal connectivity, so a file that loads is a file that runs.

#include <optional>
#include <string>
#include <vector>

#include "qd/json_util.hpp"
#include "qd/worlds.hpp"

namespace qd {

namespace detail {

inline Vec2 parse_vec2(const Json& j, const std::string& origin,
                       const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw ConfigError(origin + ": " + what + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline MazeLayout parse_layout(const std::string& raw,
                               const std::string& origin) {
  const Json j = parse_json(raw, origin);
  if (!j.is_object()) throw ConfigError(origin + ": expected a JSON object");
  reject_unknown_keys(j, raw, origin,
                      {"version", "bounds", "walls", "start", "goal",
                       "goal_radius"});
  const int version = require_key(j, "version", origin).get<int>();
  if (version != 1) {
    throw ConfigError(origin + ": unsupported layout version " +
                      std::to_string(version));
  }

  MazeLayout layout;
  const Json& bounds = require_key(j, "bounds", origin);
  if (!bounds.is_object()) {
    throw ConfigError(origin + ": bounds must be an object");
  }
  reject_unknown_keys(bounds, raw, origin, {"low", "high"});
  layout.bounds.low =
      detail::parse_vec2(require_key(bounds, "low", origin), origin, "bounds.low");
  layout.bounds.high = detail::parse_vec2(require_key(bounds, "high", origin),
                                          origin, "bounds.high");

  const Json& walls = require_key(j, "walls", origin);
  if (!walls.is_array()) {
    throw ConfigError(origin + ": walls must be an array");
  }
  for (const Json& w : walls) {
    if (!w.is_array() || w.size() != 5) {
      throw ConfigError(origin +
                        ": each wall must be [ax, ay, bx, by, thickness]");
    }
    layout.walls.push_back(WallSegment{{w[0].get<double>(), w[1].get<double>()},
                                       {w[2].get<double>(), w[3].get<double>()},
                                       w[4].get<double>()});
  }

  layout.start =
      detail::parse_vec2(require_key(j, "start", origin), origin, "start");
  const bool has_goal = j.contains("goal");
  if (has_goal != j.contains("goal_radius")) {
    throw ConfigError(origin + ": goal and goal_radius go together");
  }
  if (has_goal) {
    layout.goal = detail::parse_vec2(j["goal"], origin, "goal");
    layout.goal_radius = j["goal_radius"].get<double>();
  }

  try {
    validate_layout(layout, has_goal);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return layout;
}

inline MazeLayout load_layout(const std::string& path) {
  return parse_layout(read_text_file(path), path);
}

inline std::string layout_to_json(const MazeLayout& layout) {
  Json j;
  j["version"] = 1;
  j["bounds"] = {{"low", {layout.bounds.low.x, layout.bounds.low.y}},
                 {"high", {layout.bounds.high.x, layout.bounds.high.y}}};
  Json walls = Json::array();
  for (const WallSegment& w : layout.walls) {
    walls.push_back({w.a.x, w.a.y, w.b.x, w.b.y, w.thickness});
  }
  j["walls"] = walls;
  j["start"] = {layout.start.x, layout.start.y};
  if (layout.goal) {
    j["goal"] = {layout.goal->x, layout.goal->y};
    j["goal_radius"] = layout.goal_radius;
  }
  return j.dump(2) + "\n";
}

}  // namespace qd
