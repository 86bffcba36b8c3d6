#pragma once

// The three benchmark worlds: PointMaze, AntMaze, AntTrap.
//
// PointMaze is a 2x2 square with two baffle walls; actions are direct
// position increments. The ant worlds replace the rigid-body ant with a
// 2D point mass under drag: the first two action components drive
// acceleration, the remaining ones only enter the control cost. All three
// share the same wall model (segments inflated to capsules, stop at
// contact, no sliding).

#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/env_types.hpp"
#include "qd/geometry.hpp"

namespace qd {

enum class WorldId { PointMaze, AntMaze, AntTrap };

inline const char* world_name(WorldId id) {
  switch (id) {
    case WorldId::PointMaze: return "pointmaze";
    case WorldId::AntMaze: return "antmaze";
    case WorldId::AntTrap: return "anttrap";
  }
  return "unknown";
}

inline std::optional<WorldId> world_from_name(const std::string& name) {
  if (name == "pointmaze") return WorldId::PointMaze;
  if (name == "antmaze") return WorldId::AntMaze;
  if (name == "anttrap") return WorldId::AntTrap;
  return std::nullopt;
}

struct LocomotionParams {
  double max_accel = 0.0;   // units/step^2 per unit action
  double drag = 0.0;        // velocity retained per step = 1 - drag
  double ctrl_cost_weight = 0.0;
  double survival_bonus = 0.0;
};

// Geometry shared by all worlds. Trap layouts have no goal.
struct MazeLayout {
  Box2 bounds;
  std::vector<WallSegment> walls;
  Vec2 start;
  std::optional<Vec2> goal;
  double goal_radius = 0.0;
};

struct WorldDef {
  WorldId id = WorldId::PointMaze;
  MazeLayout layout;
  LocomotionParams locomotion;
  int obs_dim = 0;
  int action_dim = 0;
  int max_steps = 0;
  Box2 descriptor_space;
  std::vector<int> default_hidden;
};

// ---------------------------------------------------------------------------
// Dynamics

// Returns true when the step ended in wall contact.
inline bool pointmaze_dynamics(EnvState& state, Vec2 action,
                               const MazeLayout& layout) {
  const Vec2 target = state.position + 0.1 * action;
  const ClipResult clip =
      wall_clip(state.position, target, layout.walls, layout.bounds);
  state.position = clip.point;
  return clip.hit;
}

inline double maze_goal_distance(Vec2 position, const MazeLayout& layout) {
  return distance(position, *layout.goal);
}

inline double antmaze_reward(Vec2 position, const MazeLayout& layout) {
  return -maze_goal_distance(position, layout);
}

// Point-mass step: velocity update with drag, then clipped translation.
// Wall contact zeroes the velocity (the wall stops the ant dead).
inline Vec2 locomotion_dynamics(EnvState& state, std::span<const double> action,
                                const LocomotionParams& params,
                                const MazeLayout& layout) {
  const Vec2 accel{params.max_accel * action[0], params.max_accel * action[1]};
  state.velocity = (1.0 - params.drag) * state.velocity + accel;
  const Vec2 target = state.position + state.velocity;
  const ClipResult clip =
      wall_clip(state.position, target, layout.walls, layout.bounds);
  state.position = clip.point;
  if (clip.hit) state.velocity = {0.0, 0.0};
  return accel;
}

inline double anttrap_reward(Vec2 velocity, std::span<const double> action,
                             const LocomotionParams& params) {
  double ctrl = 0.0;
  for (const double a : action) ctrl += a * a;
  return velocity.x - params.ctrl_cost_weight * ctrl + params.survival_bonus;
}

inline Vec2 descriptor(const WorldDef& world, const EnvState& state) {
  if (world.id == WorldId::AntTrap) {
    return world.descriptor_space.clamp(state.position);
  }
  return state.position;
}

// ---------------------------------------------------------------------------
// Layout validation

namespace detail {

// Flood-fill connectivity on a grid of cell centers, with edges blocked by
// the same capsule test the dynamics use. Cell size is 1% of the bounds
// diagonal. Conservative in the right direction: an open grid path implies
// a real collision-free path between the snapped endpoints.
inline bool path_exists(const MazeLayout& layout, Vec2 from, Vec2 to) {
  const double cell = 0.01 * layout.bounds.diagonal();
  const Vec2 ext = layout.bounds.extent();
  const int nx = std::max(2, static_cast<int>(std::ceil(ext.x / cell)) + 1);
  const int ny = std::max(2, static_cast<int>(std::ceil(ext.y / cell)) + 1);
  const double sx = ext.x / (nx - 1);
  const double sy = ext.y / (ny - 1);

  auto center = [&](int ix, int iy) -> Vec2 {
    return {layout.bounds.low.x + ix * sx, layout.bounds.low.y + iy * sy};
  };
  auto snap = [&](Vec2 p) {
    int ix = static_cast<int>(std::round((p.x - layout.bounds.low.x) / sx));
    int iy = static_cast<int>(std::round((p.y - layout.bounds.low.y) / sy));
    ix = std::min(std::max(ix, 0), nx - 1);
    iy = std::min(std::max(iy, 0), ny - 1);
    return std::pair<int, int>{ix, iy};
  };
  auto blocked = [&](Vec2 p, Vec2 q) {
    for (const WallSegment& w : layout.walls) {
      if (inside_wall(q, w)) return true;
      if (first_contact(p, q, w)) return true;
    }
    return false;
  };

  const auto [sx0, sy0] = snap(from);
  const auto [tx0, ty0] = snap(to);
  if (blocked(from, center(sx0, sy0)) || blocked(to, center(tx0, ty0))) {
    return false;
  }

  std::vector<char> visited(static_cast<size_t>(nx) * ny, 0);
  std::queue<std::pair<int, int>> frontier;
  visited[static_cast<size_t>(sy0) * nx + sx0] = 1;
  frontier.push({sx0, sy0});
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!frontier.empty()) {
    const auto [ix, iy] = frontier.front();
    frontier.pop();
    if (ix == tx0 && iy == ty0) return true;
    for (int d = 0; d < 4; ++d) {
      const int jx = ix + dx[d];
      const int jy = iy + dy[d];
      if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
      char& seen = visited[static_cast<size_t>(jy) * nx + jx];
      if (seen) continue;
      if (blocked(center(ix, iy), center(jx, jy))) continue;
      seen = 1;
      frontier.push({jx, jy});
    }
  }
  return false;
}

}  // namespace detail

// Checks the structural invariants a layout must satisfy. Throws
// std::invalid_argument naming the offending part.
inline void validate_layout(const MazeLayout& layout, bool expect_goal) {
  if (!(layout.bounds.low.x < layout.bounds.high.x) ||
      !(layout.bounds.low.y < layout.bounds.high.y)) {
    throw std::invalid_argument("layout: bounds low must be < high per axis");
  }
  for (size_t i = 0; i < layout.walls.size(); ++i) {
    const WallSegment& w = layout.walls[i];
    if (w.a == w.b) {
      throw std::invalid_argument("layout: wall " + std::to_string(i) +
                                  " has zero length");
    }
    if (!(w.thickness >= 0.0) || !std::isfinite(w.thickness)) {
      throw std::invalid_argument("layout: wall " + std::to_string(i) +
                                  " has invalid thickness");
    }
  }
  if (!layout.bounds.contains(layout.start)) {
    throw std::invalid_argument("layout: start outside bounds");
  }
  for (const WallSegment& w : layout.walls) {
    if (inside_wall(layout.start, w)) {
      throw std::invalid_argument("layout: start inside a wall");
    }
  }
  if (expect_goal) {
    if (!layout.goal) {
      throw std::invalid_argument("layout: goal required for this world");
    }
    if (!(layout.goal_radius > 0.0)) {
      throw std::invalid_argument("layout: goal_radius must be > 0");
    }
    if (!layout.bounds.contains(*layout.goal)) {
      throw std::invalid_argument("layout: goal outside bounds");
    }
    for (const WallSegment& w : layout.walls) {
      if (inside_wall(*layout.goal, w)) {
        throw std::invalid_argument("layout: goal inside a wall");
      }
    }
    if (!detail::path_exists(layout, layout.start, *layout.goal)) {
      throw std::invalid_argument("layout: no path from start to goal");
    }
  } else {
    // Trap worlds: the +x ray from the start must run into a wall,
    // otherwise the layout does not actually block the greedy direction.
    const Vec2 far{layout.bounds.high.x, layout.start.y};
    bool hit = false;
    for (const WallSegment& w : layout.walls) {
      if (first_contact(layout.start, far, w)) hit = true;
    }
    if (!hit) {
      throw std::invalid_argument(
          "layout: trap walls do not block the +x ray from start");
    }
  }
}

// ---------------------------------------------------------------------------
// Built-in worlds

inline MazeLayout builtin_pointmaze_layout() {
  MazeLayout layout;
  layout.bounds = {{-1.0, -1.0}, {1.0, 1.0}};
  layout.walls = {
      {{-1.0, -0.33}, {0.4, -0.33}, 0.02},
      {{-0.4, 0.33}, {1.0, 0.33}, 0.02},
  };
  layout.start = {0.75, -0.75};
  layout.goal = Vec2{-0.75, 0.75};
  layout.goal_radius = 0.05;
  return layout;
}

inline MazeLayout builtin_antmaze_layout() {
  MazeLayout layout;
  layout.bounds = {{-35.0, -35.0}, {40.0, 40.0}};
  // Three baffles forcing an S-shaped path of roughly 190 units.
  layout.walls = {
      {{-12.0, -35.0}, {-12.0, 10.0}, 1.0},
      {{3.0, 40.0}, {3.0, -10.0}, 1.0},
      {{18.0, -35.0}, {18.0, 10.0}, 1.0},
  };
  layout.start = {-29.0, -29.0};
  layout.goal = Vec2{29.0, -29.0};
  layout.goal_radius = 1.0;
  return layout;
}

inline MazeLayout builtin_anttrap_layout() {
  MazeLayout layout;
  // Generous arena; the episode cap keeps the ant far from these bounds.
  layout.bounds = {{-2000.0, -2000.0}, {2000.0, 2000.0}};
  // U-shaped trap with the closed side across the +x ray from the start.
  layout.walls = {
      {{4.0, -2.0}, {4.0, 2.0}, 0.2},
      {{4.0, -2.0}, {7.0, -2.0}, 0.2},
      {{4.0, 2.0}, {7.0, 2.0}, 0.2},
  };
  layout.start = {0.0, 0.0};
  return layout;
}

inline WorldDef make_world(WorldId id) {
  WorldDef world;
  world.id = id;
  switch (id) {
    case WorldId::PointMaze:
      world.layout = builtin_pointmaze_layout();
      world.obs_dim = 2;
      world.action_dim = 2;
      world.max_steps = 200;
      world.descriptor_space = {{-1.0, -1.0}, {1.0, 1.0}};
      world.default_hidden = {64, 64};
      break;
    case WorldId::AntMaze:
      world.layout = builtin_antmaze_layout();
      world.locomotion = {0.02, 0.05, 0.0, 0.0};
      world.obs_dim = 8;
      world.action_dim = 8;
      world.max_steps = 3000;
      world.descriptor_space = {{-35.0, -35.0}, {40.0, 40.0}};
      world.default_hidden = {256, 256};
      break;
    case WorldId::AntTrap:
      world.layout = builtin_anttrap_layout();
      world.locomotion = {0.05, 0.05, 0.05, 1.0};
      world.obs_dim = 8;
      world.action_dim = 8;
      world.max_steps = 1000;
      world.descriptor_space = {{0.0, -8.0}, {30.0, 8.0}};
      world.default_hidden = {256, 256};
      break;
  }
  validate_layout(world.layout, id != WorldId::AntTrap);
  return world;
}

// Swap in a custom layout (from a layout file) for a built-in world.
inline WorldDef make_world(WorldId id, const MazeLayout& layout) {
  WorldDef world = make_world(id);
  if (id == WorldId::AntTrap && layout.goal) {
    throw std::invalid_argument("layout: trap worlds take no goal");
  }
  validate_layout(layout, id != WorldId::AntTrap);
  world.layout = layout;
  if (id == WorldId::PointMaze) {
    world.descriptor_space = layout.bounds;
  }
  return world;
}

}  // namespace qd
