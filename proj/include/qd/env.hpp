#pragma once

// Rollout engine. Episodes are pure functions of (spec, genotype, seed):
// batch execution maps the same per-episode code over any number of
// workers and gathers results in input order, so batching can never
// change a result, only its wall-clock cost.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qd/env_types.hpp"
#include "qd/policy.hpp"
#include "qd/threading.hpp"
#include "qd/worlds.hpp"

namespace qd {

enum class EarlyTermination { None, GoalRadius };

struct EnvSpec {
  int obs_dim = 0;
  int action_dim = 0;
  int max_steps = 0;
  Box2 descriptor_space;
  WorldDef world;
  EarlyTermination early_termination = EarlyTermination::None;
};

// Worlds top out at action_dim 8; fixed-size stack buffers keep the step
// loop allocation-free.
inline constexpr int kMaxActionDim = 16;

inline EnvSpec make_env_spec(const WorldDef& world) {
  EnvSpec spec;
  spec.obs_dim = world.obs_dim;
  spec.action_dim = world.action_dim;
  spec.max_steps = world.max_steps;
  spec.descriptor_space = world.descriptor_space;
  spec.world = world;
  spec.early_termination = world.layout.goal ? EarlyTermination::GoalRadius
                                             : EarlyTermination::None;
  if (spec.obs_dim <= 0 || spec.action_dim <= 0 || spec.max_steps <= 0) {
    throw std::invalid_argument("env spec: dims and max_steps must be > 0");
  }
  if (spec.action_dim > kMaxActionDim) {
    throw std::invalid_argument("env spec: action_dim too large");
  }
  const Box2& ds = spec.descriptor_space;
  if (!(ds.low.x < ds.high.x) || !(ds.low.y < ds.high.y)) {
    throw std::invalid_argument("env spec: descriptor space low must be < high");
  }
  return spec;
}

inline EnvSpec make_env_spec(WorldId id) { return make_env_spec(make_world(id)); }

inline EnvState reset(const EnvSpec& spec, uint64_t seed) {
  EnvState state;
  state.position = spec.world.layout.start;
  state.velocity = {0.0, 0.0};
  state.step_index = 0;
  state.done = false;
  state.rng_stream = RngStream(seed, 0);
  return state;
}

namespace detail {

// Ant worlds: position, velocity, offset to goal (zero when the world
// has none), zero padding up to obs_dim. Kept out of line: when inlined
// into callers holding fixed-size pointmaze buffers, GCC 11's late
// warning passes lose track of the size guard in observe() and report
// bogus overflows on the writes below.
[[gnu::noinline]] inline void observe_ant(const EnvSpec& spec,
                                          const EnvState& state,
                                          std::span<double> out) {
  if (out.size() < 6) {
    throw std::invalid_argument("observe: ant observations need obs_dim >= 6");
  }
  out[0] = state.position.x;
  out[1] = state.position.y;
  out[2] = state.velocity.x;
  out[3] = state.velocity.y;
  if (spec.world.layout.goal) {
    out[4] = spec.world.layout.goal->x - state.position.x;
    out[5] = spec.world.layout.goal->y - state.position.y;
  } else {
    out[4] = 0.0;
    out[5] = 0.0;
  }
  for (int i = 6; i < spec.obs_dim; ++i) out[i] = 0.0;
}

}  // namespace detail

inline void observe(const EnvSpec& spec, const EnvState& state,
                    std::span<double> out) {
  if (static_cast<int>(out.size()) != spec.obs_dim) {
    throw std::invalid_argument("observe: buffer size mismatch");
  }
  if (spec.world.id == WorldId::PointMaze) {
    out[0] = state.position.x;
    out[1] = state.position.y;
    return;
  }
  detail::observe_ant(spec, state, out);
}

// One dynamics step, in place. Actions are clipped to [-1, 1] before use.
// Stepping a finished episode changes nothing and reports reward 0.
inline StepEffect advance(const EnvSpec& spec, EnvState& state,
                          std::span<const double> action) {
  if (static_cast<int>(action.size()) != spec.action_dim) {
    throw std::invalid_argument("advance: action size mismatch");
  }
  if (state.done) return {0.0, true, true};

  double clipped[kMaxActionDim];
  for (int i = 0; i < spec.action_dim; ++i) {
    double a = action[i];
    if (a < -1.0) a = -1.0;
    if (a > 1.0) a = 1.0;
    clipped[i] = a;
  }
  const std::span<const double> act(clipped,
                                    static_cast<size_t>(spec.action_dim));

  const MazeLayout& layout = spec.world.layout;
  double reward = 0.0;
  bool goal_reached = false;
  switch (spec.world.id) {
    case WorldId::PointMaze: {
      pointmaze_dynamics(state, {act[0], act[1]}, layout);
      const double dist = maze_goal_distance(state.position, layout);
      reward = -dist;
      goal_reached = dist < layout.goal_radius;
      break;
    }
    case WorldId::AntMaze: {
      locomotion_dynamics(state, act, spec.world.locomotion, layout);
      const double dist = maze_goal_distance(state.position, layout);
      reward = -dist;
      goal_reached = dist < layout.goal_radius;
      break;
    }
    case WorldId::AntTrap: {
      locomotion_dynamics(state, act, spec.world.locomotion, layout);
      reward = anttrap_reward(state.velocity, act, spec.world.locomotion);
      break;
    }
  }
  state.step_index += 1;
  const bool early = spec.early_termination == EarlyTermination::GoalRadius &&
                     goal_reached;
  state.done = early || state.step_index >= spec.max_steps;
  return {reward, state.done, false};
}

// Contract-level step: value semantics plus a full Transition record.
// Thin wrapper over advance; tests and replay traces use this, rollouts
// use advance directly to avoid the allocations.
inline std::pair<EnvState, Transition> step(const EnvSpec& spec,
                                            const EnvState& state,
                                            std::span<const double> action) {
  if (static_cast<int>(action.size()) != spec.action_dim) {
    throw std::invalid_argument("step: action size mismatch");
  }
  Transition t;
  t.observation.resize(spec.obs_dim);
  observe(spec, state, t.observation);
  t.action.assign(action.begin(), action.end());
  for (double& a : t.action) {
    if (a < -1.0) a = -1.0;
    if (a > 1.0) a = 1.0;
  }
  EnvState next = state;
  const StepEffect effect = advance(spec, next, action);
  t.reward = effect.reward;
  t.done = effect.done;
  t.next_observation.resize(spec.obs_dim);
  observe(spec, next, t.next_observation);
  t.state_descriptor = descriptor(spec.world, next);
  return {next, t};
}

namespace detail {

// Shared episode loop. PolicyFn fills the action buffer from the
// observation buffer; both are preallocated by the caller.
template <typename PolicyFn>
TrajectorySummary run_episode(const EnvSpec& spec, EnvState& state,
                              std::span<double> obs, std::span<double> act,
                              PolicyFn&& policy) {
  double fitness = 0.0;
  while (!state.done) {
    observe(spec, state, obs);
    policy(std::span<const double>(obs.data(), obs.size()), act);
    const StepEffect effect = advance(spec, state, act);
    fitness += effect.reward;
  }
  TrajectorySummary summary;
  summary.fitness = fitness;
  summary.behavior_descriptor = descriptor(spec.world, state);
  summary.steps_taken = state.step_index;
  summary.terminated_early = state.step_index < spec.max_steps;
  return summary;
}

}  // namespace detail

inline TrajectorySummary rollout(const EnvSpec& spec, const Genotype& genotype,
                                 uint64_t seed) {
  if (genotype.topology.obs_dim != spec.obs_dim ||
      genotype.topology.action_dim != spec.action_dim) {
    throw std::invalid_argument("rollout: genotype topology does not match env");
  }
  EnvState state = reset(spec, seed);
  std::vector<double> obs(spec.obs_dim);
  std::vector<double> act(spec.action_dim);
  std::vector<double> workspace;
  return detail::run_episode(
      spec, state, obs, act,
      [&](std::span<const double> o, std::span<double> a) {
        forward(genotype, o, a, workspace);
      });
}

// Ordered parallel map of rollout(). Episode i always computes exactly
// what the sequential call would, whichever worker runs it.
inline std::vector<TrajectorySummary> batch_rollout(
    const EnvSpec& spec, std::span<const Genotype> genotypes,
    std::span<const uint64_t> seeds, ThreadPool* pool = nullptr) {
  if (genotypes.size() != seeds.size()) {
    throw std::invalid_argument("batch_rollout: genotypes/seeds length mismatch");
  }
  std::vector<TrajectorySummary> summaries(genotypes.size());
  auto run_one = [&](int i) {
    summaries[static_cast<size_t>(i)] =
        rollout(spec, genotypes[static_cast<size_t>(i)],
                seeds[static_cast<size_t>(i)]);
  };
  const int n = static_cast<int>(genotypes.size());
  if (pool != nullptr) {
    pool->parallel_for(n, run_one);
  } else {
    for (int i = 0; i < n; ++i) run_one(i);
  }
  return summaries;
}

}  // namespace qd
