#pragma once

// Plain data passed between the worlds and the rollout engine.

#include <vector>

#include "qd/geometry.hpp"
#include "qd/rng.hpp"

namespace qd {

struct EnvState {
  Vec2 position;
  Vec2 velocity;
  int step_index = 0;
  bool done = false;
  // Reserved for stochastic policies and extensions; the shipped worlds
  // are deterministic and never draw from it.
  RngStream rng_stream;
};

// Full per-step record. Built on demand (replay traces, tests); the hot
// rollout path uses StepEffect below and never allocates these.
struct Transition {
  std::vector<double> observation;
  std::vector<double> action;  // as applied, after clipping
  double reward = 0.0;
  std::vector<double> next_observation;
  Vec2 state_descriptor;
  bool done = false;
};

struct StepEffect {
  double reward = 0.0;
  bool done = false;
  bool absorbed = false;  // stepped a finished episode; nothing changed
};

struct TrajectorySummary {
  double fitness = 0.0;
  Vec2 behavior_descriptor;
  int steps_taken = 0;
  bool terminated_early = false;
};

inline bool operator==(const TrajectorySummary& a,
                       const TrajectorySummary& b) {
  return a.fitness == b.fitness &&
         a.behavior_descriptor == b.behavior_descriptor &&
         a.steps_taken == b.steps_taken &&
         a.terminated_early == b.terminated_early;
}

}  // namespace qd
