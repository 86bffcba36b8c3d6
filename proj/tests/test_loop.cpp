#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/config.hpp"
#include "qd/qd_loop.hpp"
#include "qd/snapshot.hpp"
#include "qd/threading.hpp"

using qd::Archive;
using qd::EmitterKind;
using qd::LoopConfig;
using qd::RunResult;
using qd::ThreadPool;
using qd::WorldId;

namespace {

LoopConfig small_pointmaze(EmitterKind emitter, uint64_t seed) {
  LoopConfig config;
  config.world = WorldId::PointMaze;
  config.emitter = emitter;
  config.budget_env_steps = 16000;
  config.batch = 16;
  config.seed = seed;
  config.hidden = std::vector<int>{8};
  return config;
}

std::vector<uint8_t> snapshot_bytes(const RunResult& result,
                                    const LoopConfig& config) {
  const qd::MazeLayout layout =
      config.layout ? *config.layout
                    : qd::make_world(config.world).layout;
  return qd::encode_snapshot(result.archive, config.world, layout, "t");
}

}  // namespace

TEST_CASE("qd loop rejects budgets below one generation") {
  LoopConfig config = small_pointmaze(EmitterKind::Ga, 1);
  config.budget_env_steps = 15;  // batch is 16
  REQUIRE_THROWS_WITH(
      qd::qd_loop(config),
      Catch::Matchers::ContainsSubstring(
          "budget_env_steps smaller than one generation"));
}

TEST_CASE("a budget of exactly one batch runs a single generation") {
  LoopConfig config = small_pointmaze(EmitterKind::Ga, 3);
  config.budget_env_steps = 16;
  const RunResult result = qd::qd_loop(config);
  REQUIRE(result.metrics.size() == 1);
  REQUIRE(result.evaluations == 16);
  REQUIRE(result.env_steps >= 16);
  REQUIRE(result.archive.filled() >= 1);
}

TEST_CASE("identical configs rerun to identical results") {
  const LoopConfig config = small_pointmaze(EmitterKind::Ga, 42);
  const RunResult a = qd::qd_loop(config);
  const RunResult b = qd::qd_loop(config);

  // Snapshot bytes cover the whole archive, elite by elite, bitwise.
  REQUIRE(snapshot_bytes(a, config) == snapshot_bytes(b, config));

  REQUIRE(a.metrics.size() == b.metrics.size());
  for (size_t i = 0; i < a.metrics.size(); ++i) {
    REQUIRE(a.metrics[i].generation == b.metrics[i].generation);
    REQUIRE(a.metrics[i].env_steps == b.metrics[i].env_steps);
    REQUIRE(a.metrics[i].evaluations == b.metrics[i].evaluations);
    REQUIRE(a.metrics[i].coverage == b.metrics[i].coverage);
    REQUIRE(a.metrics[i].best_fitness == b.metrics[i].best_fitness);
    REQUIRE(a.metrics[i].qd_score == b.metrics[i].qd_score);
    // wall_time_s is measured, not derived; no assertion on it.
  }
  REQUIRE(a.env_steps == b.env_steps);
  REQUIRE(a.best_fitness == b.best_fitness);
  REQUIRE(a.min_goal_distance == b.min_goal_distance);
}

TEST_CASE("thread pools do not change loop results") {
  const LoopConfig config = small_pointmaze(EmitterKind::Es, 7);
  const RunResult serial = qd::qd_loop(config, nullptr);
  ThreadPool pool(4);
  const RunResult pooled = qd::qd_loop(config, &pool);
  REQUIRE(snapshot_bytes(serial, config) == snapshot_bytes(pooled, config));
}

TEST_CASE("coverage, best fitness and qd score never decrease") {
  LoopConfig config = small_pointmaze(EmitterKind::Ga, 11);
  config.budget_env_steps = 64000;
  config.batch = 64;
  const RunResult result = qd::qd_loop(config);
  REQUIRE(result.metrics.size() >= 5);
  for (size_t i = 1; i < result.metrics.size(); ++i) {
    REQUIRE(result.metrics[i].coverage >= result.metrics[i - 1].coverage);
    REQUIRE(result.metrics[i].best_fitness >=
            result.metrics[i - 1].best_fitness);
    REQUIRE(result.metrics[i].qd_score >= result.metrics[i - 1].qd_score);
  }
  REQUIRE(result.best_fitness == result.metrics.back().best_fitness);
}

TEST_CASE("every emitter kind completes a small run") {
  for (const EmitterKind kind :
       {EmitterKind::Ga, EmitterKind::Gaussian, EmitterKind::Es,
        EmitterKind::NoveltyEs, EmitterKind::BlendedEs}) {
    LoopConfig config = small_pointmaze(kind, 5);
    config.budget_env_steps = 3200;
    const RunResult result = qd::qd_loop(config);
    REQUIRE(result.env_steps >= config.budget_env_steps);
    REQUIRE(result.archive.filled() >= 1);
    REQUIRE(!result.metrics.empty());
  }
}

TEST_CASE("stored elites replay to their stored results exactly") {
  const LoopConfig config = small_pointmaze(EmitterKind::Ga, 99);
  const RunResult result = qd::qd_loop(config);
  REQUIRE(result.archive.filled() >= 10);

  const qd::EnvSpec spec = qd::make_env_spec(config.world);
  for (const int flat : result.archive.filled_cells()) {
    const qd::Elite& elite = *result.archive.cell(flat);
    const qd::TrajectorySummary replay =
        qd::rollout(spec, elite.genotype, elite.seed);
    REQUIRE(replay.fitness == elite.fitness);
    REQUIRE(replay.behavior_descriptor == elite.descriptor);
    REQUIRE(replay.steps_taken == elite.steps_taken);
    // The stored cell is the cell the descriptor bins to.
    REQUIRE(qd::flat_cell_index(elite.descriptor, result.archive.grid()) ==
            flat);
  }
}

TEST_CASE("min goal distance summarizes the archive") {
  const LoopConfig config = small_pointmaze(EmitterKind::Ga, 13);
  const RunResult result = qd::qd_loop(config);
  const qd::WorldDef world = qd::make_world(config.world);
  REQUIRE(world.layout.goal.has_value());

  double expected = std::numeric_limits<double>::infinity();
  double expected_hypot = std::numeric_limits<double>::infinity();
  for (const int flat : result.archive.filled_cells()) {
    const qd::Vec2 d = result.archive.cell(flat)->descriptor;
    expected = std::min(expected, qd::distance(d, *world.layout.goal));
    expected_hypot = std::min(
        expected_hypot,
        std::hypot(d.x - world.layout.goal->x, d.y - world.layout.goal->y));
  }
  REQUIRE(result.min_goal_distance == expected);
  // Sanity-check the library distance against an independent formula.
  REQUIRE_THAT(result.min_goal_distance,
               Catch::Matchers::WithinRel(expected_hypot, 1e-12));

  // Goal-less worlds report +inf.
  LoopConfig trap;
  trap.world = WorldId::AntTrap;
  trap.emitter = EmitterKind::Ga;
  trap.budget_env_steps = 4000;
  trap.batch = 4;
  trap.seed = 1;
  trap.hidden = std::vector<int>{4};
  const RunResult trap_result = qd::qd_loop(trap);
  REQUIRE(std::isinf(trap_result.min_goal_distance));
}

TEST_CASE("metrics CSV carries identification and the fixed schema") {
  LoopConfig config = small_pointmaze(EmitterKind::Ga, 2);
  config.budget_env_steps = 3200;
  const RunResult result = qd::qd_loop(config);

  std::ostringstream out;
  qd::write_metrics_csv(out, result.metrics, "deadbeef00000000");
  const std::string text = out.str();
  REQUIRE(text.find("# config_hash: deadbeef00000000\n") == 0);
  REQUIRE(text.find("# code_version: ") != std::string::npos);
  REQUIRE(text.find("generation,env_steps,evaluations,coverage,best_fitness,"
                    "qd_score,wall_time_s\n") != std::string::npos);

  // One data line per generation.
  size_t lines = 0;
  for (const char c : text) lines += (c == '\n');
  REQUIRE(lines == 3 + result.metrics.size());
}

TEST_CASE("world defaults fill in hidden layers and layout") {
  LoopConfig config;
  config.world = WorldId::PointMaze;
  config.emitter = EmitterKind::Ga;
  config.budget_env_steps = 8;
  config.batch = 8;
  config.seed = 21;
  const RunResult result = qd::qd_loop(config);
  REQUIRE(result.archive.filled() >= 1);
  const int first = result.archive.filled_cells().front();
  REQUIRE(result.archive.cell(first)->genotype.topology.hidden ==
          std::vector<int>{64, 64});

  // A custom layout rides through to the snapshot.
  qd::MazeLayout arena;
  arena.bounds = {{-2.0, -2.0}, {2.0, 2.0}};
  arena.start = {0.0, 0.0};
  arena.goal = qd::Vec2{1.5, 1.5};
  arena.goal_radius = 0.1;
  LoopConfig custom = small_pointmaze(EmitterKind::Ga, 4);
  custom.budget_env_steps = 160;
  custom.layout = arena;
  const RunResult custom_result = qd::qd_loop(custom);
  const std::vector<uint8_t> bytes = snapshot_bytes(custom_result, custom);
  const qd::Snapshot snap = qd::decode_snapshot(bytes);
  REQUIRE(snap.layout.bounds.high.x == 2.0);
  REQUIRE(snap.layout.start == arena.start);
  REQUIRE(snap.layout.goal.has_value());
  REQUIRE(*snap.layout.goal == *arena.goal);
}
