#pragma once

// The MAP-Elites loop: select/vary (via an emitter), evaluate as one
// batch, insert into the archive, log metrics. Everything downstream of
// the config seed is deterministic; wall_time_s in the metrics is the
// only field that varies between identical runs.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/archive.hpp"
#include "qd/emitters.hpp"
#include "qd/env.hpp"
#include "qd/hash.hpp"
#include "qd/threading.hpp"
#include "qd/version.hpp"

namespace qd {

struct QdScoreConfig {
  double offset = 0.0;
  bool episode_mean = false;  // score elites by per-step mean fitness
};

// Offsets chosen so shipped-config scores stay non-negative: PointMaze
// fitness is bounded below by -200 * 2 * sqrt(2), AntMaze per-step mean by
// the arena diagonal (~106, padded to 110). AntTrap scores are left raw.
inline QdScoreConfig default_qd_score(WorldId world) {
  switch (world) {
    case WorldId::PointMaze: return {-565.685424949238058, false};
    case WorldId::AntMaze: return {-110.0, true};
    case WorldId::AntTrap: return {0.0, false};
  }
  return {};
}

struct LoopConfig {
  WorldId world = WorldId::PointMaze;
  EmitterKind emitter = EmitterKind::Ga;
  int grid_res_x = 50;
  int grid_res_y = 50;
  uint64_t budget_env_steps = 0;
  int batch = 256;
  uint64_t seed = 0;
  EmitterParams params;
  std::optional<QdScoreConfig> qd_score;     // default per world
  std::optional<std::vector<int>> hidden;    // default per world
  std::optional<MazeLayout> layout;          // default built-in layout
};

struct RunResult {
  explicit RunResult(Archive a) : archive(std::move(a)) {}

  Archive archive;
  std::vector<Metrics> metrics;
  uint64_t env_steps = 0;
  uint64_t evaluations = 0;
  double best_fitness = 0.0;
  // Smallest elite-descriptor distance to the goal; +inf for goal-less
  // worlds. This is the "how close did anything get" number.
  double min_goal_distance = std::numeric_limits<double>::infinity();
};

namespace detail {

// Seed domains keep evaluation seeds and init-genotype seeds disjoint.
inline constexpr uint64_t kInitSeedDomain = 0x8000000000000000ull;

inline uint64_t eval_seed(uint64_t run_seed, uint64_t generation, int index) {
  return derive_seed(run_seed, generation, static_cast<uint64_t>(index));
}

inline uint64_t init_seed(uint64_t run_seed, int index) {
  return derive_seed(run_seed, kInitSeedDomain, static_cast<uint64_t>(index));
}

}  // namespace detail

inline RunResult qd_loop(const LoopConfig& config, ThreadPool* pool = nullptr) {
  if (config.batch <= 0) {
    throw std::invalid_argument("qd_loop: batch must be > 0");
  }
  // A generation costs at least one env step per episode; a budget that
  // cannot cover generation 0 is a config error, not a short run.
  if (config.budget_env_steps < static_cast<uint64_t>(config.batch)) {
    throw std::invalid_argument(
        "qd_loop: budget_env_steps smaller than one generation");
  }

  const WorldDef world = config.layout
                             ? make_world(config.world, *config.layout)
                             : make_world(config.world);
  const EnvSpec spec = make_env_spec(world);
  Topology topology{spec.obs_dim, config.hidden.value_or(world.default_hidden),
                    spec.action_dim};
  topology.validate();

  const QdScoreConfig score =
      config.qd_score.value_or(default_qd_score(config.world));
  GridSpec grid{spec.descriptor_space, config.grid_res_x, config.grid_res_y};
  RunResult result{Archive(grid)};

  std::unique_ptr<Emitter> emitter =
      make_emitter(config.emitter, config.batch, config.params);
  const bool track_novelty = emitter->wants_novelty();
  NoveltyArchive novelty_archive(config.params.novelty_k);
  RngStream emitter_rng(config.seed, 1);

  const auto start_time = std::chrono::steady_clock::now();
  std::vector<uint64_t> seeds(static_cast<size_t>(config.batch));
  std::vector<double> novelty;

  uint64_t generation = 0;
  while (result.env_steps < config.budget_env_steps) {
    std::vector<Genotype> genotypes;
    if (generation == 0) {
      genotypes.reserve(static_cast<size_t>(config.batch));
      for (int i = 0; i < config.batch; ++i) {
        genotypes.push_back(
            init_genotype(topology, detail::init_seed(config.seed, i)));
      }
    } else {
      genotypes = emitter->ask(result.archive, emitter_rng);
    }

    for (int i = 0; i < config.batch; ++i) {
      seeds[static_cast<size_t>(i)] =
          detail::eval_seed(config.seed, generation, i);
    }
    const std::vector<TrajectorySummary> summaries =
        batch_rollout(spec, genotypes, seeds, pool);

    for (const TrajectorySummary& s : summaries) {
      result.env_steps += static_cast<uint64_t>(s.steps_taken);
    }
    result.evaluations += static_cast<uint64_t>(config.batch);

    if (track_novelty) {
      // Score against what was stored before this generation, then add
      // this generation's descriptors for the next one.
      novelty.resize(summaries.size());
      for (size_t i = 0; i < summaries.size(); ++i) {
        novelty[i] = novelty_archive.score(summaries[i].behavior_descriptor);
      }
      for (const TrajectorySummary& s : summaries) {
        novelty_archive.add(s.behavior_descriptor);
      }
    }
    emitter->tell(genotypes, summaries,
                  track_novelty ? std::span<const double>(novelty)
                                : std::span<const double>());

    for (size_t i = 0; i < summaries.size(); ++i) {
      result.archive.insert(genotypes[i], summaries[i].fitness,
                            summaries[i].behavior_descriptor, seeds[i],
                            summaries[i].steps_taken);
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_time)
            .count();
    Metrics row;
    row.generation = static_cast<int>(generation);
    row.env_steps = result.env_steps;
    row.evaluations = result.evaluations;
    row.coverage = result.archive.coverage();
    row.best_fitness = result.archive.best_fitness();
    row.qd_score = result.archive.qd_score(score.offset, score.episode_mean);
    row.wall_time_s = elapsed;
    result.metrics.push_back(row);
    ++generation;
  }

  result.best_fitness = result.archive.best_fitness();
  if (world.layout.goal) {
    result.min_goal_distance =
        result.archive.min_descriptor_distance(*world.layout.goal);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Metrics CSV

// Comment header carries identification; the column schema is fixed.
// wall_time_s is measured, so byte-comparisons of reruns must mask the
// final column (everything else is deterministic).
inline void write_metrics_csv(std::ostream& out,
                              std::span<const Metrics> metrics,
                              const std::string& config_hash) {
  out << "# config_hash: " << config_hash << "\n";
  out << "# code_version: " << kVersion << "\n";
  out << "generation,env_steps,evaluations,coverage,best_fitness,qd_score,"
         "wall_time_s\n";
  const auto flags = out.flags();
  out.precision(17);
  for (const Metrics& m : metrics) {
    out << m.generation << ',' << m.env_steps << ',' << m.evaluations << ','
        << m.coverage << ',' << m.best_fitness << ',' << m.qd_score << ','
        << m.wall_time_s << '\n';
  }
  out.flags(flags);
}

}  // namespace qd
