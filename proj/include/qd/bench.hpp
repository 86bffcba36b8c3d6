#pragma once

// Throughput harness. Measures env-steps per second of batched stepping
// over a set of persistent episode slots: every engine tick advances each
// slot by one step (auto-resetting finished episodes), so a tick costs
// batch_size env-steps plus one fixed dispatch. That is the same
// advance/observe/forward path the rollout engine runs; a checksum over
// completed-episode summaries pins the two together in tests.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qd/env.hpp"
#include "qd/hash.hpp"
#include "qd/policy.hpp"
#include "qd/rng.hpp"
#include "qd/threading.hpp"
#include "qd/version.hpp"

namespace qd {

enum class BenchPolicy { RandomAction, FixedGenotype };

struct BenchConfig {
  WorldId world = WorldId::PointMaze;
  int batch_size = 1;
  BenchPolicy policy = BenchPolicy::RandomAction;
  long long warmup_steps = 10000;
  long long measure_steps = 100000;
  int repeats = 3;
  int threads = 1;
  uint64_t seed = 0;
  // Topology for FixedGenotype runs; world default when unset.
  std::optional<std::vector<int>> hidden;

  void validate() const {
    if (batch_size < 1) {
      throw std::invalid_argument("bench: batch_size must be >= 1");
    }
    if (repeats < 2) {
      throw std::invalid_argument("bench: repeats must be >= 2 (std undefined)");
    }
    if (measure_steps < 10LL * batch_size) {
      throw std::invalid_argument("bench: measure_steps must be >= 10 * batch_size");
    }
  }
};

struct BenchResult {
  std::string world;
  int batch_size = 0;
  int threads = 0;
  double steps_per_second_mean = 0.0;
  double steps_per_second_std = 0.0;
  std::vector<double> per_repeat;
  long long env_steps_per_repeat = 0;
  uint64_t episodes_completed = 0;  // across all repeats
  uint64_t checksum = 0;            // over completed-episode summaries
};

struct HostFingerprint {
  unsigned hardware_threads = 0;
  int threads = 0;
  std::string compiler;

  static HostFingerprint detect(int threads) {
    HostFingerprint fp;
    fp.hardware_threads = std::thread::hardware_concurrency();
    fp.threads = threads;
#if defined(__VERSION__)
    fp.compiler = __VERSION__;
#else
    fp.compiler = "unknown";
#endif
    return fp;
  }

  std::string describe() const {
    std::ostringstream out;
    out << "threads=" << threads << " hardware_threads=" << hardware_threads
        << " compiler=\"" << compiler << "\"";
    return out.str();
  }
};

namespace detail {

// Persistent episode slots stepped in lockstep. Slot s runs episodes
// s, s + B, s + 2B, ... so the episode schedule is a function of the slot
// index alone, never of thread timing.
class BenchEngine {
 public:
  BenchEngine(const EnvSpec& spec, const BenchConfig& config,
              const Genotype* genotype)
      : spec_(spec), config_(config), genotype_(genotype) {
    slots_.resize(static_cast<size_t>(config.batch_size));
    reset_all();
  }

  void reset_all() {
    for (size_t s = 0; s < slots_.size(); ++s) {
      Slot& slot = slots_[s];
      slot.episode = static_cast<uint64_t>(s);
      slot.state = reset(spec_, episode_seed(slot.episode));
      slot.policy_rng = policy_stream(slot.episode);
      slot.fitness = 0.0;
      slot.obs.assign(static_cast<size_t>(spec_.obs_dim), 0.0);
      slot.act.assign(static_cast<size_t>(spec_.action_dim), 0.0);
      slot.checksum = kFnvOffset;
      slot.episodes_completed = 0;
    }
  }

  void run_ticks(long long ticks, ThreadPool* pool) {
    const int n = static_cast<int>(slots_.size());
    auto step_slot = [this](int s) { advance_slot(slots_[static_cast<size_t>(s)]); };
    for (long long t = 0; t < ticks; ++t) {
      if (pool != nullptr) {
        pool->parallel_for(n, step_slot);
      } else {
        for (int s = 0; s < n; ++s) step_slot(s);
      }
    }
  }

  // Order-independent across slots: per-slot chains folded in slot order.
  uint64_t checksum() const {
    uint64_t h = kFnvOffset;
    for (const Slot& slot : slots_) h = fnv1a_u64(slot.checksum, h);
    return h;
  }

  uint64_t episodes_completed() const {
    uint64_t n = 0;
    for (const Slot& slot : slots_) n += slot.episodes_completed;
    return n;
  }

  uint64_t episode_seed(uint64_t episode) const {
    return derive_seed(config_.seed, episode, 0);
  }

 private:
  struct Slot {
    EnvState state;
    uint64_t episode = 0;
    RngStream policy_rng;
    double fitness = 0.0;
    std::vector<double> obs;
    std::vector<double> act;
    std::vector<double> workspace;
    uint64_t checksum = kFnvOffset;
    uint64_t episodes_completed = 0;
  };

  RngStream policy_stream(uint64_t episode) const {
    return RngStream(episode_seed(episode), 1);
  }

  void advance_slot(Slot& slot) {
    observe(spec_, slot.state, slot.obs);
    if (config_.policy == BenchPolicy::RandomAction) {
      for (double& a : slot.act) a = slot.policy_rng.uniform(-1.0, 1.0);
    } else {
      forward(*genotype_, slot.obs, slot.act, slot.workspace);
    }
    const StepEffect effect = advance(spec_, slot.state, slot.act);
    slot.fitness += effect.reward;
    if (!slot.state.done) return;

    // Fold the finished episode's summary exactly as a rollout() caller
    // would see it, then start the slot's next episode.
    const Vec2 bd = descriptor(spec_.world, slot.state);
    uint64_t h = slot.checksum;
    h = fnv1a_f64(slot.fitness, h);
    h = fnv1a_f64(bd.x, h);
    h = fnv1a_f64(bd.y, h);
    h = fnv1a_u64(static_cast<uint64_t>(slot.state.step_index), h);
    slot.checksum = h;
    slot.episodes_completed += 1;

    slot.episode += slots_.size();
    slot.state = reset(spec_, episode_seed(slot.episode));
    slot.policy_rng = policy_stream(slot.episode);
    slot.fitness = 0.0;
  }

  EnvSpec spec_;
  BenchConfig config_;
  const Genotype* genotype_;
  std::vector<Slot> slots_;
};

inline uint64_t summary_checksum(const TrajectorySummary& s, uint64_t h) {
  h = fnv1a_f64(s.fitness, h);
  h = fnv1a_f64(s.behavior_descriptor.x, h);
  h = fnv1a_f64(s.behavior_descriptor.y, h);
  h = fnv1a_u64(static_cast<uint64_t>(s.steps_taken), h);
  return h;
}

}  // namespace detail

inline BenchResult measure_throughput(const BenchConfig& config,
                                      ThreadPool* pool = nullptr) {
  config.validate();
  const EnvSpec spec = make_env_spec(config.world);
  Genotype genotype;
  if (config.policy == BenchPolicy::FixedGenotype) {
    const Topology topology{spec.obs_dim,
                            config.hidden.value_or(spec.world.default_hidden),
                            spec.action_dim};
    genotype = init_genotype(topology, config.seed);
  }
  detail::BenchEngine engine(spec, config,
                             config.policy == BenchPolicy::FixedGenotype
                                 ? &genotype
                                 : nullptr);

  std::optional<ThreadPool> own_pool;
  if (pool == nullptr && config.threads > 1) {
    own_pool.emplace(config.threads);
    pool = &*own_pool;
  }

  const long long warmup_ticks =
      (config.warmup_steps + config.batch_size - 1) / config.batch_size;
  const long long measure_ticks =
      (config.measure_steps + config.batch_size - 1) / config.batch_size;

  BenchResult result;
  result.world = world_name(config.world);
  result.batch_size = config.batch_size;
  result.threads = config.threads;
  result.env_steps_per_repeat = measure_ticks * config.batch_size;

  for (int r = 0; r < config.repeats; ++r) {
    engine.reset_all();
    engine.run_ticks(warmup_ticks, pool);
    const auto t0 = std::chrono::steady_clock::now();
    engine.run_ticks(measure_ticks, pool);
    const auto t1 = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(t1 - t0).count();
    result.per_repeat.push_back(
        static_cast<double>(result.env_steps_per_repeat) / elapsed);
    result.episodes_completed += engine.episodes_completed();
    result.checksum = fnv1a_u64(engine.checksum(), result.checksum);
  }

  double mean = 0.0;
  for (const double v : result.per_repeat) mean += v;
  mean /= static_cast<double>(result.per_repeat.size());
  double var = 0.0;
  for (const double v : result.per_repeat) var += (v - mean) * (v - mean);
  var /= static_cast<double>(result.per_repeat.size() - 1);
  result.steps_per_second_mean = mean;
  result.steps_per_second_std = std::sqrt(var);
  return result;
}

inline std::vector<BenchResult> scaling_sweep(WorldId world,
                                              const std::vector<int>& batches,
                                              BenchConfig base) {
  for (size_t i = 1; i < batches.size(); ++i) {
    if (batches[i] <= batches[i - 1]) {
      throw std::invalid_argument("scaling_sweep: batch sizes must be ascending");
    }
  }
  std::optional<ThreadPool> pool;
  if (base.threads > 1) pool.emplace(base.threads);
  std::vector<BenchResult> results;
  for (const int batch : batches) {
    BenchConfig config = base;
    config.world = world;
    config.batch_size = batch;
    if (config.measure_steps < 10LL * batch) {
      config.measure_steps = 10LL * batch;
    }
    results.push_back(measure_throughput(config, pool ? &*pool : nullptr));
  }
  return results;
}

// ---------------------------------------------------------------------------
// Reporting

inline void write_bench_csv(std::ostream& out,
                            std::span<const BenchResult> results) {
  out << "world,batch_size,threads,steps_per_second_mean,"
         "steps_per_second_std,repeats\n";
  const auto flags = out.flags();
  out.precision(10);
  for (const BenchResult& r : results) {
    out << r.world << ',' << r.batch_size << ',' << r.threads << ','
        << r.steps_per_second_mean << ',' << r.steps_per_second_std << ','
        << r.per_repeat.size() << '\n';
  }
  out.flags(flags);
}

// Published reference throughput (steps/s) from the original study this
// suite re-implements, kept verbatim for context next to measured values.
struct ReferenceThroughput {
  const char* setup;
  const char* world;
  const char* value;
};

inline std::span<const ReferenceThroughput> reference_throughput_cpu() {
  static constexpr ReferenceThroughput rows[] = {
      {"MuJoCo/NumPy, single CPU", "pointmaze", "9820 +- 180"},
      {"MuJoCo/NumPy, single CPU", "antmaze", "1170 +- 20"},
      {"MuJoCo/NumPy, single CPU", "anttrap", "1470 +- 50"},
      {"Brax/Jax, single CPU", "pointmaze", "(1.52 +- 0.13)e6"},
      {"Brax/Jax, single CPU", "antmaze", "4480 +- 110"},
      {"Brax/Jax, single CPU", "anttrap", "7470 +- 180"},
  };
  return rows;
}

inline std::span<const ReferenceThroughput> reference_throughput_gpu() {
  static constexpr ReferenceThroughput rows[] = {
      {"Brax/Jax, GPU, batch 1", "pointmaze", "21260 +- 1860"},
      {"Brax/Jax, GPU, batch 1", "antmaze", "345 +- 3"},
      {"Brax/Jax, GPU, batch 1", "anttrap", "356 +- 3"},
      {"Brax/Jax, GPU, batch 10", "pointmaze", "(2.14 +- 0.22)e5"},
      {"Brax/Jax, GPU, batch 10", "antmaze", "3290 +- 20"},
      {"Brax/Jax, GPU, batch 10", "anttrap", "3330 +- 30"},
      {"Brax/Jax, GPU, batch 100", "pointmaze", "(2.14 +- 0.14)e6"},
      {"Brax/Jax, GPU, batch 100", "antmaze", "31520 +- 90"},
      {"Brax/Jax, GPU, batch 100", "anttrap", "30840 +- 80"},
      {"Brax/Jax, GPU, batch 1000", "pointmaze", "(2.03 +- 0.27)e7"},
      {"Brax/Jax, GPU, batch 1000", "antmaze", "1.77e5 +- 740"},
      {"Brax/Jax, GPU, batch 1000", "anttrap", "(2.3 +- 0.014)e5"},
  };
  return rows;
}

// Human-readable report: measured results first, then the published
// reference numbers, clearly labeled as context rather than targets.
inline void write_bench_report(std::ostream& out,
                               std::span<const BenchResult> results,
                               const HostFingerprint& fingerprint) {
  out << "# Throughput report\n\n";
  out << "Host: " << fingerprint.describe() << "\n";
  out << "Code version: " << kVersion << "\n\n";
  out << "## Measured (this implementation, env-steps/s)\n\n";
  out << "world        batch    threads  steps/s mean    steps/s std\n";
  const auto flags = out.flags();
  out.precision(6);
  for (const BenchResult& r : results) {
    out.width(13);
    out << std::left << r.world;
    out.width(9);
    out << std::left << r.batch_size;
    out.width(9);
    out << std::left << r.threads;
    out.width(16);
    out << std::left << r.steps_per_second_mean;
    out << r.steps_per_second_std << "\n";
  }
  out.flags(flags);
  out << "\n## Reference values (published, for context only)\n\n";
  out << "These are the throughput numbers reported for the original\n";
  out << "implementations of these benchmarks. They were measured on\n";
  out << "different hardware and software stacks and are NOT pass/fail\n";
  out << "targets for this suite.\n\n";
  out << "Single CPU:\n";
  for (const ReferenceThroughput& row : reference_throughput_cpu()) {
    out << "  [reference] " << row.setup << ", " << row.world << ": "
        << row.value << " steps/s\n";
  }
  out << "\nGPU batch scaling (Tesla T4):\n";
  for (const ReferenceThroughput& row : reference_throughput_gpu()) {
    out << "  [reference] " << row.setup << ", " << row.world << ": "
        << row.value << " steps/s\n";
  }
}

}  // namespace qd
