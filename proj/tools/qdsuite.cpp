// qdsuite: run QD experiments, replay archived elites, benchmark stepping
// throughput, and export archives for plotting.
//
// Output paths: relative output directories resolve against
// $QDSUITE_OUTPUT_ROOT when it is set, the working directory otherwise.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qd/qd.hpp"

namespace fs = std::filesystem;

namespace {

fs::path resolve_output(const std::string& dir) {
  fs::path p(dir);
  if (p.is_absolute()) return p;
  const char* root = std::getenv("QDSUITE_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0') return fs::path(root) / p;
  return p;
}

// Layout paths inside a config resolve against the config file's folder,
// so a config directory stays relocatable.
fs::path resolve_beside(const std::string& base_file, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  return fs::path(base_file).parent_path() / p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write on " + path.string());
}

int cmd_run(const std::string& config_path) {
  const qd::RunConfig config = qd::load_run_config(config_path);
  std::optional<qd::MazeLayout> layout;
  if (config.layout_path) {
    layout = qd::load_layout(
        resolve_beside(config_path, *config.layout_path).string());
  }
  // Fail on a bad world/layout combination before any output appears.
  const qd::WorldDef world = layout ? qd::make_world(config.world, *layout)
                                    : qd::make_world(config.world);

  const fs::path out_dir = resolve_output(config.output_dir);
  fs::create_directories(out_dir);

  std::optional<qd::ThreadPool> pool;
  if (config.threads > 1) pool.emplace(config.threads);

  qd::Json manifest;
  manifest["config_hash"] = config.config_hash;
  manifest["code_version"] = qd::kVersion;
  manifest["config_file"] = config_path;
  manifest["world"] = qd::world_name(config.world);
  manifest["emitter"] = qd::emitter_name(config.emitter);
  manifest["seeds"] = config.seeds;
  qd::Json runs = qd::Json::array();

  for (const uint64_t seed : config.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const qd::RunResult result = qd::qd_loop(
        qd::make_loop_config(config, seed, layout), pool ? &*pool : nullptr);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    const std::string metrics_name = "metrics_seed" + std::to_string(seed) + ".csv";
    const std::string snapshot_name = "snapshot_seed" + std::to_string(seed) + ".qda";
    {
      std::ostringstream csv;
      qd::write_metrics_csv(csv, result.metrics, config.config_hash);
      write_file(out_dir / metrics_name, csv.str());
    }
    qd::save_snapshot((out_dir / snapshot_name).string(), result.archive,
                      config.world, world.layout, config.config_hash);

    qd::Json row;
    row["seed"] = seed;
    row["metrics_csv"] = metrics_name;
    row["snapshot"] = snapshot_name;
    row["generations"] = result.metrics.size();
    row["env_steps"] = result.env_steps;
    row["evaluations"] = result.evaluations;
    row["coverage"] = result.archive.coverage();
    row["best_fitness"] = result.best_fitness;
    if (std::isfinite(result.min_goal_distance)) {
      row["min_goal_distance"] = result.min_goal_distance;
    }
    row["elapsed_s"] = elapsed;
    runs.push_back(row);

    std::cout << "seed " << seed << ": " << result.metrics.size()
              << " generations, " << result.env_steps << " env steps, coverage "
              << result.archive.coverage() << ", best fitness "
              << result.best_fitness;
    if (std::isfinite(result.min_goal_distance)) {
      std::cout << ", min goal distance " << result.min_goal_distance;
    }
    std::cout << "\n";
  }

  manifest["runs"] = runs;
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "outputs written to " << out_dir.string() << "\n";
  return 0;
}

int cmd_replay(const std::string& snapshot_path, std::vector<int> cell,
               bool best, const std::string& trace_path) {
  const qd::Snapshot snap = qd::load_snapshot(snapshot_path);
  if (snap.elites.empty()) {
    std::cerr << "replay: snapshot holds no elites\n";
    return 1;
  }
  int flat = -1;
  if (!cell.empty()) {
    const int ix = cell[0];
    const int iy = cell[1];
    if (ix < 0 || ix >= snap.grid_res_x || iy < 0 || iy >= snap.grid_res_y) {
      std::cerr << "replay: cell (" << ix << ", " << iy << ") outside the "
                << snap.grid_res_x << "x" << snap.grid_res_y << " grid\n";
      return 1;
    }
    flat = iy * snap.grid_res_x + ix;
  } else if (best) {
    double best_fitness = -std::numeric_limits<double>::infinity();
    for (const auto& [f, elite] : snap.elites) {
      if (elite.fitness > best_fitness) {
        best_fitness = elite.fitness;
        flat = f;
      }
    }
  } else {
    std::cerr << "replay: pass --cell IX IY or --best\n";
    return 1;
  }

  const qd::Elite* elite = nullptr;
  for (const auto& [f, e] : snap.elites) {
    if (f == flat) {
      elite = &e;
      break;
    }
  }
  if (elite == nullptr) {
    std::cerr << "replay: cell " << flat % snap.grid_res_x << ", "
              << flat / snap.grid_res_x << " is empty\n";
    return 1;
  }

  const qd::WorldDef world = qd::make_world(snap.world, snap.layout);
  const qd::EnvSpec spec = qd::make_env_spec(world);
  const qd::TrajectorySummary replayed =
      qd::rollout(spec, elite->genotype, elite->seed);

  std::cout.precision(17);
  std::cout << "world:      " << qd::world_name(snap.world) << "\n";
  std::cout << "cell:       (" << flat % snap.grid_res_x << ", "
            << flat / snap.grid_res_x << ")\n";
  std::cout << "seed:       " << elite->seed << "\n";
  std::cout << "stored:     fitness " << elite->fitness << ", descriptor ("
            << elite->descriptor.x << ", " << elite->descriptor.y << ")\n";
  std::cout << "replayed:   fitness " << replayed.fitness << ", descriptor ("
            << replayed.behavior_descriptor.x << ", "
            << replayed.behavior_descriptor.y << "), steps "
            << replayed.steps_taken << "\n";

  const bool match = replayed.fitness == elite->fitness &&
                     replayed.behavior_descriptor == elite->descriptor;
  std::cout << (match ? "MATCH: replay reproduced the stored elite exactly"
                      : "MISMATCH: replay diverged from the stored elite")
            << "\n";

  if (!trace_path.empty()) {
    std::ostringstream csv;
    csv << "step,x,y,reward,done\n";
    csv.precision(17);
    qd::EnvState state = qd::reset(spec, elite->seed);
    std::vector<double> obs(static_cast<size_t>(spec.obs_dim));
    std::vector<double> act(static_cast<size_t>(spec.action_dim));
    std::vector<double> workspace;
    while (!state.done) {
      qd::observe(spec, state, obs);
      qd::forward(elite->genotype, obs, act, workspace);
      const qd::StepEffect effect = qd::advance(spec, state, act);
      csv << state.step_index << ',' << state.position.x << ','
          << state.position.y << ',' << effect.reward << ','
          << (effect.done ? 1 : 0) << '\n';
    }
    const fs::path out = resolve_output(trace_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_file(out, csv.str());
    std::cout << "trace written to " << out.string() << " ("
              << replayed.steps_taken << " rows)\n";
  }
  return match ? 0 : 1;
}

int cmd_bench(const std::string& world_str, std::vector<int> batches,
              int threads, const std::string& policy_str, int repeats,
              long long measure_steps, long long warmup_steps, uint64_t seed,
              const std::string& out_dir_str) {
  const std::optional<qd::WorldId> world = qd::world_from_name(world_str);
  if (!world) {
    std::cerr << "bench: unknown world \"" << world_str << "\"\n";
    return 1;
  }
  qd::BenchConfig base;
  base.threads = threads;
  base.repeats = repeats;
  base.measure_steps = measure_steps;
  base.warmup_steps = warmup_steps;
  base.seed = seed;
  if (policy_str == "random") {
    base.policy = qd::BenchPolicy::RandomAction;
  } else if (policy_str == "policy") {
    base.policy = qd::BenchPolicy::FixedGenotype;
  } else {
    std::cerr << "bench: --policy must be random or policy\n";
    return 1;
  }

  const std::vector<qd::BenchResult> results =
      qd::scaling_sweep(*world, batches, base);
  const qd::HostFingerprint fingerprint = qd::HostFingerprint::detect(threads);

  std::ostringstream report;
  qd::write_bench_report(report, results, fingerprint);
  std::cout << report.str();

  if (!out_dir_str.empty()) {
    const fs::path out_dir = resolve_output(out_dir_str);
    fs::create_directories(out_dir);
    std::ostringstream csv;
    qd::write_bench_csv(csv, results);
    write_file(out_dir / "bench.csv", csv.str());
    write_file(out_dir / "bench_report.txt", report.str());
    std::cout << "outputs written to " << out_dir.string() << "\n";
  }
  return 0;
}

int cmd_export(const std::string& snapshot_path, const std::string& out_path) {
  const qd::Snapshot snap = qd::load_snapshot(snapshot_path);
  std::ostringstream csv;
  csv << "cell_x,cell_y,fitness\n";
  csv.precision(17);
  for (const auto& [flat, elite] : snap.elites) {
    csv << flat % snap.grid_res_x << ',' << flat / snap.grid_res_x << ','
        << elite.fitness << '\n';
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    const fs::path out = resolve_output(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_file(out, csv.str());
    std::cout << snap.elites.size() << " elites exported to " << out.string()
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QD neuroevolution suite: deterministic maze/trap benchmarks, "
               "MAP-Elites archives, throughput harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qd::kVersion);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run a QD experiment from a config");
  run->add_option("--config", config_path, "JSON run config")->required();

  std::string snapshot_path;
  std::vector<int> cell;
  bool best = false;
  std::string trace_path;
  CLI::App* replay =
      app.add_subcommand("replay", "Re-simulate an elite from a snapshot");
  replay->add_option("--snapshot", snapshot_path, "archive snapshot (.qda)")
      ->required();
  replay->add_option("--cell", cell, "grid cell, as IX IY")->expected(2);
  replay->add_flag("--best", best, "replay the highest-fitness elite");
  replay->add_option("--trace", trace_path, "write per-step trajectory CSV");

  std::string bench_world = "pointmaze";
  std::vector<int> batches{1, 10, 100, 1000};
  int threads = 1;
  std::string policy = "random";
  int repeats = 3;
  long long measure_steps = 100000;
  long long warmup_steps = 10000;
  uint64_t bench_seed = 0;
  std::string bench_out;
  CLI::App* bench =
      app.add_subcommand("bench", "Measure batched stepping throughput");
  bench->add_option("--world", bench_world, "pointmaze | antmaze | anttrap");
  bench->add_option("--batches", batches, "ascending batch sizes")
      ->delimiter(',');
  bench->add_option("--threads", threads, "worker threads");
  bench->add_option("--policy", policy, "random | policy");
  bench->add_option("--repeats", repeats, "timed repeats per batch size");
  bench->add_option("--measure-steps", measure_steps, "timed env steps");
  bench->add_option("--warmup-steps", warmup_steps, "untimed env steps");
  bench->add_option("--seed", bench_seed, "bench seed");
  bench->add_option("--out", bench_out, "output directory for CSV + report");

  std::string export_snapshot;
  std::string export_out;
  CLI::App* exp =
      app.add_subcommand("export", "Export archive cells as heatmap CSV");
  exp->add_option("--snapshot", export_snapshot, "archive snapshot (.qda)")
      ->required();
  exp->add_option("--out", export_out, "output CSV (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (replay->parsed()) {
      return cmd_replay(snapshot_path, cell, best, trace_path);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_world, batches, threads, policy, repeats,
                       measure_steps, warmup_steps, bench_seed, bench_out);
    }
    if (exp->parsed()) return cmd_export(export_snapshot, export_out);
  } catch (const qd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
