#pragma once

// MAP-Elites grid archive plus the novelty archive used by the
// exploration emitters. One elite per cell, strictly-better replacement,
// ties keep the incumbent so insertion order cannot matter.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qd/env_types.hpp"
#include "qd/geometry.hpp"
#include "qd/policy.hpp"
#include "qd/rng.hpp"

namespace qd {

struct GridSpec {
  Box2 descriptor_space;
  int res_x = 50;
  int res_y = 50;

  int cell_count() const { return res_x * res_y; }

  void validate() const {
    if (res_x < 1 || res_y < 1) {
      throw std::invalid_argument("grid: resolution must be >= 1 per axis");
    }
    if (!(descriptor_space.low.x < descriptor_space.high.x) ||
        !(descriptor_space.low.y < descriptor_space.high.y)) {
      throw std::invalid_argument("grid: descriptor space low must be < high");
    }
  }
};

// Uniform binning, out-of-box descriptors clamp to the boundary cell.
inline std::pair<int, int> cell_index(Vec2 d, const GridSpec& grid) {
  const Box2& box = grid.descriptor_space;
  auto bin = [](double v, double lo, double hi, int res) {
    int i = static_cast<int>(std::floor((v - lo) * res / (hi - lo)));
    if (i < 0) i = 0;
    if (i > res - 1) i = res - 1;
    return i;
  };
  return {bin(d.x, box.low.x, box.high.x, grid.res_x),
          bin(d.y, box.low.y, box.high.y, grid.res_y)};
}

inline int flat_cell_index(Vec2 d, const GridSpec& grid) {
  const auto [ix, iy] = cell_index(d, grid);
  return iy * grid.res_x + ix;
}

struct Elite {
  Genotype genotype;
  double fitness = 0.0;
  Vec2 descriptor;
  uint64_t seed = 0;     // evaluation seed, kept for exact replay
  int steps_taken = 0;   // episode length behind this fitness
};

enum class InsertOutcome { Inserted, Replaced, Rejected };

class Archive {
 public:
  explicit Archive(GridSpec grid) : grid_(grid) {
    grid_.validate();
    cells_.resize(static_cast<size_t>(grid_.cell_count()));
  }

  const GridSpec& grid() const { return grid_; }

  InsertOutcome insert(const Genotype& genotype, double fitness,
                       Vec2 descriptor, uint64_t seed, int steps_taken) {
    if (std::isnan(fitness)) {
      throw std::invalid_argument("archive insert: NaN fitness");
    }
    const int flat = flat_cell_index(descriptor, grid_);
    std::optional<Elite>& cell = cells_[static_cast<size_t>(flat)];
    if (!cell) {
      cell = Elite{genotype, fitness, descriptor, seed, steps_taken};
      ++filled_;
      return InsertOutcome::Inserted;
    }
    if (fitness > cell->fitness) {
      cell = Elite{genotype, fitness, descriptor, seed, steps_taken};
      return InsertOutcome::Replaced;
    }
    return InsertOutcome::Rejected;
  }

  const std::optional<Elite>& cell(int flat) const {
    return cells_.at(static_cast<size_t>(flat));
  }

  int filled() const { return filled_; }
  int cell_count() const { return grid_.cell_count(); }
  double coverage() const {
    return static_cast<double>(filled_) / grid_.cell_count();
  }

  // Flat indices of occupied cells, ascending.
  std::vector<int> filled_cells() const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(filled_));
    for (size_t i = 0; i < cells_.size(); ++i) {
      if (cells_[i]) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  double best_fitness() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& cell : cells_) {
      if (cell && cell->fitness > best) best = cell->fitness;
    }
    return best;
  }

  // Sum over elites of (value - offset), where value is the raw fitness
  // or, for worlds scored per step, the episode mean. Iterates cells in
  // index order so the sum is reproducible.
  double qd_score(double offset, bool episode_mean) const {
    double score = 0.0;
    for (const auto& cell : cells_) {
      if (!cell) continue;
      double value = cell->fitness;
      if (episode_mean && cell->steps_taken > 0) {
        value /= cell->steps_taken;
      }
      score += value - offset;
    }
    return score;
  }

  // Smallest distance from any elite descriptor to the given point.
  double min_descriptor_distance(Vec2 point) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cell : cells_) {
      if (!cell) continue;
      const double d = distance(cell->descriptor, point);
      if (d < best) best = d;
    }
    return best;
  }

 private:
  GridSpec grid_;
  std::vector<std::optional<Elite>> cells_;
  int filled_ = 0;
};

// Uniform-with-replacement parent selection over filled cells.
inline std::vector<int> select_uniform(const Archive& archive, RngStream& rng,
                                       int n) {
  const std::vector<int> filled = archive.filled_cells();
  if (filled.empty()) {
    throw std::logic_error("select_uniform: archive is empty");
  }
  std::vector<int> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(filled[rng.below(filled.size())]);
  }
  return out;
}

struct Metrics {
  int generation = 0;
  uint64_t env_steps = 0;
  uint64_t evaluations = 0;
  double coverage = 0.0;
  double best_fitness = 0.0;
  double qd_score = 0.0;
  double wall_time_s = 0.0;
};

// Append-only descriptor history for novelty scoring.
class NoveltyArchive {
 public:
  explicit NoveltyArchive(int k) : k_(k) {
    if (k_ < 1) throw std::invalid_argument("novelty archive: k must be >= 1");
  }

  int k() const { return k_; }
  size_t size() const { return descriptors_.size(); }
  void add(Vec2 d) { descriptors_.push_back(d); }

  // Mean distance to the k nearest stored descriptors, k capped at the
  // archive size. Empty archive scores +inf: everything is novel.
  double score(Vec2 query) const {
    if (descriptors_.empty()) {
      return std::numeric_limits<double>::infinity();
    }
    const size_t k = std::min(static_cast<size_t>(k_), descriptors_.size());
    // Max-heap of the k smallest squared distances, kept in a small flat
    // buffer; archive sizes here stay modest (one entry per evaluation).
    std::vector<double> heap;
    heap.reserve(k);
    for (const Vec2& d : descriptors_) {
      const double dist2 = norm2(d - query);
      if (heap.size() < k) {
        heap.push_back(dist2);
        std::push_heap(heap.begin(), heap.end());
      } else if (dist2 < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = dist2;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    double sum = 0.0;
    for (const double d2 : heap) sum += std::sqrt(d2);
    return sum / static_cast<double>(k);
  }

 private:
  int k_;
  std::vector<Vec2> descriptors_;
};

}  // namespace qd
