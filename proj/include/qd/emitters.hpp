#pragma once

// Emitters: strategies that propose each generation's candidate genotypes.
//
//   ga          iso+line variation between two archive parents
//   gaussian    isotropic mutation of one archive parent
//   es          natural-gradient-style step on fitness ranks
//   novelty-es  same step driven by novelty ranks instead of fitness
//   blended-es  rank blend of fitness and novelty
//
// The ES variants keep a search center and move it with mirrored sampling
// and centered-rank weights; the archive still collects every evaluated
// candidate, which is where the coverage comes from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/archive.hpp"
#include "qd/env_types.hpp"
#include "qd/policy.hpp"
#include "qd/rng.hpp"

namespace qd {

// ---------------------------------------------------------------------------
// Variation operators

// child = p1 + sigma_iso * N(0, I) + sigma_line * N(0, 1) * (p2 - p1).
// The line coefficient is one scalar draw (taken first), then one iso draw
// per component; the draw order is part of the reproducibility contract.
inline Genotype variation_isoline(const Genotype& p1, const Genotype& p2,
                                  double sigma_iso, double sigma_line,
                                  RngStream& rng) {
  if (!(p1.topology == p2.topology)) {
    throw std::invalid_argument("variation_isoline: topology mismatch");
  }
  const double line = rng.normal();
  Genotype child{p1.topology, std::vector<double>(p1.params.size())};
  for (size_t i = 0; i < p1.params.size(); ++i) {
    child.params[i] = p1.params[i] + sigma_iso * rng.normal() +
                      sigma_line * line * (p2.params[i] - p1.params[i]);
  }
  return child;
}

inline Genotype variation_gaussian(const Genotype& p, double sigma,
                                   RngStream& rng) {
  Genotype child{p.topology, std::vector<double>(p.params.size())};
  for (size_t i = 0; i < p.params.size(); ++i) {
    child.params[i] = p.params[i] + sigma * rng.normal();
  }
  return child;
}

// ---------------------------------------------------------------------------
// Centered ranks

// Ranks values into [-0.5, 0.5] ascending. Equal values share the mean of
// their positions, so a population of identical scores ranks to all zeros
// and produces a zero ES update. With punish_nonfinite, any non-finite
// value is forced to the minimum rank (-0.5); otherwise only NaN is (the
// novelty path feeds +inf for "nothing stored yet", which must rank top).
inline std::vector<double> centered_ranks(std::span<const double> values,
                                          bool punish_nonfinite = true) {
  const size_t n = values.size();
  std::vector<double> ranks(n, -0.5);
  std::vector<size_t> order;
  order.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const double v = values[i];
    const bool bad = punish_nonfinite ? !std::isfinite(v) : std::isnan(v);
    if (!bad) order.push_back(i);
  }
  const size_t m = order.size();
  if (m == 0) return ranks;
  if (m == 1) {
    ranks[order[0]] = 0.0;
    return ranks;
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  const double scale = static_cast<double>(m - 1);
  size_t i = 0;
  while (i < m) {
    size_t j = i;
    while (j + 1 < m && values[order[j + 1]] == values[order[i]]) ++j;
    // Mean position of the tie group, centered to [-0.5, 0.5].
    const double mean_pos = 0.5 * (static_cast<double>(i) + j);
    const double rank = mean_pos / scale - 0.5;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

// ---------------------------------------------------------------------------
// Evolution strategy core (mirrored sampling, rank-weighted update)

struct EsSample {
  // noise[j] is the shared direction of the antithetic pair
  // (population[2j], population[2j+1]) = center +- sigma * noise[j].
  std::vector<std::vector<double>> noise;
  std::vector<Genotype> population;
};

inline EsSample es_sample(const Genotype& center, int pop_size, double sigma,
                          RngStream& rng) {
  if (pop_size < 2 || pop_size % 2 != 0) {
    throw std::invalid_argument("es_sample: pop_size must be even and >= 2");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("es_sample: sigma must be > 0");
  }
  const size_t dim = center.params.size();
  EsSample sample;
  sample.noise.resize(static_cast<size_t>(pop_size) / 2);
  sample.population.reserve(static_cast<size_t>(pop_size));
  for (auto& eps : sample.noise) {
    eps.resize(dim);
    for (double& e : eps) e = rng.normal();
    Genotype plus{center.topology, std::vector<double>(dim)};
    Genotype minus{center.topology, std::vector<double>(dim)};
    for (size_t i = 0; i < dim; ++i) {
      plus.params[i] = center.params[i] + sigma * eps[i];
      minus.params[i] = center.params[i] - sigma * eps[i];
    }
    sample.population.push_back(std::move(plus));
    sample.population.push_back(std::move(minus));
  }
  return sample;
}

// center += lr / (pop * sigma) * sum_j (u[2j] - u[2j+1]) * noise[j].
// utilities come from centered_ranks, so adding a constant to every raw
// score cannot change the result.
inline Genotype es_update(const Genotype& center, const EsSample& sample,
                          std::span<const double> utilities, double sigma,
                          double lr) {
  const size_t pop = sample.population.size();
  if (utilities.size() != pop) {
    throw std::invalid_argument("es_update: utility count mismatch");
  }
  const size_t dim = center.params.size();
  const double scale = lr / (static_cast<double>(pop) * sigma);
  Genotype next{center.topology, center.params};
  for (size_t i = 0; i < dim; ++i) {
    double acc = 0.0;
    for (size_t j = 0; j < sample.noise.size(); ++j) {
      acc += (utilities[2 * j] - utilities[2 * j + 1]) * sample.noise[j][i];
    }
    next.params[i] += scale * acc;
  }
  return next;
}

// One full ES iteration against a raw fitness function.
template <typename FitnessFn>
Genotype es_step(const Genotype& center, int pop_size, double sigma, double lr,
                 FitnessFn&& fitness_fn, RngStream& rng) {
  const EsSample sample = es_sample(center, pop_size, sigma, rng);
  std::vector<double> fitness;
  fitness.reserve(sample.population.size());
  for (const Genotype& g : sample.population) {
    fitness.push_back(fitness_fn(g));
  }
  const std::vector<double> ranks = centered_ranks(fitness, true);
  return es_update(center, sample, ranks, sigma, lr);
}

// ---------------------------------------------------------------------------
// Emitter framework

enum class EmitterKind { Ga, Gaussian, Es, NoveltyEs, BlendedEs };

inline const char* emitter_name(EmitterKind kind) {
  switch (kind) {
    case EmitterKind::Ga: return "ga";
    case EmitterKind::Gaussian: return "gaussian";
    case EmitterKind::Es: return "es";
    case EmitterKind::NoveltyEs: return "novelty-es";
    case EmitterKind::BlendedEs: return "blended-es";
  }
  return "unknown";
}

inline std::optional<EmitterKind> emitter_from_name(const std::string& name) {
  if (name == "ga") return EmitterKind::Ga;
  if (name == "gaussian") return EmitterKind::Gaussian;
  if (name == "es") return EmitterKind::Es;
  if (name == "novelty-es") return EmitterKind::NoveltyEs;
  if (name == "blended-es") return EmitterKind::BlendedEs;
  return std::nullopt;
}

struct EmitterParams {
  double sigma_iso = 0.005;
  double sigma_line = 0.05;
  double sigma_gauss = 0.02;
  double sigma_es = 0.02;
  double lr_es = 0.01;
  int novelty_k = 10;
  double blend = 0.5;  // weight of the fitness ranks in blended-es
};

class Emitter {
 public:
  virtual ~Emitter() = default;
  // Next generation of candidates. Called from generation 1 on; the loop
  // itself seeds generation 0 with random genotypes.
  virtual std::vector<Genotype> ask(const Archive& archive, RngStream& rng) = 0;
  // Feedback for the generation just evaluated (including generation 0).
  // novelty is empty unless wants_novelty() is true.
  virtual void tell(std::span<const Genotype> genotypes,
                    std::span<const TrajectorySummary> summaries,
                    std::span<const double> novelty) = 0;
  virtual bool wants_novelty() const { return false; }
};

class GaEmitter final : public Emitter {
 public:
  GaEmitter(int batch, EmitterParams params) : batch_(batch), params_(params) {}

  std::vector<Genotype> ask(const Archive& archive, RngStream& rng) override {
    const std::vector<int> parents = select_uniform(archive, rng, 2 * batch_);
    std::vector<Genotype> out;
    out.reserve(static_cast<size_t>(batch_));
    for (int i = 0; i < batch_; ++i) {
      const Elite& p1 = *archive.cell(parents[static_cast<size_t>(2 * i)]);
      const Elite& p2 = *archive.cell(parents[static_cast<size_t>(2 * i + 1)]);
      out.push_back(variation_isoline(p1.genotype, p2.genotype,
                                      params_.sigma_iso, params_.sigma_line,
                                      rng));
    }
    return out;
  }

  void tell(std::span<const Genotype>, std::span<const TrajectorySummary>,
            std::span<const double>) override {}

 private:
  int batch_;
  EmitterParams params_;
};

class GaussianEmitter final : public Emitter {
 public:
  GaussianEmitter(int batch, EmitterParams params)
      : batch_(batch), params_(params) {}

  std::vector<Genotype> ask(const Archive& archive, RngStream& rng) override {
    const std::vector<int> parents = select_uniform(archive, rng, batch_);
    std::vector<Genotype> out;
    out.reserve(static_cast<size_t>(batch_));
    for (const int cell : parents) {
      out.push_back(variation_gaussian(archive.cell(cell)->genotype,
                                       params_.sigma_gauss, rng));
    }
    return out;
  }

  void tell(std::span<const Genotype>, std::span<const TrajectorySummary>,
            std::span<const double>) override {}

 private:
  int batch_;
  EmitterParams params_;
};

// Shared implementation of es / novelty-es / blended-es; they differ only
// in how raw scores turn into utilities.
class EsEmitter final : public Emitter {
 public:
  EsEmitter(EmitterKind kind, int batch, EmitterParams params)
      : kind_(kind), batch_(batch), params_(params) {
    if (batch_ < 2 || batch_ % 2 != 0) {
      throw std::invalid_argument("es emitter: batch must be even and >= 2");
    }
  }

  std::vector<Genotype> ask(const Archive&, RngStream& rng) override {
    if (!center_) {
      throw std::logic_error("es emitter: ask before initial tell");
    }
    sample_ = es_sample(*center_, batch_, params_.sigma_es, rng);
    return sample_.population;
  }

  void tell(std::span<const Genotype> genotypes,
            std::span<const TrajectorySummary> summaries,
            std::span<const double> novelty) override {
    const std::vector<double> utilities = utilities_for(summaries, novelty);
    if (!center_) {
      // Generation 0 is a random batch: adopt its best-scoring member.
      size_t best = 0;
      for (size_t i = 1; i < utilities.size(); ++i) {
        if (utilities[i] > utilities[best]) best = i;
      }
      center_ = genotypes[best];
      return;
    }
    center_ = es_update(*center_, sample_, utilities, params_.sigma_es,
                        params_.lr_es);
    sample_ = EsSample{};
  }

  bool wants_novelty() const override { return kind_ != EmitterKind::Es; }

  const Genotype* center() const { return center_ ? &*center_ : nullptr; }

 private:
  std::vector<double> utilities_for(
      std::span<const TrajectorySummary> summaries,
      std::span<const double> novelty) const {
    std::vector<double> fitness;
    fitness.reserve(summaries.size());
    for (const TrajectorySummary& s : summaries) fitness.push_back(s.fitness);
    switch (kind_) {
      case EmitterKind::Es:
        return centered_ranks(fitness, true);
      case EmitterKind::NoveltyEs:
        return centered_ranks(novelty, false);
      default: {
        const std::vector<double> fr = centered_ranks(fitness, true);
        const std::vector<double> nr = centered_ranks(novelty, false);
        std::vector<double> blended(fr.size());
        for (size_t i = 0; i < fr.size(); ++i) {
          blended[i] = params_.blend * fr[i] + (1.0 - params_.blend) * nr[i];
        }
        return blended;
      }
    }
  }

  EmitterKind kind_;
  int batch_;
  EmitterParams params_;
  std::optional<Genotype> center_;
  EsSample sample_;
};

inline std::unique_ptr<Emitter> make_emitter(EmitterKind kind, int batch,
                                             const EmitterParams& params) {
  switch (kind) {
    case EmitterKind::Ga:
      return std::make_unique<GaEmitter>(batch, params);
    case EmitterKind::Gaussian:
      return std::make_unique<GaussianEmitter>(batch, params);
    default:
      return std::make_unique<EsEmitter>(kind, batch, params);
  }
}

}  // namespace qd
