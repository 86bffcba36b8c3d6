#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "qd/archive.hpp"
#include "qd/emitters.hpp"
#include "qd/env_types.hpp"
#include "qd/policy.hpp"
#include "qd/rng.hpp"

using qd::EmitterKind;
using qd::EmitterParams;
using qd::Genotype;
using qd::Topology;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Genotype flat_genotype(std::vector<double> params) {
  // One linear layer sized to hold exactly these params: obs n-1, act 1
  // gives n-1 weights + 1 bias.
  const int n = static_cast<int>(params.size());
  return Genotype{Topology{n - 1, {}, 1}, std::move(params)};
}

std::vector<qd::TrajectorySummary> summaries_with_fitness(
    const std::vector<double>& fitness) {
  std::vector<qd::TrajectorySummary> out(fitness.size());
  for (size_t i = 0; i < fitness.size(); ++i) {
    out[i].fitness = fitness[i];
    out[i].behavior_descriptor = {0.0, 0.0};
    out[i].steps_taken = 1;
  }
  return out;
}

}  // namespace

TEST_CASE("centered_ranks frozen examples") {
  const std::vector<double> a{3.0, 1.0, 2.0};
  REQUIRE(qd::centered_ranks(a) == std::vector<double>{0.5, -0.5, 0.0});

  // Ties share the mean of their positions: (0+1)/2 over scale 2.
  const std::vector<double> b{1.0, 1.0, 2.0};
  REQUIRE(qd::centered_ranks(b) == std::vector<double>{-0.25, -0.25, 0.5});

  const std::vector<double> equal{7.0, 7.0, 7.0, 7.0};
  REQUIRE(qd::centered_ranks(equal) == std::vector<double>(4, 0.0));

  const std::vector<double> single{5.0};
  REQUIRE(qd::centered_ranks(single) == std::vector<double>{0.0});

  const std::vector<double> pair{4.0, -1.0};
  REQUIRE(qd::centered_ranks(pair) == std::vector<double>{0.5, -0.5});
}

TEST_CASE("centered_ranks non-finite handling") {
  // Punishing mode: inf and nan both land on the minimum rank.
  const std::vector<double> mixed{1.0, kInf, 2.0, std::nan("")};
  REQUIRE(qd::centered_ranks(mixed, true) ==
          std::vector<double>{-0.5, -0.5, 0.5, -0.5});

  // Non-punishing mode ranks +inf on top (novelty of an empty archive);
  // nan is still excluded.
  const std::vector<double> novel{1.0, kInf, 2.0};
  REQUIRE(qd::centered_ranks(novel, false) ==
          std::vector<double>{-0.5, 0.5, 0.0});
  const std::vector<double> with_nan{1.0, std::nan(""), 2.0};
  REQUIRE(qd::centered_ranks(with_nan, false) ==
          std::vector<double>{-0.5, -0.5, 0.5});

  // One finite survivor ranks to zero; none at all ranks everything low.
  const std::vector<double> lone{5.0, kInf};
  REQUIRE(qd::centered_ranks(lone, true) == std::vector<double>{0.0, -0.5});
  const std::vector<double> none{kInf, kInf};
  REQUIRE(qd::centered_ranks(none, true) == std::vector<double>{-0.5, -0.5});
}

TEST_CASE("variation_isoline draw order and degenerate sigmas") {
  const Genotype p1 = flat_genotype({0.1, -0.2, 0.3});
  const Genotype p2 = flat_genotype({1.1, 0.8, -0.7});

  // With both sigmas zero the child is exactly p1 (draws still consumed).
  qd::RngStream rng(9, 0);
  const Genotype same = qd::variation_isoline(p1, p2, 0.0, 0.0, rng);
  REQUIRE(same.params == p1.params);

  // Draw order contract: one line scalar first, then one iso draw per
  // component; verified against a cloned stream.
  qd::RngStream lib_rng(10, 0);
  qd::RngStream oracle_rng(10, 0);
  const Genotype child = qd::variation_isoline(p1, p2, 0.25, 0.5, lib_rng);
  const double line = oracle_rng.normal();
  for (size_t i = 0; i < p1.params.size(); ++i) {
    const double expected = p1.params[i] + 0.25 * oracle_rng.normal() +
                            0.5 * line * (p2.params[i] - p1.params[i]);
    REQUIRE(child.params[i] == expected);
  }

  const Genotype mismatched{Topology{1, {}, 1}, {0.0, 0.0}};
  REQUIRE_THROWS_AS(qd::variation_isoline(p1, mismatched, 0.1, 0.1, rng),
                    std::invalid_argument);
}

TEST_CASE("variation statistics match their definitions") {
  // Var(child_i) = sigma_iso^2 + sigma_line^2 * (p2_i - p1_i)^2.
  const Genotype p1 = flat_genotype({0.0, 0.0});
  const Genotype p2 = flat_genotype({1.0, 1.0});
  const double sigma_iso = 0.1;
  const double sigma_line = 0.2;
  const double want_var = sigma_iso * sigma_iso + sigma_line * sigma_line;

  qd::RngStream rng(31, 0);
  const int n = 200000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Genotype child =
        qd::variation_isoline(p1, p2, sigma_iso, sigma_line, rng);
    sum += child.params[0];
    sum2 += child.params[0] * child.params[0];
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(mean == Catch::Approx(0.0).margin(5e-3));
  REQUIRE(var == Catch::Approx(want_var).epsilon(0.05));

  // Gaussian: same check, and bitwise agreement with a cloned stream.
  qd::RngStream g_rng(32, 0);
  qd::RngStream g_oracle(32, 0);
  const Genotype child = qd::variation_gaussian(p1, 0.7, g_rng);
  for (size_t i = 0; i < p1.params.size(); ++i) {
    REQUIRE(child.params[i] == 0.7 * g_oracle.normal());
  }
}

TEST_CASE("es_sample builds mirrored pairs") {
  const Genotype center = flat_genotype({0.0, 0.0, 0.0});
  qd::RngStream rng(41, 0);
  const qd::EsSample sample = qd::es_sample(center, 6, 0.3, rng);
  REQUIRE(sample.noise.size() == 3);
  REQUIRE(sample.population.size() == 6);
  for (size_t j = 0; j < 3; ++j) {
    for (size_t i = 0; i < 3; ++i) {
      REQUIRE(sample.population[2 * j].params[i] == 0.3 * sample.noise[j][i]);
      REQUIRE(sample.population[2 * j + 1].params[i] ==
              -0.3 * sample.noise[j][i]);
      // Antithetic pairs cancel exactly around a zero center.
      REQUIRE(sample.population[2 * j].params[i] +
                  sample.population[2 * j + 1].params[i] ==
              0.0);
    }
  }

  REQUIRE_THROWS_AS(qd::es_sample(center, 5, 0.3, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(qd::es_sample(center, 0, 0.3, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(qd::es_sample(center, 6, 0.0, rng), std::invalid_argument);
}

TEST_CASE("es_update is exactly invariant to fitness shifts") {
  const Genotype center = flat_genotype({0.4, -0.2, 0.9, 0.1});
  qd::RngStream rng(52, 0);
  const qd::EsSample sample = qd::es_sample(center, 8, 0.1, rng);

  std::vector<double> fitness;
  qd::RngStream frng(53, 0);
  for (size_t i = 0; i < 8; ++i) fitness.push_back(frng.uniform(-3.0, 3.0));
  std::vector<double> shifted = fitness;
  for (double& f : shifted) f += 1234.5;

  const Genotype a =
      qd::es_update(center, sample, qd::centered_ranks(fitness), 0.1, 0.05);
  const Genotype b =
      qd::es_update(center, sample, qd::centered_ranks(shifted), 0.1, 0.05);
  REQUIRE(a.params == b.params);
  REQUIRE(a.params != center.params);

  // All-equal fitness: zero ranks, center unchanged bitwise.
  const std::vector<double> flat_fitness(8, 2.0);
  const Genotype still = qd::es_update(center, sample,
                                       qd::centered_ranks(flat_fitness), 0.1,
                                       0.05);
  REQUIRE(still.params == center.params);

  const std::vector<double> short_utilities(4, 0.0);
  REQUIRE_THROWS_AS(qd::es_update(center, sample, short_utilities, 0.1, 0.05),
                    std::invalid_argument);
}

TEST_CASE("es_step climbs a one-dimensional quadratic") {
  Genotype center = flat_genotype({0.0, 0.0});
  center.params = {0.0, 0.0};
  qd::RngStream rng(61, 0);
  auto fitness = [](const Genotype& g) {
    const double dx = g.params[0] - 3.0;
    const double dy = g.params[1] + 1.0;
    return -(dx * dx + dy * dy);
  };
  for (int it = 0; it < 300; ++it) {
    center = qd::es_step(center, 20, 0.3, 0.5, fitness, rng);
  }
  REQUIRE(center.params[0] == Catch::Approx(3.0).margin(0.3));
  REQUIRE(center.params[1] == Catch::Approx(-1.0).margin(0.3));
}

TEST_CASE("emitter names round-trip") {
  for (const EmitterKind kind :
       {EmitterKind::Ga, EmitterKind::Gaussian, EmitterKind::Es,
        EmitterKind::NoveltyEs, EmitterKind::BlendedEs}) {
    const auto back = qd::emitter_from_name(qd::emitter_name(kind));
    REQUIRE(back.has_value());
    REQUIRE(*back == kind);
  }
  REQUIRE(!qd::emitter_from_name("cma").has_value());
}

TEST_CASE("ga and gaussian emitters propose batch-sized generations") {
  qd::Archive archive(qd::GridSpec{{{-1.0, -1.0}, {1.0, 1.0}}, 10, 10});
  const Genotype elite = flat_genotype({0.5, -0.5});
  archive.insert(elite, 1.0, {0.2, 0.2}, 0, 1);
  archive.insert(flat_genotype({-0.3, 0.8}), 2.0, {-0.6, -0.6}, 0, 1);

  qd::RngStream rng(71, 0);
  EmitterParams params;
  const auto ga = qd::make_emitter(EmitterKind::Ga, 5, params);
  const std::vector<Genotype> ga_kids = ga->ask(archive, rng);
  REQUIRE(ga_kids.size() == 5);
  REQUIRE(!ga->wants_novelty());

  const auto gaussian = qd::make_emitter(EmitterKind::Gaussian, 7, params);
  const std::vector<Genotype> g_kids = gaussian->ask(archive, rng);
  REQUIRE(g_kids.size() == 7);
  for (const Genotype& child : g_kids) {
    REQUIRE(child.params.size() == 2);
  }
  // tell is a no-op for both; must accept empty novelty.
  ga->tell(ga_kids, summaries_with_fitness(std::vector<double>(5, 0.0)), {});
}

TEST_CASE("es emitter lifecycle: adopt, sample, update") {
  EmitterParams params;
  params.sigma_es = 0.1;
  params.lr_es = 0.05;
  qd::EsEmitter emitter(EmitterKind::Es, 4, params);
  qd::Archive archive(qd::GridSpec{{{-1.0, -1.0}, {1.0, 1.0}}, 10, 10});
  qd::RngStream rng(81, 0);

  // Asking before the generation-0 tell is a sequencing bug.
  REQUIRE_THROWS_AS(emitter.ask(archive, rng), std::logic_error);
  REQUIRE(emitter.center() == nullptr);

  // Generation 0: adopt the best-ranked member as the initial center.
  const std::vector<Genotype> gen0{
      flat_genotype({0.0, 0.0}), flat_genotype({1.0, 1.0}),
      flat_genotype({2.0, 2.0}), flat_genotype({3.0, 3.0})};
  emitter.tell(gen0, summaries_with_fitness({1.0, 9.0, 4.0, 2.0}), {});
  REQUIRE(emitter.center() != nullptr);
  REQUIRE(emitter.center()->params == gen0[1].params);

  // One full ask/tell cycle moves the center.
  const std::vector<Genotype> pop = emitter.ask(archive, rng);
  REQUIRE(pop.size() == 4);
  emitter.tell(pop, summaries_with_fitness({5.0, 1.0, 2.0, 2.5}), {});
  REQUIRE(emitter.center()->params != gen0[1].params);

  REQUIRE(!emitter.wants_novelty());
  REQUIRE(qd::EsEmitter(EmitterKind::NoveltyEs, 4, params).wants_novelty());
  REQUIRE(qd::EsEmitter(EmitterKind::BlendedEs, 4, params).wants_novelty());
  REQUIRE_THROWS_AS(qd::EsEmitter(EmitterKind::Es, 3, params),
                    std::invalid_argument);
}

TEST_CASE("novelty and blended utilities rank the right signals") {
  EmitterParams params;
  params.blend = 0.3;
  qd::Archive archive(qd::GridSpec{{{-1.0, -1.0}, {1.0, 1.0}}, 10, 10});
  qd::RngStream rng(91, 0);

  // novelty-es: fitness is irrelevant, novelty decides the adoption.
  qd::EsEmitter novelty(EmitterKind::NoveltyEs, 4, params);
  const std::vector<Genotype> gen0{
      flat_genotype({0.0, 0.0}), flat_genotype({1.0, 1.0}),
      flat_genotype({2.0, 2.0}), flat_genotype({3.0, 3.0})};
  const std::vector<double> novelty_scores{0.1, 0.2, 99.0, 0.3};
  novelty.tell(gen0, summaries_with_fitness({100.0, 1.0, -50.0, 1.0}),
               novelty_scores);
  REQUIRE(novelty.center()->params == gen0[2].params);

  // blended-es at blend 1.0 behaves like pure fitness ranking.
  EmitterParams pure;
  pure.blend = 1.0;
  qd::EsEmitter blended(EmitterKind::BlendedEs, 4, pure);
  blended.tell(gen0, summaries_with_fitness({100.0, 1.0, -50.0, 1.0}),
               novelty_scores);
  REQUIRE(blended.center()->params == gen0[0].params);
}
