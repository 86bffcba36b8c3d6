#pragma once

// MLP controllers evolved by the QD loop. A genotype is the topology plus
// a flat parameter vector: per layer (input to output), weights row-major
// then biases. Hidden and output activations are tanh, so actions land in
// (-1, 1) and need no extra squashing before the env clip.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/rng.hpp"

namespace qd {

struct Topology {
  int obs_dim = 0;
  std::vector<int> hidden;
  int action_dim = 0;

  // (fan_in, fan_out) for each weight layer, input to output.
  std::vector<std::pair<int, int>> layer_dims() const {
    std::vector<std::pair<int, int>> dims;
    int in = obs_dim;
    for (const int h : hidden) {
      dims.emplace_back(in, h);
      in = h;
    }
    dims.emplace_back(in, action_dim);
    return dims;
  }

  size_t parameter_count() const {
    size_t count = 0;
    for (const auto& [in, out] : layer_dims()) {
      count += static_cast<size_t>(in + 1) * out;
    }
    return count;
  }

  int max_width() const {
    int w = obs_dim > action_dim ? obs_dim : action_dim;
    for (const int h : hidden) w = h > w ? h : w;
    return w;
  }

  void validate() const {
    if (obs_dim <= 0 || action_dim <= 0) {
      throw std::invalid_argument("topology: obs_dim and action_dim must be > 0");
    }
    for (const int h : hidden) {
      if (h <= 0) throw std::invalid_argument("topology: hidden width must be > 0");
    }
  }

  bool operator==(const Topology& other) const {
    return obs_dim == other.obs_dim && hidden == other.hidden &&
           action_dim == other.action_dim;
  }
};

struct Genotype {
  Topology topology;
  std::vector<double> params;
};

inline Genotype zero_genotype(const Topology& topology) {
  topology.validate();
  return Genotype{topology,
                  std::vector<double>(topology.parameter_count(), 0.0)};
}

// Weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
// Draws happen in parameter order from a single stream, so the result is
// a pure function of (topology, seed).
inline Genotype init_genotype(const Topology& topology, uint64_t seed) {
  topology.validate();
  Genotype g{topology, {}};
  g.params.reserve(topology.parameter_count());
  RngStream rng(seed, 0);
  for (const auto& [in, out] : topology.layer_dims()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int i = 0; i < in * out; ++i) {
      g.params.push_back(rng.uniform(-bound, bound));
    }
    for (int i = 0; i < out; ++i) g.params.push_back(0.0);
  }
  return g;
}

// Forward pass into a caller-provided buffer. workspace is scratch for the
// layer activations and is resized on first use; reusing it across calls
// keeps rollouts allocation-free. Summation order is fixed (flat index
// order), which makes outputs bitwise-stable everywhere.
inline void forward(const Genotype& g, std::span<const double> observation,
                    std::span<double> action_out,
                    std::vector<double>& workspace) {
  if (static_cast<int>(observation.size()) != g.topology.obs_dim) {
    throw std::invalid_argument("forward: observation size mismatch");
  }
  if (static_cast<int>(action_out.size()) != g.topology.action_dim) {
    throw std::invalid_argument("forward: action buffer size mismatch");
  }
  const size_t width = static_cast<size_t>(g.topology.max_width());
  if (workspace.size() < 2 * width) workspace.resize(2 * width);
  double* cur = workspace.data();
  double* nxt = workspace.data() + width;
  for (size_t i = 0; i < observation.size(); ++i) cur[i] = observation[i];

  const double* p = g.params.data();
  const auto dims = g.topology.layer_dims();
  for (size_t layer = 0; layer < dims.size(); ++layer) {
    const auto [in, out] = dims[layer];
    const double* weights = p;
    const double* biases = p + static_cast<size_t>(in) * out;
    const bool last = layer + 1 == dims.size();
    double* dst = last ? action_out.data() : nxt;
    for (int o = 0; o < out; ++o) {
      double acc = biases[o];
      const double* row = weights + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * cur[i];
      dst[o] = std::tanh(acc);
    }
    p = biases + out;
    if (!last) std::swap(cur, nxt);
  }
}

inline std::vector<double> forward(const Genotype& g,
                                   std::span<const double> observation) {
  std::vector<double> action(g.topology.action_dim);
  std::vector<double> workspace;
  forward(g, observation, action, workspace);
  return action;
}

// ---------------------------------------------------------------------------
// Codec: genotype <-> flat parameter vector

inline std::vector<double> encode(const Genotype& g) { return g.params; }

inline Genotype decode(const Topology& topology,
                       std::span<const double> params) {
  topology.validate();
  if (params.size() != topology.parameter_count()) {
    throw std::invalid_argument(
        "decode: expected " + std::to_string(topology.parameter_count()) +
        " params, got " + std::to_string(params.size()));
  }
  for (const double v : params) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("decode: non-finite parameter");
    }
  }
  return Genotype{topology, std::vector<double>(params.begin(), params.end())};
}

// ---------------------------------------------------------------------------
// Serialization: topology header then params, all little-endian.
// u32 magic, u32 version, u32 obs_dim, u32 hidden_count, u32 hidden...,
// u32 action_dim, u64 param_count, f64 params... .

namespace detail {

inline constexpr uint32_t kGenotypeMagic = 0x4754'4451u;  // "QDGT"
inline constexpr uint32_t kGenotypeVersion = 1;

template <typename T>
void put_le(std::vector<uint8_t>& out, T value) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<uint8_t>(value >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const uint8_t> in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) {
    throw std::invalid_argument("genotype blob truncated");
  }
  T value = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(in[pos + i]) << (8 * i);
  }
  pos += sizeof(T);
  return value;
}

}  // namespace detail

inline std::vector<uint8_t> serialize(const Genotype& g) {
  std::vector<uint8_t> out;
  out.reserve(32 + 4 * g.topology.hidden.size() + 8 * g.params.size());
  detail::put_le<uint32_t>(out, detail::kGenotypeMagic);
  detail::put_le<uint32_t>(out, detail::kGenotypeVersion);
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(g.topology.obs_dim));
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(g.topology.hidden.size()));
  for (const int h : g.topology.hidden) {
    detail::put_le<uint32_t>(out, static_cast<uint32_t>(h));
  }
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(g.topology.action_dim));
  detail::put_le<uint64_t>(out, static_cast<uint64_t>(g.params.size()));
  for (const double v : g.params) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    detail::put_le<uint64_t>(out, bits);
  }
  return out;
}

inline Genotype deserialize(std::span<const uint8_t> blob) {
  size_t pos = 0;
  if (detail::get_le<uint32_t>(blob, pos) != detail::kGenotypeMagic) {
    throw std::invalid_argument("genotype blob: bad magic");
  }
  if (detail::get_le<uint32_t>(blob, pos) != detail::kGenotypeVersion) {
    throw std::invalid_argument("genotype blob: unsupported version");
  }
  Topology topology;
  topology.obs_dim = static_cast<int>(detail::get_le<uint32_t>(blob, pos));
  const uint32_t hidden_count = detail::get_le<uint32_t>(blob, pos);
  if (hidden_count > 64) {
    throw std::invalid_argument("genotype blob: implausible hidden count");
  }
  for (uint32_t i = 0; i < hidden_count; ++i) {
    topology.hidden.push_back(
        static_cast<int>(detail::get_le<uint32_t>(blob, pos)));
  }
  topology.action_dim = static_cast<int>(detail::get_le<uint32_t>(blob, pos));
  topology.validate();
  const uint64_t count = detail::get_le<uint64_t>(blob, pos);
  if (count != topology.parameter_count()) {
    throw std::invalid_argument("genotype blob: param count disagrees with topology");
  }
  std::vector<double> params;
  params.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t bits = detail::get_le<uint64_t>(blob, pos);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    if (!std::isfinite(v)) {
      throw std::invalid_argument("genotype blob: non-finite parameter");
    }
    params.push_back(v);
  }
  if (pos != blob.size()) {
    throw std::invalid_argument("genotype blob: trailing bytes");
  }
  return Genotype{std::move(topology), std::move(params)};
}

}  // namespace qd
