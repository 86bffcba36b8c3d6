#pragma once

// Archive snapshot files. Binary, little-endian, FNV-1a checksum over the
// whole body as the final 8 bytes. The header embeds the world id and the
// full layout so a snapshot replays without any other input.
//
//   u32 magic "QDAR"   u32 format version
//   str code_version   str config_hash
//   u32 world id
//   layout: bounds (4 f64), u32 wall count, walls (5 f64 each),
//           start (2 f64), u8 has_goal, goal (2 f64), goal_radius (f64)
//   grid: u32 res_x, u32 res_y    (descriptor box comes from the world)
//   u32 elite count, then per elite:
//     u32 flat cell, f64 fitness, 2 f64 descriptor, u64 seed, u32 steps,
//     u64 blob size, genotype blob
//   u64 checksum

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qd/archive.hpp"
#include "qd/hash.hpp"
#include "qd/policy.hpp"
#include "qd/version.hpp"
#include "qd/worlds.hpp"

namespace qd {

namespace detail {

inline constexpr uint32_t kSnapshotMagic = 0x52414451u;  // "QDAR"
inline constexpr uint32_t kSnapshotVersion = 1;

inline void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_le<uint64_t>(out, bits);
}

inline void put_str(std::vector<uint8_t>& out, const std::string& s) {
  put_le<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

inline double get_f64(std::span<const uint8_t> in, size_t& pos) {
  const uint64_t bits = get_le<uint64_t>(in, pos);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline std::string get_str(std::span<const uint8_t> in, size_t& pos) {
  const uint32_t len = get_le<uint32_t>(in, pos);
  if (len > (1u << 20) || pos + len > in.size()) {
    throw std::invalid_argument("snapshot: bad string length");
  }
  std::string s(reinterpret_cast<const char*>(in.data() + pos), len);
  pos += len;
  return s;
}

}  // namespace detail

struct Snapshot {
  std::string code_version;
  std::string config_hash;
  WorldId world = WorldId::PointMaze;
  MazeLayout layout;
  int grid_res_x = 0;
  int grid_res_y = 0;
  // (flat cell, elite) pairs in ascending cell order.
  std::vector<std::pair<int, Elite>> elites;
};

inline std::vector<uint8_t> encode_snapshot(const Archive& archive,
                                            WorldId world,
                                            const MazeLayout& layout,
                                            const std::string& config_hash) {
  std::vector<uint8_t> out;
  detail::put_le<uint32_t>(out, detail::kSnapshotMagic);
  detail::put_le<uint32_t>(out, detail::kSnapshotVersion);
  detail::put_str(out, kVersion);
  detail::put_str(out, config_hash);
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(world));

  detail::put_f64(out, layout.bounds.low.x);
  detail::put_f64(out, layout.bounds.low.y);
  detail::put_f64(out, layout.bounds.high.x);
  detail::put_f64(out, layout.bounds.high.y);
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(layout.walls.size()));
  for (const WallSegment& w : layout.walls) {
    detail::put_f64(out, w.a.x);
    detail::put_f64(out, w.a.y);
    detail::put_f64(out, w.b.x);
    detail::put_f64(out, w.b.y);
    detail::put_f64(out, w.thickness);
  }
  detail::put_f64(out, layout.start.x);
  detail::put_f64(out, layout.start.y);
  out.push_back(layout.goal ? 1 : 0);
  detail::put_f64(out, layout.goal ? layout.goal->x : 0.0);
  detail::put_f64(out, layout.goal ? layout.goal->y : 0.0);
  detail::put_f64(out, layout.goal_radius);

  detail::put_le<uint32_t>(out, static_cast<uint32_t>(archive.grid().res_x));
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(archive.grid().res_y));

  const std::vector<int> filled = archive.filled_cells();
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(filled.size()));
  for (const int flat : filled) {
    const Elite& e = *archive.cell(flat);
    detail::put_le<uint32_t>(out, static_cast<uint32_t>(flat));
    detail::put_f64(out, e.fitness);
    detail::put_f64(out, e.descriptor.x);
    detail::put_f64(out, e.descriptor.y);
    detail::put_le<uint64_t>(out, e.seed);
    detail::put_le<uint32_t>(out, static_cast<uint32_t>(e.steps_taken));
    const std::vector<uint8_t> blob = serialize(e.genotype);
    detail::put_le<uint64_t>(out, blob.size());
    out.insert(out.end(), blob.begin(), blob.end());
  }

  detail::put_le<uint64_t>(out, fnv1a(out));
  return out;
}

inline Snapshot decode_snapshot(std::span<const uint8_t> bytes) {
  if (bytes.size() < 16) {
    throw std::invalid_argument("snapshot: file too short");
  }
  // Verify the trailing checksum before trusting any field.
  size_t tail = bytes.size() - 8;
  const uint64_t body_hash = fnv1a(bytes.subspan(0, tail));
  const uint64_t stored = detail::get_le<uint64_t>(bytes, tail);
  if (body_hash != stored) {
    throw std::invalid_argument("snapshot: checksum mismatch, refusing");
  }

  size_t pos = 0;
  if (detail::get_le<uint32_t>(bytes, pos) != detail::kSnapshotMagic) {
    throw std::invalid_argument("snapshot: bad magic");
  }
  if (detail::get_le<uint32_t>(bytes, pos) != detail::kSnapshotVersion) {
    throw std::invalid_argument("snapshot: unsupported version");
  }
  Snapshot snap;
  snap.code_version = detail::get_str(bytes, pos);
  snap.config_hash = detail::get_str(bytes, pos);
  const uint32_t world_raw = detail::get_le<uint32_t>(bytes, pos);
  if (world_raw > 2) throw std::invalid_argument("snapshot: bad world id");
  snap.world = static_cast<WorldId>(world_raw);

  snap.layout.bounds.low.x = detail::get_f64(bytes, pos);
  snap.layout.bounds.low.y = detail::get_f64(bytes, pos);
  snap.layout.bounds.high.x = detail::get_f64(bytes, pos);
  snap.layout.bounds.high.y = detail::get_f64(bytes, pos);
  const uint32_t wall_count = detail::get_le<uint32_t>(bytes, pos);
  if (wall_count > 4096) {
    throw std::invalid_argument("snapshot: implausible wall count");
  }
  for (uint32_t i = 0; i < wall_count; ++i) {
    WallSegment w;
    w.a.x = detail::get_f64(bytes, pos);
    w.a.y = detail::get_f64(bytes, pos);
    w.b.x = detail::get_f64(bytes, pos);
    w.b.y = detail::get_f64(bytes, pos);
    w.thickness = detail::get_f64(bytes, pos);
    snap.layout.walls.push_back(w);
  }
  snap.layout.start.x = detail::get_f64(bytes, pos);
  snap.layout.start.y = detail::get_f64(bytes, pos);
  if (pos >= bytes.size()) throw std::invalid_argument("snapshot: truncated");
  const bool has_goal = bytes[pos++] != 0;
  const double gx = detail::get_f64(bytes, pos);
  const double gy = detail::get_f64(bytes, pos);
  if (has_goal) snap.layout.goal = Vec2{gx, gy};
  snap.layout.goal_radius = detail::get_f64(bytes, pos);

  snap.grid_res_x = static_cast<int>(detail::get_le<uint32_t>(bytes, pos));
  snap.grid_res_y = static_cast<int>(detail::get_le<uint32_t>(bytes, pos));

  const uint32_t elite_count = detail::get_le<uint32_t>(bytes, pos);
  for (uint32_t i = 0; i < elite_count; ++i) {
    const int flat = static_cast<int>(detail::get_le<uint32_t>(bytes, pos));
    Elite e;
    e.fitness = detail::get_f64(bytes, pos);
    e.descriptor.x = detail::get_f64(bytes, pos);
    e.descriptor.y = detail::get_f64(bytes, pos);
    e.seed = detail::get_le<uint64_t>(bytes, pos);
    e.steps_taken = static_cast<int>(detail::get_le<uint32_t>(bytes, pos));
    const uint64_t blob_size = detail::get_le<uint64_t>(bytes, pos);
    if (pos + blob_size > bytes.size()) {
      throw std::invalid_argument("snapshot: truncated genotype blob");
    }
    e.genotype = deserialize(bytes.subspan(pos, blob_size));
    pos += blob_size;
    snap.elites.emplace_back(flat, std::move(e));
  }
  return snap;
}

inline void save_snapshot(const std::string& path, const Archive& archive,
                          WorldId world, const MazeLayout& layout,
                          const std::string& config_hash) {
  const std::vector<uint8_t> bytes =
      encode_snapshot(archive, world, layout, config_hash);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write on snapshot: " + path);
}

inline Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read snapshot: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

}  // namespace qd
