#pragma once

// 2D primitives and wall collision. Walls are thin segments inflated to
// capsules (radius = thickness / 2). Motion is clipped at first contact
// with a small backoff, no sliding.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace qd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::sqrt(norm2(v)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
// Counterclockwise perpendicular.
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

struct Box2 {
  Vec2 low;
  Vec2 high;

  bool contains(Vec2 p) const {
    return p.x >= low.x && p.x <= high.x && p.y >= low.y && p.y <= high.y;
  }

  Vec2 clamp(Vec2 p) const {
    Vec2 out = p;
    if (out.x < low.x) out.x = low.x;
    if (out.x > high.x) out.x = high.x;
    if (out.y < low.y) out.y = low.y;
    if (out.y > high.y) out.y = high.y;
    return out;
  }

  Vec2 extent() const { return high - low; }
  double diagonal() const { return norm(extent()); }
};

struct WallSegment {
  Vec2 a;
  Vec2 b;
  double thickness = 0.0;

  double radius() const { return 0.5 * thickness; }
};

// Squared distance from p to segment [a, b].
inline double point_segment_dist2(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return norm2(p - a);
  double t = dot(p - a, ab) / len2;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  return norm2(p - (a + t * ab));
}

inline bool inside_wall(Vec2 p, const WallSegment& w) {
  const double r = w.radius();
  return point_segment_dist2(p, w.a, w.b) < r * r;
}

namespace detail {

// Entry parameter of ray p + t*d into the circle at center c, radius r.
// Returns the smaller root if the sweep [0, 1] touches the circle.
inline std::optional<double> circle_entry(Vec2 p, Vec2 d, Vec2 c, double r) {
  const Vec2 rel = p - c;
  const double qa = norm2(d);
  const double qb = 2.0 * dot(rel, d);
  const double qc = norm2(rel) - r * r;
  if (qc <= 0.0) return 0.0;  // already touching or inside
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double t = (-qb - std::sqrt(disc)) / (2.0 * qa);
  if (t < 0.0 || t > 1.0) return std::nullopt;
  return t;
}

}  // namespace detail

// Earliest t in [0, 1] where the sweep p -> q touches the capsule around
// wall w. Assumes p starts outside the capsule. The capsule boundary is
// the union of the two endpoint circles and the two offset side lines, so
// the first crossing over any of those candidates is the true contact.
inline std::optional<double> first_contact(Vec2 p, Vec2 q,
                                           const WallSegment& w) {
  const Vec2 d = q - p;
  if (norm2(d) == 0.0) return std::nullopt;
  const double r = w.radius();

  std::optional<double> best;
  auto consider = [&best](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };

  consider(detail::circle_entry(p, d, w.a, r));
  const Vec2 axis = w.b - w.a;
  const double axis_len2 = norm2(axis);
  if (axis_len2 > 0.0) {
    consider(detail::circle_entry(p, d, w.b, r));
    // Side lines: signed distance s(t) = n . (p + t*d - a), crossings of
    // s = +r and s = -r count when the hit lies within the segment span.
    const double axis_len = std::sqrt(axis_len2);
    const Vec2 n = perp((1.0 / axis_len) * axis);
    const double s0 = dot(n, p - w.a);
    const double sd = dot(n, d);
    if (sd != 0.0) {
      for (const double side : {r, -r}) {
        const double t = (side - s0) / sd;
        if (t < 0.0 || t > 1.0) continue;
        const Vec2 hit = p + t * d;
        const double proj = dot(hit - w.a, axis) / axis_len;
        if (proj >= 0.0 && proj <= axis_len) consider(t);
      }
    }
  }
  return best;
}

struct ClipResult {
  Vec2 point;
  bool hit = false;
};

inline constexpr double kContactBackoff = 1e-6;

// Move from p toward q, stopping just short of the first wall contact.
// The destination is clamped to bounds before the sweep so the clamp can
// never teleport a point into a wall afterwards. If rounding still leaves
// the stop point in contact, the move is cancelled outright.
inline ClipResult wall_clip(Vec2 p, Vec2 q,
                            std::span<const WallSegment> walls,
                            const Box2& bounds) {
  q = bounds.clamp(q);
  const Vec2 d = q - p;
  const double len = norm(d);
  if (len == 0.0) return {p, false};

  std::optional<double> first;
  for (const WallSegment& w : walls) {
    const std::optional<double> t = first_contact(p, q, w);
    if (t && (!first || *t < *first)) first = t;
  }
  if (!first) return {q, false};

  double t_stop = *first - kContactBackoff / len;
  if (t_stop < 0.0) t_stop = 0.0;
  Vec2 out = p + t_stop * d;
  for (const WallSegment& w : walls) {
    if (inside_wall(out, w)) return {p, true};
  }
  return {out, true};
}

}  // namespace qd
