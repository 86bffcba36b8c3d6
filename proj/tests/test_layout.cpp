#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "qd/layout_io.hpp"
#include "qd/worlds.hpp"

using qd::ConfigError;
using qd::MazeLayout;
using qd::Vec2;

namespace {

void require_same_layout(const MazeLayout& a, const MazeLayout& b) {
  REQUIRE(a.bounds.low == b.bounds.low);
  REQUIRE(a.bounds.high == b.bounds.high);
  REQUIRE(a.walls.size() == b.walls.size());
  for (size_t i = 0; i < a.walls.size(); ++i) {
    REQUIRE(a.walls[i].a == b.walls[i].a);
    REQUIRE(a.walls[i].b == b.walls[i].b);
    REQUIRE(a.walls[i].thickness == b.walls[i].thickness);
  }
  REQUIRE(a.start == b.start);
  REQUIRE(a.goal.has_value() == b.goal.has_value());
  if (a.goal) {
    REQUIRE(*a.goal == *b.goal);
    REQUIRE(a.goal_radius == b.goal_radius);
  }
}

}  // namespace

TEST_CASE("layouts round-trip through JSON exactly") {
  for (const MazeLayout& layout :
       {qd::builtin_pointmaze_layout(), qd::builtin_antmaze_layout(),
        qd::builtin_anttrap_layout()}) {
    const std::string json = qd::layout_to_json(layout);
    const MazeLayout back = qd::parse_layout(json, "roundtrip");
    require_same_layout(layout, back);
    // And a second trip produces byte-identical text.
    REQUIRE(qd::layout_to_json(back) == json);
  }
}

TEST_CASE("layout parser flags unknown keys with their line") {
  const std::string raw = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "wallz": [],
  "start": [0, 0]
})";
  try {
    qd::parse_layout(raw, "bad.layout");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    REQUIRE(what.find("unknown key \"wallz\"") != std::string::npos);
    REQUIRE(what.find("bad.layout:4") != std::string::npos);
  }
}

TEST_CASE("layout parser input validation") {
  // goal without goal_radius (and the reverse) is rejected.
  const std::string goal_only = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": [],
  "start": [0, 0],
  "goal": [0.5, 0.5]
})";
  REQUIRE_THROWS_WITH(qd::parse_layout(goal_only, "t"),
                      Catch::Matchers::ContainsSubstring("go together"));

  const std::string radius_only = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": [],
  "start": [0, 0],
  "goal_radius": 0.05
})";
  REQUIRE_THROWS_WITH(qd::parse_layout(radius_only, "t"),
                      Catch::Matchers::ContainsSubstring("go together"));

  // Unsupported version number.
  const std::string v2 = R"({
  "version": 2,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": [],
  "start": [0, 0]
})";
  REQUIRE_THROWS_WITH(
      qd::parse_layout(v2, "t"),
      Catch::Matchers::ContainsSubstring("unsupported layout version 2"));

  // Malformed wall rows.
  const std::string short_wall = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": [[0, 0, 1, 0]],
  "start": [0, 0]
})";
  REQUIRE_THROWS_WITH(
      qd::parse_layout(short_wall, "t"),
      Catch::Matchers::ContainsSubstring("[ax, ay, bx, by, thickness]"));

  // Vectors must be two-element numeric arrays.
  const std::string bad_start = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": [],
  "start": "origin"
})";
  REQUIRE_THROWS_WITH(qd::parse_layout(bad_start, "t"),
                      Catch::Matchers::ContainsSubstring("start must be [x, y]"));

  const std::string bad_bounds = R"({
  "version": 1,
  "bounds": [-1, -1, 1, 1],
  "walls": [],
  "start": [0, 0]
})";
  REQUIRE_THROWS_WITH(qd::parse_layout(bad_bounds, "t"),
                      Catch::Matchers::ContainsSubstring("bounds must be an object"));

  // Missing required keys name the key and origin.
  const std::string no_start = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": []
})";
  REQUIRE_THROWS_WITH(
      qd::parse_layout(no_start, "my.layout"),
      Catch::Matchers::ContainsSubstring(
          "my.layout: missing required key \"start\""));

  // Not JSON at all: the origin still appears.
  REQUIRE_THROWS_WITH(qd::parse_layout("{oops", "broken.layout"),
                      Catch::Matchers::ContainsSubstring("broken.layout"));
  REQUIRE_THROWS_AS(qd::parse_layout("[1, 2]", "t"), ConfigError);
}

TEST_CASE("layout parser runs structural validation") {
  // Structurally valid JSON but the start sits inside a wall.
  const std::string start_in_wall = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": [[-1, 0, 1, 0, 0.1]],
  "start": [0, 0],
  "goal": [0.5, 0.5],
  "goal_radius": 0.05
})";
  REQUIRE_THROWS_WITH(qd::parse_layout(start_in_wall, "t"),
                      Catch::Matchers::ContainsSubstring("start inside a wall"));

  // A wall sealing the goal corner: connectivity check fires.
  const std::string sealed = R"({
  "version": 1,
  "bounds": {"low": [-1, -1], "high": [1, 1]},
  "walls": [[0.0, -1.0, 0.0, 1.0, 0.05]],
  "start": [-0.5, 0],
  "goal": [0.5, 0],
  "goal_radius": 0.05
})";
  REQUIRE_THROWS_WITH(qd::parse_layout(sealed, "t"),
                      Catch::Matchers::ContainsSubstring("no path"));
}

TEST_CASE("load_layout reports unreadable files") {
  REQUIRE_THROWS_WITH(qd::load_layout("/nonexistent/nowhere.layout"),
                      Catch::Matchers::ContainsSubstring("cannot read file"));
}
