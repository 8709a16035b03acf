#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "roidet/errors.hpp"
#include "roidet/geometry.hpp"
#include "support/oracles.hpp"

using namespace roidet;

namespace {

Polygon unit_square() { return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

Polygon rect(double x0, double y0, double x1, double y1) {
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

}  // namespace

TEST_CASE("point_in_polygon on the unit square") {
  const Polygon sq = unit_square();
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
  CHECK(point_in_polygon({1.0, 0.5}, sq));  // edge counts as inside
  CHECK(point_in_polygon({0.0, 0.0}, sq));  // vertex too
  CHECK_FALSE(point_in_polygon({-1e-9, 0.5}, sq));
}

TEST_CASE("point_in_polygon handles concave shapes") {
  // U shape: notch between x=1 and x=2 above y=1.
  const Polygon u({{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}});
  CHECK(point_in_polygon({0.5, 2.5}, u));
  CHECK(point_in_polygon({2.5, 2.5}, u));
  CHECK_FALSE(point_in_polygon({1.5, 2.0}, u));
  CHECK(point_in_polygon({1.5, 0.5}, u));
}

TEST_CASE("malformed polygons are rejected") {
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}}), Error);
  try {
    Polygon({{0, 0}, {1, 1}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedPolygon);
  }
  CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}, {0, std::nan("")}}), Error);
}

TEST_CASE("point_in_polygon agrees with winding number on convex polygons") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int agree = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto verts = oracle::random_convex(rng, 0.0, 0.0, 1.5);
    if (verts.size() < 3) {
      ++agree;
      continue;
    }
    const Polygon poly(verts);
    const Point p{u(rng), u(rng)};
    agree += point_in_polygon(p, poly) == oracle::winding_inside(p, verts);
  }
  CHECK(agree == 1000);
}

TEST_CASE("grid_from_slide uses floor division") {
  const auto g = grid_from_slide(512, 512, 32);
  CHECK(g.rows() == 16);
  CHECK(g.cols() == 16);
  CHECK(g.size() == 256);

  const auto g2 = grid_from_slide(100, 100, 32);
  CHECK(g2.rows() == 3);
  CHECK(g2.cols() == 3);
  CHECK(g2.size() == 9);

  try {
    grid_from_slide(20, 100, 32);
    FAIL("expected EmptyGrid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyGrid);
  }
  CHECK_THROWS_AS(grid_from_slide(0, 10, 1), Error);
}

TEST_CASE("patch rectangles are disjoint and inside the slide") {
  for (auto [w, h, ps] : {std::tuple{100, 70, 32}, std::tuple{64, 64, 16}, std::tuple{37, 91, 5}}) {
    const auto g = grid_from_slide(w, h, ps);
    std::set<std::pair<int, int>> pixels;
    std::size_t total = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const PatchRef p = g.at(i);
      CHECK(g.linear_index(p) == i);
      const auto r = g.rect(p);
      CHECK(r.x >= 0);
      CHECK(r.y >= 0);
      CHECK(r.x + r.width <= w);
      CHECK(r.y + r.height <= h);
      for (int y = r.y; y < r.y + r.height; ++y) {
        for (int x = r.x; x < r.x + r.width; ++x) pixels.insert({x, y});
      }
      total += static_cast<std::size_t>(r.width) * r.height;
    }
    CHECK(pixels.size() == total);
  }
}

TEST_CASE("patch_coverage examples") {
  const auto g = grid_from_slide(128, 128, 32);
  const PatchRef p{1, 1};  // pixels [32,64) x [32,64)

  const std::vector<Polygon> inside = {rect(0, 0, 128, 128)};
  CHECK(patch_coverage(p, g, inside) == 1.0);

  const std::vector<Polygon> far = {rect(100, 100, 120, 120)};
  CHECK(patch_coverage(p, g, far) == 0.0);

  CHECK(patch_coverage(p, g, std::vector<Polygon>{}) == 0.0);

  // Left half covered: enumerate the 4x4 lattice independently.
  const std::vector<Polygon> half = {rect(-1000, -1000, 48, 1000)};
  int expected = 0;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) expected += (32 + (i + 0.5) * 8 <= 48);
  }
  CHECK(expected == 8);
  CHECK(patch_coverage(p, g, half) == expected / 16.0);

  CHECK_THROWS_AS(patch_coverage({4, 0}, g, inside), Error);
}

TEST_CASE("patch_coverage values lie on the 1/16 lattice and grow under union") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(0.0, 128.0);
  std::uniform_real_distribution<double> r(5.0, 60.0);
  const auto g = grid_from_slide(128, 128, 32);
  for (int t = 0; t < 200; ++t) {
    const Polygon a(oracle::random_convex(rng, c(rng), c(rng), r(rng)));
    const Polygon b(oracle::random_convex(rng, c(rng), c(rng), r(rng)));
    const std::vector<Polygon> pa = {a};
    const std::vector<Polygon> pb = {b};
    const std::vector<Polygon> pab = {a, b};
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double ca = patch_coverage(g.at(i), g, pa);
      const double cb = patch_coverage(g.at(i), g, pb);
      const double cab = patch_coverage(g.at(i), g, pab);
      CHECK(cab >= std::max(ca, cb));
      const double m = cab * 16.0;
      CHECK(m == std::round(m));
      CHECK(cab >= 0.0);
      CHECK(cab <= 1.0);
    }
  }
}
