#include "roidet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "roidet/errors.hpp"

namespace roidet {

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw Error(ErrorCode::MalformedPolygon,
                "polygon needs at least 3 vertices, got " + std::to_string(vertices_.size()));
  }
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw Error(ErrorCode::MalformedPolygon, "polygon vertex has non-finite coordinate");
    }
  }
}

PatchGrid grid_from_slide(int width, int height, int patch_size) {
  if (width < 1 || height < 1 || patch_size < 1) {
    throw Error(ErrorCode::Validation, "slide dimensions and patch size must be >= 1");
  }
  if (patch_size > width || patch_size > height) {
    throw Error(ErrorCode::EmptyGrid, "patch size " + std::to_string(patch_size) +
                                          " exceeds slide " + std::to_string(width) + "x" +
                                          std::to_string(height));
  }
  PatchGrid g;
  g.slide_width_ = width;
  g.slide_height_ = height;
  g.patch_size_ = patch_size;
  g.rows_ = height / patch_size;
  g.cols_ = width / patch_size;
  return g;
}

namespace {

bool on_segment(Point p, Point a, Point b) {
  const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  const double scale = std::abs(b.x - a.x) + std::abs(b.y - a.y) + 1.0;
  if (std::abs(cross) > 1e-12 * scale * scale) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool point_in_polygon(Point p, const Polygon& poly) {
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = v[i];
    const Point b = v[j];
    if (on_segment(p, a, b)) return true;
    // Half-open rule on y avoids double counting vertices.
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_in_any(Point p, std::span<const Polygon> polys) {
  for (const auto& poly : polys) {
    if (point_in_polygon(p, poly)) return true;
  }
  return false;
}

double patch_coverage(PatchRef patch, const PatchGrid& grid, std::span<const Polygon> polys,
                      int samples_per_side) {
  if (!grid.contains(patch)) {
    throw Error(ErrorCode::InvalidInput, "patch (" + std::to_string(patch.row) + "," +
                                             std::to_string(patch.col) + ") outside grid");
  }
  if (samples_per_side < 1) {
    throw Error(ErrorCode::Validation, "coverage samples per side must be >= 1");
  }
  if (polys.empty()) return 0.0;

  const PixelRect r = grid.rect(patch);
  const double step = static_cast<double>(r.width) / samples_per_side;
  int hits = 0;
  for (int j = 0; j < samples_per_side; ++j) {
    for (int i = 0; i < samples_per_side; ++i) {
      const Point s{r.x + (i + 0.5) * step, r.y + (j + 0.5) * step};
      if (point_in_any(s, polys)) ++hits;
    }
  }
  return static_cast<double>(hits) / (samples_per_side * samples_per_side);
}

}  // namespace roidet
