#pragma once
// Slide tiling and polygon coverage.
//
// A slide is cut into a row-major grid of equal square patches. Partial strips
// at the right and bottom edges are dropped so every patch has the same area.
// Coverage of a patch by annotation polygons is estimated from a k x k lattice
// of sample points placed at sub-cell centers.

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace roidet {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

class Polygon {
 public:
  // Throws Error(MalformedPolygon) for fewer than 3 vertices or non-finite coordinates.
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

 private:
  std::vector<Point> vertices_;
};

struct PatchRef {
  int row = 0;
  int col = 0;

  auto operator<=>(const PatchRef&) const = default;
};

struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

class PatchGrid {
 public:
  PatchGrid() = default;

  int slide_width() const noexcept { return slide_width_; }
  int slide_height() const noexcept { return slide_height_; }
  int patch_size() const noexcept { return patch_size_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }

  bool contains(PatchRef p) const noexcept {
    return p.row >= 0 && p.row < rows_ && p.col >= 0 && p.col < cols_;
  }
  std::size_t linear_index(PatchRef p) const noexcept {
    return static_cast<std::size_t>(p.row) * cols_ + p.col;
  }
  PatchRef at(std::size_t linear) const noexcept {
    return {static_cast<int>(linear / cols_), static_cast<int>(linear % cols_)};
  }
  PixelRect rect(PatchRef p) const noexcept {
    return {p.col * patch_size_, p.row * patch_size_, patch_size_, patch_size_};
  }

  bool operator==(const PatchGrid&) const = default;

  friend PatchGrid grid_from_slide(int width, int height, int patch_size);

 private:
  int slide_width_ = 0;
  int slide_height_ = 0;
  int patch_size_ = 0;
  int rows_ = 0;
  int cols_ = 0;
};

// Floor-division tiling. Throws EmptyGrid when the patch does not fit, and
// Validation for non-positive arguments.
PatchGrid grid_from_slide(int width, int height, int patch_size);

// Even-odd rule; points lying on an edge count as inside.
bool point_in_polygon(Point p, const Polygon& poly);

bool point_in_any(Point p, std::span<const Polygon> polys);

inline constexpr int kDefaultCoverageSamples = 4;

// Fraction m / k^2 of lattice samples inside the union of polys.
double patch_coverage(PatchRef patch, const PatchGrid& grid, std::span<const Polygon> polys,
                      int samples_per_side = kDefaultCoverageSamples);

}  // namespace roidet
