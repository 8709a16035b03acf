#include "roidet/visualization.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "roidet/errors.hpp"

namespace roidet {

namespace {

void require_match(const RgbImage& slide, const PatchGrid& grid) {
  if (slide.width() != grid.slide_width() || slide.height() != grid.slide_height()) {
    throw Error(ErrorCode::GeometryMismatch,
                "image " + std::to_string(slide.width()) + "x" + std::to_string(slide.height()) +
                    " does not match grid slide " + std::to_string(grid.slide_width()) + "x" +
                    std::to_string(grid.slide_height()));
  }
}

inline std::uint8_t half_blend(std::uint8_t a, std::uint8_t b) {
  return static_cast<std::uint8_t>((a + b + 1) / 2);
}

void fill_rect(RgbImage& img, int x_lo, int y_lo, int x_hi, int y_hi, Rgb color) {
  x_lo = std::max(x_lo, 0);
  y_lo = std::max(y_lo, 0);
  x_hi = std::min(x_hi, img.width() - 1);
  y_hi = std::min(y_hi, img.height() - 1);
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) img.set(x, y, color);
  }
}

}  // namespace

Rgb heat_color(double score) {
  const double s = std::clamp(score, 0.0, 1.0);
  return {static_cast<std::uint8_t>(std::lround(255.0 * s)), 0,
          static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - s)))};
}

RgbImage render_overlay(const RgbImage& slide, const RoiSelection& selection,
                        const PatchGrid& grid) {
  require_match(slide, grid);
  // Per-pixel keep mask; dropped edge strips are never kept.
  std::vector<bool> keep(static_cast<std::size_t>(slide.width()) * slide.height(), false);
  for (const PatchRef& p : selection.selected) {
    if (!grid.contains(p)) throw Error(ErrorCode::InvalidInput, "selected patch outside grid");
    const PixelRect r = grid.rect(p);
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) {
        keep[static_cast<std::size_t>(y) * slide.width() + x] = true;
      }
    }
  }
  RgbImage out = slide;
  for (int y = 0; y < slide.height(); ++y) {
    for (int x = 0; x < slide.width(); ++x) {
      if (keep[static_cast<std::size_t>(y) * slide.width() + x]) continue;
      const Rgb c = slide.at(x, y);
      out.set(x, y,
              {half_blend(c[0], kOverlayMask[0]), half_blend(c[1], kOverlayMask[1]),
               half_blend(c[2], kOverlayMask[2])});
    }
  }
  return out;
}

RgbImage render_boundary(const RgbImage& slide, std::span<const GridEdge> boundary,
                         const PatchGrid& grid) {
  require_match(slide, grid);
  for (const auto& e : boundary) {
    const bool in_bounds = std::min({e.x0, e.x1, e.y0, e.y1}) >= 0 &&
                           std::max(e.x0, e.x1) <= grid.cols() && std::max(e.y0, e.y1) <= grid.rows();
    const bool axis_aligned = (e.x0 == e.x1) != (e.y0 == e.y1);
    if (!in_bounds || !axis_aligned) {
      throw Error(ErrorCode::InvalidBoundary,
                  "edge (" + std::to_string(e.x0) + "," + std::to_string(e.y0) + ")-(" +
                      std::to_string(e.x1) + "," + std::to_string(e.y1) +
                      ") is not an axis-aligned edge inside the grid");
    }
  }
  RgbImage out = slide;
  const int ps = grid.patch_size();
  const int half = kBoundaryWidth / 2;
  for (const auto& e : boundary) {
    // Stroke covers pixels v-1..v+1 across the seam at corner coordinate v and
    // runs one pixel past each end so adjacent edges join at corners.
    const int x_lo = std::min(e.x0, e.x1) * ps;
    const int x_hi = std::max(e.x0, e.x1) * ps;
    const int y_lo = std::min(e.y0, e.y1) * ps;
    const int y_hi = std::max(e.y0, e.y1) * ps;
    fill_rect(out, x_lo - half, y_lo - half, x_hi + half, y_hi + half, {0, 0, 0});
  }
  return out;
}

RgbImage render_heatmap(const RgbImage& slide, const ScoreMap& scores, Label target,
                        const PatchGrid& grid) {
  require_match(slide, grid);
  if (scores.rows() != grid.rows() || scores.cols() != grid.cols() ||
      scores.size() != grid.size()) {
    throw Error(ErrorCode::IncompleteScores, "score map does not cover the patch grid");
  }
  RgbImage out = slide;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PatchRef p = grid.at(i);
    const Rgb heat = heat_color(scores[i][target]);
    const PixelRect r = grid.rect(p);
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) {
        const Rgb src = slide.at(x, y);
        Rgb blended;
        for (int ch = 0; ch < 3; ++ch) {
          blended[ch] = static_cast<std::uint8_t>((6 * heat[ch] + 4 * src[ch] + 5) / 10);
        }
        out.set(x, y, blended);
      }
    }
  }
  return out;
}

}  // namespace roidet
