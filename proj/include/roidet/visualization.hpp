#pragma once
// Overlay, boundary and heatmap renderings aligned to the slide raster.
//
// All blending is integer arithmetic with round-half-up, so outputs are
// bit-reproducible:
//   overlay  out = (src + blue + 1) / 2           on every unselected pixel
//   heatmap  c   = (round(255 s), 0, round(255 (1 - s)))
//            out = (6 c + 4 src + 5) / 10

#include <span>

#include "roidet/classifier.hpp"
#include "roidet/detection.hpp"
#include "roidet/geometry.hpp"
#include "roidet/image.hpp"
#include "roidet/optics.hpp"

namespace roidet {

inline constexpr Rgb kOverlayMask = {0, 0, 255};
inline constexpr int kBoundaryWidth = 3;

RgbImage render_overlay(const RgbImage& slide, const RoiSelection& selection,
                        const PatchGrid& grid);

// Edges are in patch-index units; each is drawn as a 3 px black stroke.
RgbImage render_boundary(const RgbImage& slide, std::span<const GridEdge> boundary,
                         const PatchGrid& grid);

RgbImage render_heatmap(const RgbImage& slide, const ScoreMap& scores, Label target,
                        const PatchGrid& grid);

Rgb heat_color(double score);

}  // namespace roidet
