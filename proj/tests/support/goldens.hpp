#pragma once
// 2x2-grid renderer fixtures compared byte-for-byte against committed PNGs.
// Set ROIDET_UPDATE_GOLDENS=1 to rewrite the goldens from the current build.

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "roidet/image.hpp"
#include "roidet/optics.hpp"
#include "roidet/visualization.hpp"
#include "support/oracles.hpp"

#ifndef ROIDET_GOLDEN_DIR
#error "ROIDET_GOLDEN_DIR must point at tests/golden"
#endif

namespace golden {

struct Fixture {
  std::string name;
  roidet::RgbImage image;
};

inline std::vector<Fixture> fixtures() {
  using namespace roidet;
  const auto grid = grid_from_slide(16, 16, 8);
  const RgbImage white(16, 16, {255, 255, 255});
  const RgbImage black(16, 16, {0, 0, 0});

  RoiSelection sel;
  sel.selected = {{0, 0}, {1, 1}};
  sel.ranked = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  sel.k_selected = 2;
  sel.beta = 0.5;

  const ScoreMap scores(2, 2, {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.5, 0.5, 0.0}, {0.25, 0.25, 0.5}});

  const auto edges = cell_boundary(std::vector<PatchRef>{{0, 1}}, grid);

  return {
      {"overlay_2x2", render_overlay(white, sel, grid)},
      {"heatmap_2x2", render_heatmap(black, scores, Label::Melanoma, grid)},
      {"boundary_2x2", render_boundary(white, edges, grid)},
  };
}

inline bool matches(const Fixture& f) {
  const std::filesystem::path golden = std::filesystem::path(ROIDET_GOLDEN_DIR) / (f.name + ".png");
  if (const char* update = std::getenv("ROIDET_UPDATE_GOLDENS"); update && std::string(update) == "1") {
    roidet::write_png(golden, f.image);
  }
  oracle::TempDir tmp("golden");
  const auto produced = tmp.path / (f.name + ".png");
  roidet::write_png(produced, f.image);
  if (!std::filesystem::exists(golden)) return false;
  return oracle::read_file(produced) == oracle::read_file(golden) &&
         roidet::read_image(golden) == f.image;
}

}  // namespace golden
