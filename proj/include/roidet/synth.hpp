#pragma once
// Seeded synthetic slide generator for desk-scale runs.
//
// Each slide is stroma-colored noise with 1-3 planted polygonal tumor regions
// colored by the slide label. Annotation files cover only part of the planted
// regions, mimicking incomplete pathologist annotation, and mark a few
// background squares as "other".

#include <cstdint>
#include <filesystem>
#include <vector>

#include "roidet/config.hpp"
#include "roidet/geometry.hpp"
#include "roidet/image.hpp"
#include "roidet/label.hpp"

namespace roidet {

struct SyntheticSlide {
  RgbImage image;
  Label label = Label::Melanoma;
  std::vector<Polygon> planted;
  std::vector<Polygon> annotated;  // subset of planted
  std::vector<Polygon> other;
};

SyntheticSlide generate_slide(const SynthConfig& config, Label label, std::uint64_t seed);

// Writes images/<id>.png, annotations/<id>.json and manifest.json under out_dir.
// Returns the manifest path.
std::filesystem::path generate_synthetic(const SynthConfig& config, int patch_size,
                                         std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace roidet
