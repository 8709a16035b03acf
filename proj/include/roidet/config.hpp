#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roidet/classifier.hpp"
#include "roidet/image.hpp"
#include "roidet/optics.hpp"

namespace roidet {

struct SynthConfig {
  int count = 40;
  int width = 512;
  int height = 512;
  Rgb stroma = {230, 180, 190};
  Rgb melanoma = {120, 80, 60};
  Rgb nevus = {170, 120, 140};
  double sigma = 12.0;
  int min_regions = 1;
  int max_regions = 3;
  double min_region_radius = 50.0;
  double max_region_radius = 100.0;
  // Share of planted regions that get annotated, drawn per slide.
  double min_annotated = 0.6;
  double max_annotated = 1.0;
  int other_regions = 2;
  int other_region_size = 80;
};

struct RunConfig {
  std::filesystem::path manifest;
  int patch_size = 32;
  double tau = 0.5;
  int coverage_samples = kDefaultCoverageSamples;
  double train_frac = 0.8;
  std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8};
  int repeats = 10;
  std::uint64_t seed = 0;
  OpticsParams optics;
  double cluster_threshold = kDefaultClusterThreshold;
  TrainConfig train;
  SynthConfig synth;
  int threads = 1;

  // The config document as loaded, before flag overrides.
  nlohmann::json source = nlohmann::json::object();
};

// Missing keys keep their defaults; relative paths resolve against base_dir.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

// Throws Validation when any field breaks its module's invariants.
void validate(const RunConfig& config);

// Effective configuration, including overrides.
nlohmann::json to_json(const RunConfig& config);

}  // namespace roidet
