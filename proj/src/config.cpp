#include "roidet/config.hpp"

#include <fstream>

#include "roidet/errors.hpp"

namespace roidet {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

void read_rgb(const json& j, const char* key, Rgb& field) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<int>>();
  if (v.size() != 3) throw Error(ErrorCode::Validation, std::string(key) + " must have 3 channels");
  for (int i = 0; i < 3; ++i) {
    if (v[i] < 0 || v[i] > 255) {
      throw Error(ErrorCode::Validation, std::string(key) + " channel out of [0,255]");
    }
    field[i] = static_cast<std::uint8_t>(v[i]);
  }
}

}  // namespace

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.source = j;
  try {
    if (j.contains("manifest")) {
      std::filesystem::path m = j.at("manifest").get<std::string>();
      c.manifest = m.is_absolute() || base_dir.empty() ? m : base_dir / m;
    }
    read(j, "patch_size", c.patch_size);
    read(j, "tau", c.tau);
    read(j, "coverage_samples", c.coverage_samples);
    read(j, "train_frac", c.train_frac);
    read(j, "fractions", c.fractions);
    read(j, "repeats", c.repeats);
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    if (j.contains("optics")) {
      const json& o = j.at("optics");
      read(o, "eps", c.optics.eps);
      read(o, "min_pts", c.optics.min_pts);
      read(o, "threshold", c.cluster_threshold);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      read(t, "learning_rate", c.train.learning_rate);
      read(t, "epochs", c.train.epochs);
      read(t, "batch_size", c.train.batch_size);
      read(t, "seed", c.train.seed);
      read(t, "l2", c.train.l2);
    }
    if (j.contains("synth")) {
      const json& s = j.at("synth");
      read(s, "count", c.synth.count);
      read(s, "width", c.synth.width);
      read(s, "height", c.synth.height);
      read_rgb(s, "stroma", c.synth.stroma);
      read_rgb(s, "melanoma", c.synth.melanoma);
      read_rgb(s, "nevus", c.synth.nevus);
      read(s, "sigma", c.synth.sigma);
      read(s, "min_regions", c.synth.min_regions);
      read(s, "max_regions", c.synth.max_regions);
      read(s, "min_region_radius", c.synth.min_region_radius);
      read(s, "max_region_radius", c.synth.max_region_radius);
      read(s, "min_annotated", c.synth.min_annotated);
      read(s, "max_annotated", c.synth.max_annotated);
      read(s, "other_regions", c.synth.other_regions);
      read(s, "other_region_size", c.synth.other_region_size);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::Validation, "config: " + msg); };
  if (c.patch_size < 1) fail("patch_size must be >= 1");
  if (!(c.tau > 0.0 && c.tau <= 1.0)) fail("tau must be in (0, 1]");
  if (c.coverage_samples < 1) fail("coverage_samples must be >= 1");
  if (!(c.train_frac > 0.0 && c.train_frac < 1.0)) fail("train_frac must be in (0, 1)");
  if (c.fractions.empty()) fail("fractions must be non-empty");
  for (double f : c.fractions) {
    if (!(f > 0.0 && f <= 1.0)) fail("every fraction must be in (0, 1]");
  }
  if (c.repeats < 1) fail("repeats must be >= 1");
  if (!(c.optics.eps > 0.0)) fail("optics.eps must be > 0");
  if (c.optics.min_pts < 2) fail("optics.min_pts must be >= 2");
  if (!(c.cluster_threshold > 0.0)) fail("optics.threshold must be > 0");
  if (!(c.train.learning_rate > 0.0)) fail("train.learning_rate must be > 0");
  if (c.train.epochs < 1) fail("train.epochs must be >= 1");
  if (c.train.batch_size < 1) fail("train.batch_size must be >= 1");
  if (!(c.train.l2 >= 0.0)) fail("train.l2 must be >= 0");
  const SynthConfig& s = c.synth;
  if (s.count < 1) fail("synth.count must be >= 1");
  if (s.width < c.patch_size || s.height < c.patch_size) fail("synth slide smaller than a patch");
  if (!(s.sigma >= 0.0)) fail("synth.sigma must be >= 0");
  if (s.min_regions < 1 || s.max_regions < s.min_regions) fail("synth region counts invalid");
  if (!(s.min_region_radius > 0.0) || s.max_region_radius < s.min_region_radius) {
    fail("synth region radii invalid");
  }
  if (!(s.min_annotated > 0.0) || s.max_annotated > 1.0 || s.max_annotated < s.min_annotated) {
    fail("synth annotated share must satisfy 0 < min <= max <= 1");
  }
  if (s.other_regions < 0 || s.other_region_size < 1) fail("synth other regions invalid");
  if (c.threads < 1) fail("threads must be >= 1");
}

json to_json(const RunConfig& c) {
  auto rgb = [](const Rgb& v) { return std::vector<int>{v[0], v[1], v[2]}; };
  return {
      {"manifest", c.manifest.generic_string()},
      {"patch_size", c.patch_size},
      {"tau", c.tau},
      {"coverage_samples", c.coverage_samples},
      {"train_frac", c.train_frac},
      {"fractions", c.fractions},
      {"repeats", c.repeats},
      {"seed", c.seed},
      {"threads", c.threads},
      {"optics", {{"eps", c.optics.eps}, {"min_pts", c.optics.min_pts}, {"threshold", c.cluster_threshold}}},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"seed", c.train.seed},
        {"l2", c.train.l2}}},
      {"synth",
       {{"count", c.synth.count},
        {"width", c.synth.width},
        {"height", c.synth.height},
        {"stroma", rgb(c.synth.stroma)},
        {"melanoma", rgb(c.synth.melanoma)},
        {"nevus", rgb(c.synth.nevus)},
        {"sigma", c.synth.sigma},
        {"min_regions", c.synth.min_regions},
        {"max_regions", c.synth.max_regions},
        {"min_region_radius", c.synth.min_region_radius},
        {"max_region_radius", c.synth.max_region_radius},
        {"min_annotated", c.synth.min_annotated},
        {"max_annotated", c.synth.max_annotated},
        {"other_regions", c.synth.other_regions},
        {"other_region_size", c.synth.other_region_size}}},
  };
}

}  // namespace roidet
