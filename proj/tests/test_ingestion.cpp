#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "roidet/errors.hpp"
#include "roidet/ingestion.hpp"
#include "support/oracles.hpp"

using namespace roidet;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected roidet::Error");
  return ErrorCode::Validation;
}

DatasetCatalog catalog_of(std::size_t n) {
  DatasetCatalog c;
  for (std::size_t i = 0; i < n; ++i) {
    SlideRecord r;
    r.slide_id = "s" + std::to_string(i);
    r.slide_label = i % 2 ? Label::Nevus : Label::Melanoma;
    c.slides.push_back(r);
  }
  return c;
}

Polygon rect(double x0, double y0, double x1, double y1) {
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

}  // namespace

TEST_CASE("load_catalog parses manifests and resolves paths") {
  oracle::TempDir dir("catalog");
  oracle::write_file(dir.path / "m.json", R"([
    {"slide_id": "a", "image": "img/a.png", "label": "melanoma", "annotations": "ann/a.json", "patch_size": 32},
    {"slide_id": "b", "image": "img/b.png", "label": "nevus", "annotations": null, "patch_size": 16}
  ])");
  const auto cat = load_catalog(dir.path / "m.json");
  REQUIRE(cat.slides.size() == 2);
  CHECK(cat.slides[0].slide_id == "a");
  CHECK(cat.slides[0].slide_label == Label::Melanoma);
  CHECK(cat.slides[0].image_path == dir.path / "img/a.png");
  CHECK(cat.slides[0].annotation_path == dir.path / "ann/a.json");
  CHECK(cat.slides[1].slide_label == Label::Nevus);
  CHECK_FALSE(cat.slides[1].annotation_path.has_value());
  CHECK(cat.slides[1].patch_size == 16);
  CHECK(&cat.find("b") == &cat.slides[1]);
}

TEST_CASE("load_catalog error paths") {
  oracle::TempDir dir("catalog_err");
  CHECK(code_of([&] { load_catalog(dir.path / "missing.json"); }) == ErrorCode::Io);

  oracle::write_file(dir.path / "dup.json", R"([
    {"slide_id": "x", "image": "a.png", "label": "nevus"},
    {"slide_id": "x", "image": "b.png", "label": "nevus"}])");
  try {
    load_catalog(dir.path / "dup.json");
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateId);
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }

  oracle::write_file(dir.path / "label.json",
                     R"([{"slide_id": "x", "image": "a.png", "label": "melanomaa"}])");
  CHECK(code_of([&] { load_catalog(dir.path / "label.json"); }) == ErrorCode::UnknownLabel);

  oracle::write_file(dir.path / "other.json",
                     R"([{"slide_id": "x", "image": "a.png", "label": "other"}])");
  CHECK(code_of([&] { load_catalog(dir.path / "other.json"); }) == ErrorCode::UnknownLabel);

  oracle::write_file(dir.path / "bad.json", "{not json");
  CHECK(code_of([&] { load_catalog(dir.path / "bad.json"); }) == ErrorCode::ParseError);
}

TEST_CASE("load_annotations reads roi and other polygons") {
  oracle::TempDir dir("ann");
  oracle::write_file(dir.path / "a.json",
                     R"({"roi": [[[0,0],[10,0],[10,10]]], "other": [[[20,20],[30,20],[30,30],[20,30]]]})");
  const auto ann = load_annotations(dir.path / "a.json");
  REQUIRE(ann.roi_polygons.size() == 1);
  REQUIRE(ann.other_polygons.size() == 1);
  CHECK(ann.other_polygons[0].size() == 4);

  oracle::write_file(dir.path / "b.json", R"({"roi": [[[0,0],[10,0]]]})");
  CHECK(code_of([&] { load_annotations(dir.path / "b.json"); }) == ErrorCode::MalformedPolygon);
}

TEST_CASE("extract_labeled_patches applies the labeling rule") {
  SlideRecord slide{"s", "s.png", Label::Melanoma, std::nullopt, 32};
  const auto grid = grid_from_slide(128, 64, 32);  // 2 rows x 4 cols
  AnnotationSet ann;
  // Patch (0,0): fully ROI. Patch (0,1): ROI covers 3/4 of columns -> 0.75.
  ann.roi_polygons.push_back(rect(0, 0, 56, 32));
  // Patch (1,0): ROI 1/4 (x<8), other covers it fully.
  ann.roi_polygons.push_back(rect(0, 32, 8, 64));
  ann.other_polygons.push_back(rect(0, 32, 32, 64));
  const auto out = extract_labeled_patches(slide, ann, grid, 128, 64, 0.5);
  REQUIRE(out.size() == 8);
  CHECK(out[0].label == Label::Melanoma);
  CHECK(out[1].label == Label::Melanoma);
  CHECK(out[4].patch == PatchRef{1, 0});
  CHECK(out[4].label == Label::Other);
  CHECK_FALSE(out[2].label.has_value());
  CHECK_FALSE(out[7].label.has_value());

  // Every patch is in exactly one of {slide label, other, unlabeled}, and no
  // labeled patch falls below tau for its polygon set.
  for (const auto& lp : out) {
    if (lp.label == Label::Melanoma) {
      CHECK(patch_coverage(lp.patch, grid, ann.roi_polygons) >= 0.5);
    } else if (lp.label == Label::Other) {
      CHECK(patch_coverage(lp.patch, grid, ann.roi_polygons) < 0.5);
      CHECK(patch_coverage(lp.patch, grid, ann.other_polygons) >= 0.5);
    }
  }

  slide.slide_label = Label::Nevus;
  CHECK(extract_labeled_patches(slide, ann, grid, 128, 64, 0.5)[0].label == Label::Nevus);

  CHECK(code_of([&] { extract_labeled_patches(slide, ann, grid, 160, 64, 0.5); }) ==
        ErrorCode::GeometryMismatch);
  CHECK(code_of([&] { extract_labeled_patches(slide, ann, grid, 128, 64, 0.0); }) ==
        ErrorCode::Validation);
}

TEST_CASE("make_split sizes, determinism and errors") {
  const auto cat = catalog_of(10);
  const auto a = make_split(cat, 0.8, 42);
  CHECK(a.train_ids.size() == 8);
  CHECK(a.test_ids.size() == 2);
  const auto b = make_split(cat, 0.8, 42);
  CHECK(a == b);
  CHECK(to_json(a) == to_json(b));

  std::set<std::string> all(a.train_ids.begin(), a.train_ids.end());
  for (const auto& t : a.test_ids) CHECK(all.insert(t).second);
  CHECK(all.size() == 10);

  CHECK(make_split(cat, 0.8, 43) != a);
  CHECK(code_of([&] { make_split(cat, 1.0, 1); }) == ErrorCode::DegenerateSplit);
  CHECK(code_of([&] { make_split(catalog_of(1), 0.5, 1); }) == ErrorCode::DegenerateSplit);
}

TEST_CASE("subsample_training sizes follow the training pool") {
  const auto cat = catalog_of(168);
  const auto plan = make_split(cat, 0.8, 3);
  REQUIRE(plan.train_ids.size() == 134);
  CHECK(subsample_training(plan, 0.6, 1, 9)[0].train_ids.size() == 80);
  CHECK(subsample_training(plan, 0.4, 1, 9)[0].train_ids.size() == 54);
  CHECK(subsample_training(plan, 0.8, 1, 9)[0].train_ids.size() == 107);

  const auto full = subsample_training(plan, 1.0, 3, 5);
  REQUIRE(full.size() == 3);
  for (const auto& s : full) {
    CHECK(s.train_ids == plan.train_ids);
    CHECK(s.test_ids == plan.test_ids);
  }

  const auto subs = subsample_training(plan, 0.2, 10, 5);
  const std::set<std::string> parent(plan.train_ids.begin(), plan.train_ids.end());
  const std::set<std::string> test(plan.test_ids.begin(), plan.test_ids.end());
  std::set<std::vector<std::string>> distinct;
  for (const auto& s : subs) {
    CHECK(s.test_ids == plan.test_ids);
    for (const auto& id : s.train_ids) {
      CHECK(parent.count(id) == 1);
      CHECK(test.count(id) == 0);
    }
    distinct.insert(s.train_ids);
  }
  CHECK(distinct.size() == 10);
  CHECK(subsample_training(plan, 0.2, 10, 5) == subs);

  SplitPlan tiny;
  tiny.train_ids = {"a", "b"};
  tiny.test_ids = {"c"};
  CHECK(code_of([&] { subsample_training(tiny, 0.1, 1, 0); }) == ErrorCode::DegenerateSplit);
}

TEST_CASE("labeled patch dump is JSON lines") {
  std::vector<LabeledPatch> ps = {{"s", {0, 1}, Label::Other}, {"s", {1, 0}, std::nullopt}};
  CHECK(to_jsonl(ps) ==
        "{\"col\":1,\"label\":\"other\",\"row\":0,\"slide_id\":\"s\"}\n"
        "{\"col\":0,\"label\":null,\"row\":1,\"slide_id\":\"s\"}\n");
}
