#include "roidet/pipeline.hpp"

#include <map>
#include <set>
#include <thread>

#include "roidet/errors.hpp"

namespace roidet {

using nlohmann::json;

SlideData load_slide(const SlideRecord& record, const RunConfig& config) {
  SlideData d;
  d.record = record;
  d.image = read_image(record.image_path);
  d.grid = grid_from_slide(d.image.width(), d.image.height(), record.patch_size);
  d.features = extract_grid_features(d.image, d.grid);
  if (record.annotation_path) {
    d.annotations = load_annotations(*record.annotation_path);
    d.labeled = extract_labeled_patches(record, *d.annotations, d.grid, d.image.width(),
                                        d.image.height(), config.tau, config.coverage_samples);
    d.annotated = annotated_patches(*d.annotations, d.grid, config.tau, config.coverage_samples);
  }
  return d;
}

std::vector<SlideData> load_slides(const DatasetCatalog& catalog, const std::vector<std::string>& ids,
                                   const RunConfig& config) {
  std::vector<SlideData> out(ids.size());
  std::vector<std::exception_ptr> errors(ids.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads),
                                                    std::max<std::size_t>(ids.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < ids.size(); i += workers) {
          try {
            out[i] = load_slide(catalog.find(ids[i]), config);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<Example> training_examples(const std::vector<const SlideData*>& slides) {
  std::vector<Example> out;
  for (const SlideData* s : slides) {
    for (const auto& lp : s->labeled) {
      if (!lp.label) continue;
      out.push_back({s->features[s->grid.linear_index(lp.patch)], *lp.label});
    }
  }
  return out;
}

SlideResult detect_slide(const SlideData& slide, const ScoreMap& scores,
                         std::optional<double> beta_override) {
  if (scores.rows() != slide.grid.rows() || scores.cols() != slide.grid.cols()) {
    throw Error(ErrorCode::GeometryMismatch, "scores do not match the grid of slide '" +
                                                 slide.record.slide_id + "'");
  }
  SlideResult r;
  r.prediction = classify_slide(scores, slide.record.slide_id);

  double beta = 0.0;
  if (beta_override) {
    beta = *beta_override;
  } else if (slide.annotations) {
    beta = annotated_ratio(slide.annotated.size(), slide.grid.size());
  } else {
    throw Error(ErrorCode::InvalidInput, "slide '" + slide.record.slide_id +
                                             "' has no annotations; supply beta explicitly");
  }
  r.selection = select_roi(rank_patches(scores, r.prediction.predicted_label), slide.grid.size(),
                           beta, slide.record.slide_id);

  if (slide.annotations) {
    const std::set<PatchRef> a(slide.annotated.begin(), slide.annotated.end());
    r.iou = patch_iou(a, r.selection.selected);
    r.iou_empty_union = a.empty() && r.selection.selected.empty();

    std::map<PatchRef, Label> truth;
    for (const auto& lp : slide.labeled) {
      if (lp.label) truth.emplace(lp.patch, *lp.label);
    }
    if (!truth.empty()) {
      std::map<PatchRef, Label> predicted;
      for (std::size_t i = 0; i < scores.size(); ++i) predicted.emplace(scores.patch(i), scores[i].argmax());
      r.patch_accuracy = patch_accuracy(predicted, truth);
    }
  }
  return r;
}

json to_json(const SlideResult& r) {
  json selected = json::array();
  for (const auto& p : r.selection.selected) selected.push_back({p.row, p.col});
  json j = {
      {"slide_id", r.prediction.slide_id},
      {"predicted_label", std::string(to_string(r.prediction.predicted_label))},
      {"votes",
       {{"melanoma", r.prediction.votes_melanoma},
        {"nevus", r.prediction.votes_nevus},
        {"other", r.prediction.votes_other}}},
      {"beta", r.selection.beta},
      {"k_selected", r.selection.k_selected},
  };
  if (r.iou) {
    j["iou"] = *r.iou;
    if (r.iou_empty_union) j["iou_empty_union"] = true;
  }
  if (r.patch_accuracy) j["patch_accuracy"] = *r.patch_accuracy;
  j["selected"] = std::move(selected);
  return j;
}

json boundary_to_json(const ClusterBoundary& b, const PatchGrid& grid) {
  const int ps = grid.patch_size();
  json edges = json::array();
  for (const auto& e : b.edges) {
    edges.push_back({{e.x0 * ps, e.y0 * ps}, {e.x1 * ps, e.y1 * ps}});
  }
  return {{"coordinates", "pixel"},
          {"clustering_space", "patch-index"},
          {"cluster_id", b.cluster_id},
          {"cluster_size", b.members.size()},
          {"edges", std::move(edges)}};
}

}  // namespace roidet
