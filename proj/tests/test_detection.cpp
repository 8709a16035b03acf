#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "roidet/detection.hpp"
#include "roidet/errors.hpp"
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

ScoreMap row_map(std::vector<ScoreTriple> s) {
  const int n = static_cast<int>(s.size());
  return ScoreMap(1, n, std::move(s));
}

std::vector<ScoreTriple> votes(int mel, int nev, int other) {
  std::vector<ScoreTriple> s;
  for (int i = 0; i < mel; ++i) s.push_back({0.6, 0.3, 0.1});
  for (int i = 0; i < nev; ++i) s.push_back({0.3, 0.6, 0.1});
  for (int i = 0; i < other; ++i) s.push_back({0.1, 0.2, 0.7});
  return s;
}

}  // namespace

TEST_CASE("classify_slide majority vote ignores other") {
  const auto p = classify_slide(row_map(votes(7, 3, 50)), "s1");
  CHECK(p.predicted_label == Label::Melanoma);
  CHECK(p.votes_melanoma == 7);
  CHECK(p.votes_nevus == 3);
  CHECK(p.votes_other == 50);
  CHECK(p.votes_melanoma + p.votes_nevus + p.votes_other == 60);
  CHECK(p.slide_id == "s1");
  CHECK(classify_slide(row_map(votes(2, 9, 1))).predicted_label == Label::Nevus);
}

TEST_CASE("classify_slide tie goes to larger summed probability") {
  // 5 melanoma and 5 nevus votes; summed p_mel 4.1 vs p_nev 3.9.
  std::vector<ScoreTriple> s;
  for (int i = 0; i < 5; ++i) s.push_back({0.52, 0.38, 0.10});
  for (int i = 0; i < 5; ++i) s.push_back({0.30, 0.40, 0.30});
  double pm = 0, pn = 0;
  for (const auto& t : s) {
    pm += t.p_melanoma;
    pn += t.p_nevus;
  }
  CHECK(pm == doctest::Approx(4.1));
  CHECK(pn == doctest::Approx(3.9));
  CHECK(classify_slide(row_map(s)).predicted_label == Label::Melanoma);

  // Exact tie in votes and sums: melanoma.
  CHECK(classify_slide(row_map({{0.6, 0.4, 0.0}, {0.4, 0.6, 0.0}})).predicted_label == Label::Melanoma);
}

TEST_CASE("classify_slide zero-vote fallback uses mean probabilities") {
  std::vector<ScoreTriple> s(4, ScoreTriple{0.2, 0.3, 0.5});
  const auto p = classify_slide(row_map(s));
  CHECK(p.votes_other == 4);
  CHECK(p.predicted_label == Label::Nevus);
  CHECK(code_of([] { classify_slide(ScoreMap()); }) == ErrorCode::EmptyInput);
}

TEST_CASE("classify_slide is permutation invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<ScoreTriple> s(24);
    for (auto& x : s) {
      const double a = u(rng), b = u(rng), c = u(rng);
      x = {a / (a + b + c), b / (a + b + c), c / (a + b + c)};
    }
    const auto base = classify_slide(ScoreMap(4, 6, s));
    std::shuffle(s.begin(), s.end(), rng);
    const auto perm = classify_slide(ScoreMap(6, 4, s));
    CHECK(base.predicted_label == perm.predicted_label);
    CHECK(base.votes_melanoma == perm.votes_melanoma);
  }
}

TEST_CASE("rank_patches orders by target score then row-major") {
  const auto m = row_map({{0.7, 0.2, 0.1}, {0.9, 0.05, 0.05}});
  const auto r = rank_patches(m, Label::Melanoma);
  CHECK(r == std::vector<PatchRef>{{0, 1}, {0, 0}});

  const ScoreMap flat(3, 3, std::vector<ScoreTriple>(9, ScoreTriple{0.4, 0.4, 0.2}));
  const auto rf = rank_patches(flat, Label::Nevus);
  for (std::size_t i = 0; i < rf.size(); ++i) {
    CHECK(rf[i] == PatchRef{static_cast<int>(i / 3), static_cast<int>(i % 3)});
  }
}

TEST_CASE("annotated_ratio") {
  CHECK(annotated_ratio(5, 20) == 0.25);
  CHECK(annotated_ratio(0, 20) == 0.0);
  CHECK(annotated_ratio(20, 20) == 1.0);
  CHECK(code_of([] { annotated_ratio(0, 0); }) == ErrorCode::DivisionByZero);
  CHECK(code_of([] { annotated_ratio(21, 20); }) == ErrorCode::InvalidCounts);
}

TEST_CASE("select_roi budget rounding") {
  std::vector<PatchRef> ranked;
  for (int i = 0; i < 10; ++i) ranked.push_back({0, i});
  const auto s = select_roi(ranked, 10, 0.34);
  CHECK(s.k_selected == 3);
  CHECK(s.selected == std::set<PatchRef>{{0, 0}, {0, 1}, {0, 2}});
  CHECK(select_roi(ranked, 10, 0.0).selected.empty());
  CHECK(select_roi(ranked, 10, 1.0).selected.size() == 10);
  CHECK(select_roi(ranked, 10, 0.25).k_selected == 3);  // 2.5 rounds away from zero
  CHECK(select_roi(ranked, 10, 0.15).k_selected == 2);
  CHECK(code_of([&] { select_roi(ranked, 11, 0.5); }) == ErrorCode::InvalidInput);
  CHECK(code_of([&] { select_roi(ranked, 10, 1.5); }) == ErrorCode::InvalidInput);
}

TEST_CASE("selection dominance and self-consistency") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int t = 0; t < 200; ++t) {
    const int rows = dim(rng), cols = dim(rng);
    std::vector<ScoreTriple> s(static_cast<std::size_t>(rows * cols));
    // Coarse values force ties.
    for (auto& x : s) {
      const double a = std::round(u(rng) * 4) / 4;
      x = {a, 1.0 - a, 0.0};
    }
    const ScoreMap m(rows, cols, s);
    const double beta = u(rng);
    const auto sel = select_roi(rank_patches(m, Label::Melanoma), m.size(), beta);
    double min_sel = 2.0, max_unsel = -1.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double v = m[i].p_melanoma;
      if (sel.selected.count(m.patch(i))) {
        min_sel = std::min(min_sel, v);
      } else {
        max_unsel = std::max(max_unsel, v);
      }
    }
    if (!sel.selected.empty() && sel.selected.size() < m.size()) CHECK(min_sel >= max_unsel);
    CHECK(sel.selected.size() == static_cast<std::size_t>(std::round(m.size() * beta)));

    // Scores equal to the annotation indicator reproduce the annotation exactly.
    std::set<PatchRef> annotated;
    std::vector<ScoreTriple> ind(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const bool in = u(rng) < 0.3;
      if (in) annotated.insert(m.patch(i));
      ind[i] = in ? ScoreTriple{1, 0, 0} : ScoreTriple{0, 0, 1};
    }
    const ScoreMap im(rows, cols, ind);
    const double b = annotated_ratio(annotated.size(), im.size());
    const auto self = select_roi(rank_patches(im, Label::Melanoma), im.size(), b);
    CHECK(self.selected == annotated);
    if (!annotated.empty()) CHECK(patch_iou(annotated, self.selected) == 1.0);
  }
}

TEST_CASE("patch_iou examples and properties") {
  const std::set<PatchRef> a = {{0, 0}, {0, 1}};
  const std::set<PatchRef> b = {{0, 1}, {1, 1}};
  CHECK(patch_iou(a, b) == doctest::Approx(1.0 / 3));
  CHECK(patch_iou(a, a) == 1.0);
  CHECK(patch_iou(a, {{5, 5}}) == 0.0);
  CHECK(patch_iou({}, {}) == 0.0);

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(1, 20);
  std::bernoulli_distribution coin(0.4);
  for (int t = 0; t < 300; ++t) {
    const int rows = dim(rng), cols = dim(rng);
    std::set<PatchRef> x, y;
    std::vector<char> bx(static_cast<std::size_t>(rows * cols)), by(bx.size());
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const std::size_t i = static_cast<std::size_t>(r * cols + c);
        if ((bx[i] = coin(rng))) x.insert({r, c});
        if ((by[i] = coin(rng))) y.insert({r, c});
      }
    }
    const double iou = patch_iou(x, y);
    CHECK(iou == patch_iou(y, x));
    CHECK(iou == oracle::bitmap_iou(bx, by));
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    CHECK((iou == 1.0) == (x == y && !x.empty()));
  }
}

TEST_CASE("patch_accuracy") {
  std::map<PatchRef, Label> truth, pred;
  for (int i = 0; i < 10; ++i) {
    truth[{0, i}] = Label::Melanoma;
    pred[{0, i}] = i < 8 ? Label::Melanoma : Label::Other;
  }
  CHECK(patch_accuracy(pred, truth) == doctest::Approx(0.8));
  CHECK(patch_accuracy(truth, truth) == 1.0);
  pred.erase({0, 3});
  CHECK(code_of([&] { patch_accuracy(pred, truth); }) == ErrorCode::MissingPrediction);
  CHECK(code_of([&] { patch_accuracy(pred, {}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("aggregate_ci normal approximation") {
  const std::vector<double> two = {0.5, 0.7};
  const auto ci = aggregate_ci(two);
  // s = sqrt(0.02) = 0.141421, SE = s / sqrt(2) = 0.1.
  CHECK(ci.mean == doctest::Approx(0.6));
  CHECK(ci.lower == doctest::Approx(0.404).epsilon(1e-9));
  CHECK(ci.upper == doctest::Approx(0.796).epsilon(1e-9));
  CHECK(ci.k == 2);

  const std::vector<double> flat(10, 0.8);
  const auto cf = aggregate_ci(flat);
  CHECK(cf.lower == doctest::Approx(0.8));
  CHECK(cf.upper == doctest::Approx(0.8));
  CHECK(cf.lower <= cf.mean);
  CHECK(cf.mean <= cf.upper);

  CHECK(code_of([] { aggregate_ci(std::vector<double>{0.5}); }) == ErrorCode::InsufficientRepeats);
}

TEST_CASE("aggregate_ci width shrinks as 1/sqrt(k)") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.5, 0.1);
  // Average widths over many trials so the ratio is stable.
  double w_small = 0.0, w_large = 0.0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(50), b(100);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    const auto ca = aggregate_ci(a);
    const auto cb = aggregate_ci(b);
    w_small += ca.upper - ca.lower;
    w_large += cb.upper - cb.lower;
  }
  const double ratio = w_large / w_small;
  CHECK(std::abs(ratio - 1.0 / std::sqrt(2.0)) <= 0.1 / std::sqrt(2.0));
}
