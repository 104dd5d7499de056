#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "helpers.h"
#include "sedkit/error.h"
#include "sedkit/io.h"
#include "sedkit/psds.h"

using namespace sedkit;
using namespace testing_support;

namespace {

ClipScores clip(const std::string& id, const VocabularyPtr& vocab, std::vector<std::vector<double>> rows) {
  const std::size_t frames = rows.size();
  return {id, ScoreMatrix(FrameGrid(0.04, frames), vocab, matrix_from_rows(rows))};
}

// One class, a 1 s clip, one ground truth at (0.2, 0.6).
std::vector<ClipScores> single_class(const std::vector<double>& column) {
  const auto vocab = letters_vocabulary(1);
  std::vector<std::vector<double>> rows;
  for (double v : column) rows.push_back({v});
  return {clip("x", vocab, rows)};
}

std::vector<double> perfect_column() {
  std::vector<double> col(25, 0.0);
  for (std::size_t t = 5; t < 15; ++t) col[t] = 1.0;
  return col;
}

GroundTruth single_gt() { return {{"x", {{0, 0.2, 0.6}}}}; }

// Dataset with two classes detected with different quality.
MicroDataset unequal_dataset() {
  MicroDataset d;
  d.setup.classes = 2;
  for (int k = 0; k < 4; ++k) {
    oracle::Clip c;
    c.id = "c" + std::to_string(k);
    c.frames = 25;
    c.scores.assign(25, {0.1, 0.1});
    for (std::size_t t = 5; t < 15; ++t) c.scores[t][0] = 0.9;
    // Class 1 is only found in half of the clips.
    if (k % 2 == 0) {
      for (std::size_t t = 5; t < 15; ++t) c.scores[t][1] = 0.8;
    }
    d.clips.push_back(c);
    d.gt.push_back({c.id, 0, 0.2, 0.6});
    d.gt.push_back({c.id, 1, 0.2, 0.6});
  }
  return d;
}

}  // namespace

TEST_CASE("intersection_match") {
  const std::vector<Event> gt{{0, 1.0, 2.0}};
  CHECK(intersection_match(gt, gt, 1.0, 1.0) == MatchCounts{1, 0});
  const std::vector<Event> far{{0, 5.0, 6.0}};
  CHECK(intersection_match(far, gt, 0.7, 0.7) == MatchCounts{0, 1});
  const std::vector<Event> g10{{0, 0.0, 10.0}};
  const std::vector<Event> d6{{0, 0.0, 6.0}};
  CHECK(intersection_match(d6, g10, 0.7, 0.7) == MatchCounts{0, 0});
  // Two detections jointly covering a ground truth.
  const std::vector<Event> halves{{0, 0.0, 5.0}, {0, 5.0, 10.0}};
  CHECK(intersection_match(halves, g10, 0.7, 0.7) == MatchCounts{1, 0});
  // One detection spanning two ground truths.
  const std::vector<Event> two{{0, 0.0, 1.0}, {0, 1.2, 2.0}};
  const std::vector<Event> wide{{0, 0.0, 2.0}};
  CHECK(intersection_match(wide, two, 0.7, 0.7) == MatchCounts{2, 0});
  CHECK(intersection_match({}, gt, 0.7, 0.7) == MatchCounts{0, 0});
}

TEST_CASE("change_point_thresholds") {
  CHECK(change_point_thresholds(single_class(std::vector<double>(25, 0.5)), 0) == std::vector<double>{0.5});
  std::vector<double> col(25, 0.2);
  col[3] = 0.8;
  col[4] = 0.0;
  CHECK(change_point_thresholds(single_class(col), 0) == std::vector<double>{0.2, 0.8});
  const auto points = operating_points(single_class(col), single_gt(), 0, PsdsParams{});
  REQUIRE(points.size() == 3);
  CHECK(std::isinf(points[0].threshold));
  CHECK(points[1].threshold == 0.8);
  CHECK(points[2].threshold == 0.2);
}

TEST_CASE("psds boundary cases") {
  PsdsParams p;
  const auto perfect = psds(single_class(perfect_column()), single_gt(), p);
  CHECK(perfect.psds == 1.0);
  REQUIRE(perfect.curves.size() == 1);
  const auto& staircase = perfect.curves[0].points;
  // The empty-detection point is dominated at eFPR 0.
  REQUIRE(staircase.size() == 1);
  CHECK(staircase[0].tpr == 1.0);
  CHECK(staircase[0].efpr == 0.0);

  CHECK(psds(single_class(std::vector<double>(25, 0.0)), single_gt(), p).psds == 0.0);

  const auto d = unequal_dataset();
  auto params = to_params(d.setup);
  const double plain = psds(to_clip_scores(d), to_ground_truth(d), params).psds;
  params.alpha_st = 1.0;
  const double penalised = psds(to_clip_scores(d), to_ground_truth(d), params).psds;
  CHECK(penalised < plain);
  CHECK(penalised >= 0.0);
}

TEST_CASE("psds is invariant to increasing score transforms") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto d = random_micro_dataset(seed, 10, 3, 25);
    d.setup.e_max = 1e5;
    d.setup.alpha_st = 0.5;
    const auto params = to_params(d.setup);
    const double base = psds(to_clip_scores(d), to_ground_truth(d), params).psds;
    for (auto& c : d.clips) {
      for (auto& row : c.scores) {
        for (double& v : row) v = v * v * v;
      }
    }
    CHECK(std::abs(psds(to_clip_scores(d), to_ground_truth(d), params).psds - base) <= 1e-12);
  }
}

TEST_CASE("psds is invariant to class order") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    auto d = random_micro_dataset(seed, 8, 3, 25);
    d.setup.e_max = 5000;
    d.setup.alpha_st = 0.3;
    const auto params = to_params(d.setup);
    const double base = psds(to_clip_scores(d), to_ground_truth(d), params).psds;
    const std::size_t perm[3] = {2, 0, 1};
    for (auto& c : d.clips) {
      for (auto& row : c.scores) row = {row[perm[0]], row[perm[1]], row[perm[2]]};
    }
    for (auto& g : d.gt) g.cls = g.cls == 2 ? 0 : g.cls + 1;
    CHECK(psds(to_clip_scores(d), to_ground_truth(d), params).psds == Catch::Approx(base).margin(1e-12));
  }
}

TEST_CASE("operating points are monotone and the staircase is non-dominated") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto d = random_micro_dataset(seed, 10, 2, 25);
    const auto scores = to_clip_scores(d);
    const auto gt = to_ground_truth(d);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto pts = operating_points(scores, gt, c, to_params(d.setup));
      for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].threshold < pts[i - 1].threshold);
        CHECK(pts[i].tpr >= 0.0);
        CHECK(pts[i].tpr <= 1.0);
      }
      const auto stair = roc_staircase(pts);
      for (std::size_t i = 1; i < stair.size(); ++i) {
        CHECK(stair[i].efpr > stair[i - 1].efpr);
        CHECK(stair[i].tpr > stair[i - 1].tpr);
      }
      for (const auto& q : pts) {
        // Every raw point is dominated by a staircase point.
        bool covered = false;
        for (const auto& s : stair) covered = covered || (s.efpr <= q.efpr && s.tpr >= q.tpr);
        CHECK(covered);
      }
    }
  }
}

TEST_CASE("psds matches the dense sweep oracle") {
  const double emax[] = {100.0, 1000.0, 1e4, 1e5};
  const double alphas[] = {0.0, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto d = random_micro_dataset(1000 + seed, 10, 3, 25);
    d.setup.e_max = emax[seed % 4];
    d.setup.alpha_st = alphas[seed % 3];
    d.setup.no_gt_tpr_one = seed % 5 != 0;
    const auto gt = to_ground_truth(d);
    bool any_gt = false;
    for (const auto& [id, events] : gt) any_gt = any_gt || !events.empty();
    if (!any_gt) continue;
    const auto result = psds(to_clip_scores(d), gt, to_params(d.setup));
    const double expected = oracle::dense_psds(d.clips, d.gt, d.setup);
    INFO("seed " << seed);
    CHECK(std::abs(result.psds - expected) <= 1e-9);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto dense = oracle::dense_sweep(d.clips, d.gt, c, d.setup);
      const auto pts = operating_points(to_clip_scores(d), gt, c, to_params(d.setup));
      // A dense candidate detects what the lowest change point at or above it detects.
      for (const auto& q : dense) {
        const OperatingPoint* match = &pts.front();
        for (const auto& p : pts) {
          if (p.threshold >= q.threshold) match = &p;
        }
        CHECK(match->tp == q.tp);
        CHECK(match->fp == q.fp);
      }
    }
  }
}

TEST_CASE("psds does not depend on the thread count") {
  auto d = random_micro_dataset(77, 10, 3, 25);
  d.setup.e_max = 1e4;
  auto params = to_params(d.setup);
  params.threads = 1;
  const auto one = psds(to_clip_scores(d), to_ground_truth(d), params);
  params.threads = 4;
  const auto four = psds(to_clip_scores(d), to_ground_truth(d), params);
  CHECK(one.psds == four.psds);
  for (std::size_t c = 0; c < one.curves.size(); ++c) CHECK(one.curves[c].points == four.curves[c].points);
}

TEST_CASE("psds on the bundled fixture") {
  const std::filesystem::path dir = std::filesystem::path(SEDKIT_FIXTURE_DIR) / "psds_small";
  const auto vocab = std::make_shared<const ClassVocabulary>(io::read_vocabulary(dir / "vocab.txt"));
  std::vector<ClipScores> scores;
  for (int k = 0; k < 6; ++k) {
    const std::string id = "clip" + std::to_string(k);
    scores.push_back({id, io::read_score_tsv(dir / "scores" / (id + ".tsv"), ScoreKind::Probability, vocab)});
  }
  const auto rows = io::read_events_tsv(dir / "gt.tsv");
  GroundTruth gt;
  for (const auto& s : scores) gt[s.clip_id];
  for (const auto& r : rows) gt[r.clip_id].push_back({vocab->index(r.label), r.onset, r.offset});

  std::ifstream expected(dir / "expected.tsv");
  std::string line;
  std::getline(expected, line);
  int checked = 0;
  while (std::getline(expected, line)) {
    std::istringstream ss(line);
    double dtc, gtc, emax, alpha, value;
    ss >> dtc >> gtc >> emax >> alpha >> value;
    PsdsParams p;
    p.rho_dtc = dtc;
    p.rho_gtc = gtc;
    p.e_max = emax;
    p.alpha_st = alpha;
    CHECK(std::abs(psds(scores, gt, p).psds - value) <= 1e-9);
    ++checked;
  }
  CHECK(checked == 3);
}

TEST_CASE("psds_from_curves") {
  std::vector<std::vector<OperatingPoint>> curves(2);
  curves[0] = {{std::numeric_limits<double>::infinity(), 0, 0, 0.0, 0.0}, {0.5, 1, 2, 1.0, 50.0}};
  curves[1] = {{std::numeric_limits<double>::infinity(), 0, 0, 0.5, 0.0}};
  // Mean TPR is 0.25 on [0, 50) and 0.75 on [50, 100].
  CHECK(psds_from_curves(curves, 0.0, 100.0) == Catch::Approx(0.5).margin(1e-15));
  // Penalised: std is 0.25 everywhere.
  CHECK(psds_from_curves(curves, 1.0, 100.0) == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("psds error handling") {
  PsdsParams p;
  p.e_max = 0.0;
  CHECK_THROWS_AS(p.validate(), ContractError);
  PsdsParams ok;
  CHECK_THROWS(psds({}, {}, ok));
  // Ground truth in a clip without scores.
  GroundTruth gt = single_gt();
  gt["missing"] = {{0, 0.1, 0.2}};
  CHECK_THROWS(psds(single_class(perfect_column()), gt, ok));
  // Logits are refused.
  const auto vocab = letters_vocabulary(1);
  std::vector<ClipScores> logits{{"x", ScoreMatrix(FrameGrid(0.04, 2), vocab, Matrix(2, 1, -3.0), ScoreKind::Logit)}};
  CHECK_THROWS(psds(logits, single_gt(), ok));
}
