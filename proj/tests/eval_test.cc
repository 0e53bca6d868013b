#include "dgalab/eval.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dgalab/charbot.h"
#include "dgalab/rng.h"
#include "test_util.h"

namespace dgalab {
namespace {

using testing::TempDir;

const std::vector<double> kScores{0.9, 0.8, 0.7, 0.6};
const std::vector<std::uint8_t> kLabels{1, 0, 1, 0};

// P(score_pos > score_neg) + P(tie) / 2, over all pairs.
double MannWhitney(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

TEST(Roc, FourPointExample) {
  const RocCurve c = Roc(kScores, kLabels);
  ASSERT_EQ(c.points.size(), 5u);
  EXPECT_EQ(c.positives, 2u);
  EXPECT_EQ(c.negatives, 2u);
  EXPECT_TRUE(std::isinf(c.points[0].threshold));
  const double fpr[] = {0, 0, 0.5, 0.5, 1};
  const double tpr[] = {0, 0.5, 0.5, 1, 1};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(c.points[i].fpr, fpr[i]) << i;
    EXPECT_EQ(c.points[i].tpr, tpr[i]) << i;
    if (i > 0) {
      EXPECT_EQ(c.points[i].threshold, kScores[i - 1]);
    }
  }
  EXPECT_DOUBLE_EQ(FullAuc(c), 0.75);
  EXPECT_DOUBLE_EQ(PartialAuc(c, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(PartialAuc(c, 0.25), 0.5);
}

TEST(Roc, TiesFormOnePoint) {
  const std::vector<double> s{0.5, 0.5, 0.2};
  const std::vector<std::uint8_t> y{1, 0, 0};
  const RocCurve c = Roc(s, y);
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_EQ(c.points[1].true_positives, 1u);
  EXPECT_EQ(c.points[1].false_positives, 1u);
  EXPECT_DOUBLE_EQ(FullAuc(c), 0.75);
}

TEST(Roc, InputErrors) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<std::uint8_t> one_class{1, 1}, short_labels{1};
  try {
    Roc(s, one_class);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleClassData);
  }
  EXPECT_THROW(Roc(s, short_labels), Error);
}

TEST(ThresholdAtFpr, PicksMostPermissiveWithinTarget) {
  const RocCurve c = Roc(kScores, kLabels);
  const auto a = ThresholdAtFpr(c, 0.4);
  EXPECT_EQ(a.threshold, 0.9);
  EXPECT_EQ(a.fpr, 0.0);
  EXPECT_EQ(a.tpr, 0.5);
  const auto b = ThresholdAtFpr(c, 0.5);
  EXPECT_EQ(b.threshold, 0.7);
  EXPECT_EQ(b.tpr, 1.0);
  EXPECT_EQ(TprAtFpr(c, 0.5), 1.0);
  EXPECT_THROW(ThresholdAtFpr(c, 0.0), Error);
  EXPECT_THROW(ThresholdAtFpr(c, 1.0), Error);
}

TEST(ThresholdAtFpr, UnachievableWhenTopScoreIsNegative) {
  const std::vector<double> s{0.9, 0.5, 0.4};
  const std::vector<std::uint8_t> y{0, 1, 0};
  try {
    ThresholdAtFpr(Roc(s, y), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnachievable);
  }
}

// A scorer with only a handful of distinct values cannot hit a small FPR
// once its top value is shared by more negatives than the target allows.
TEST(ThresholdAtFpr, CoarseScoresCannotHitSmallTargets) {
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    s.push_back(static_cast<double>(5 + rng.Below(5)) / 9.0);  // 5/9 .. 9/9
    y.push_back(static_cast<std::uint8_t>(rng.Below(2)));
  }
  const RocCurve c = Roc(s, y);
  EXPECT_LE(c.points.size(), 6u);
  EXPECT_GT(c.points[1].fpr, 0.001);
  EXPECT_THROW(ThresholdAtFpr(c, 0.001), Error);
  EXPECT_NO_THROW(ThresholdAtFpr(c, 0.5));
}

TEST(RocProperty, AucMatchesMannWhitneyAndCurveIsMonotone) {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.Below(60);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<std::uint8_t>(rng.Below(2));
      s[i] = static_cast<double>(rng.Below(10) + 3 * y[i]) / 13.0;
    }
    y[0] = 0;
    y[1] = 1;
    const RocCurve c = Roc(s, y);
    EXPECT_NEAR(FullAuc(c), MannWhitney(s, y), 1e-12) << trial;
    EXPECT_EQ(c.points.back().fpr, 1.0);
    EXPECT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_LT(c.points[i].threshold, c.points[i - 1].threshold);
      EXPECT_GE(c.points[i].fpr, c.points[i - 1].fpr);
      EXPECT_GE(c.points[i].tpr, c.points[i - 1].tpr);
    }
    for (double t : {0.01, 0.1, 0.3, 0.7}) {
      const double p = PartialAuc(c, t);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0 + 1e-12);
      try {
        const auto op = ThresholdAtFpr(c, t);
        EXPECT_LE(op.fpr, t);
        // Lowering to the next distinct score would break the target.
        for (std::size_t i = 1; i + 1 < c.points.size(); ++i) {
          if (c.points[i].threshold == op.threshold) {
            EXPECT_GT(c.points[i + 1].fpr, t);
          }
        }
        EXPECT_DOUBLE_EQ(DetectionRate(s, op.threshold) * n,
                         static_cast<double>(std::count_if(
                             s.begin(), s.end(), [&](double v) { return v >= op.threshold; })));
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kUnachievable);
        EXPECT_GT(c.points[1].fpr, t);
      }
    }
  }
}

TEST(DetectionRate, CountsAtOrAboveThreshold) {
  EXPECT_DOUBLE_EQ(DetectionRate(kScores, 0.7), 0.75);
  EXPECT_DOUBLE_EQ(DetectionRate(kScores, 0.95), 0.0);
  EXPECT_THROW(DetectionRate(std::vector<double>{}, 0.5), Error);
}

TEST(ClipRoc, InterpolatesAtCut) {
  const auto pts = ClipRoc(Roc(kScores, kLabels), 0.25);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[2], (std::pair<double, double>{0.25, 0.5}));
}

TEST(ModelKind, Parse) {
  EXPECT_EQ(ParseModelKind("fanci"), ModelKind::kFanci);
  EXPECT_EQ(ParseModelKind("BRF"), ModelKind::kBrf);
  EXPECT_EQ(SchemaFor(ModelKind::kFanci), SchemaName::kFanci);
  EXPECT_THROW(ParseModelKind("svm"), Error);
}

ExperimentInput SmallExperiment(ModelKind kind) {
  const Dataset benign = LoadAlexa(testing::DataDir() / "benign" / "benign_head.csv", 6, 600);
  const Dataset dga = GenerateRandomDga(600, 21, 8, 20, DefaultCharbotTlds());
  const Dataset* parts[] = {&benign, &dga};
  auto [train, test] = SplitTrainTest(Dataset::Merge("base", parts), 0.8, 5);
  std::vector<Domain> sources;
  for (const auto& e : benign.examples()) sources.push_back(e.domain);
  const auto aug = GenerateBatch(CharbotConfig{}, sources, SeedFromDate("2018-12-04"), 400);
  const auto adv = GenerateBatch(CharbotConfig{}, sources, SeedFromDate("2019-01-01"), 200);
  ExperimentInput in;
  in.dataset_id = "small";
  in.base_train = std::move(train);
  in.base_test = std::move(test);
  in.augmentations.push_back({"charbot", RecordsToDataset(aug, "charbot")});
  in.adversarial_tests.push_back({"charbot_test", RecordsToDataset(adv, "charbot_test")});
  in.kind = kind;
  in.seed = 1;
  in.target_fprs = {0.001, 0.01, 0.1};
  in.generated_at = "2020-01-01T00:00:00Z";
  return in;
}

TEST(RunExperiment, RowsCellsAndReportFiles) {
  TldContext ctx;
  ctx.valid_tlds = {"com", "net", "org"};
  const EvalReport r = RunExperiment(SmallExperiment(ModelKind::kBrf), ctx);
  EXPECT_EQ(r.version, kReportVersion);
  EXPECT_EQ(r.adversarial_sets, std::vector<std::string>{"charbot_test"});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].training_set, "baseline");
  EXPECT_EQ(r.rows[1].training_set, "baseline+charbot");
  EXPECT_EQ(r.rows[1].train_rows, r.rows[0].train_rows + 400);
  std::size_t ok = 0;
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.status, "ok") << row.message;
    ASSERT_EQ(row.cells.size(), 3u);
    for (const auto& cell : row.cells) {
      if (cell.status != kCellOk) continue;
      ++ok;
      EXPECT_LE(*cell.achieved_fpr, cell.target_fpr);
      ASSERT_EQ(cell.detections.size(), 1u);
      ASSERT_TRUE(cell.detections[0].rate);
      EXPECT_GE(*cell.detections[0].rate, 0.0);
      EXPECT_LE(*cell.detections[0].rate, 1.0);
    }
  }
  EXPECT_EQ(r.SucceededCells(), ok);
  EXPECT_GE(ok, 2u);

  // JSON round trip.
  EXPECT_EQ(ReportFromJson(ReportToJson(r)), r);

  TempDir dir;
  const auto files = EmitReport(r, dir.path());
  ASSERT_EQ(files.size(), 4u);
  EXPECT_EQ(ReadReportJson(dir / "report.json"), r);
  const std::string csv = testing::ReadFile(dir / "report.csv");
  EXPECT_TRUE(csv.starts_with(
      "model,training_set,target_fpr,status,threshold,achieved_fpr,tpr,partial_auc,"
      "detect_charbot_test\n"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3);
  for (std::size_t i = 2; i < files.size(); ++i) {
    EXPECT_TRUE(testing::ReadFile(files[i]).starts_with("fpr,tpr\n"));
    EXPECT_TRUE(files[i].filename().string().starts_with("roc_"));
  }
}

TEST(RunExperiment, SameInputsSameReport) {
  TldContext ctx;
  const auto in = SmallExperiment(ModelKind::kFanci);
  EXPECT_EQ(ReportToJson(RunExperiment(in, ctx)), ReportToJson(RunExperiment(in, ctx)));
}

TEST(RunExperiment, SingleClassTrainingIsARowError) {
  auto in = SmallExperiment(ModelKind::kFanci);
  Dataset benign_only("benign_only");
  for (const auto& e : in.base_train.examples()) {
    if (e.label == Label::kBenign) benign_only.Add(e);
  }
  in.base_train = benign_only;
  in.augmentations.clear();
  const EvalReport r = RunExperiment(in, TldContext{});
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].status, "error");
  EXPECT_EQ(r.SucceededCells(), 0u);
}

TEST(ReportJson, RejectsOtherVersions) {
  try {
    ReportFromJson(R"({"version": 2, "rows": []})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  EXPECT_THROW(ReportFromJson("not json"), Error);
}

}  // namespace
}  // namespace dgalab
