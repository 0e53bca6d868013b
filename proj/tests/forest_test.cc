#include "dgalab/forest.h"

#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "dgalab/charbot.h"
#include "dgalab/dataset.h"
#include "dgalab/feature_matrix.h"
#include "dgalab/rng.h"
#include "test_util.h"

namespace dgalab {
namespace {

using testing::TempDir;

// FANCI-shaped matrix whose leading columns come from `rows`; the rest are 0.
FeatureMatrix Matrix(const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels) {
  FeatureMatrix m(SchemaName::kFanci);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> v(m.width(), 0.0);
    std::copy(rows[i].begin(), rows[i].end(), v.begin());
    m.AddRow(v, labels[i], "r" + std::to_string(i) + ".com", "t");
  }
  return m;
}

std::vector<std::size_t> Iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Real lexical features of benign head domains against random DGA names.
const FeatureMatrix& SmallCorpus(SchemaName schema) {
  static std::map<SchemaName, FeatureMatrix> cache;
  auto it = cache.find(schema);
  if (it != cache.end()) return it->second;
  Dataset benign = LoadAlexa(testing::DataDir() / "benign" / "benign_head.csv", 6, 300);
  const Dataset dga = GenerateRandomDga(300, 4, 8, 20, DefaultCharbotTlds());
  const Dataset* parts[] = {&benign, &dga};
  const Dataset all = Dataset::Merge("all", parts);
  const NgramTables tables = BuildNgramTables(benign);
  TldContext ctx;
  ctx.valid_tlds = {"com", "net", "org"};
  return cache.emplace(schema, Featurize(all, schema, &tables, ctx).matrix).first->second;
}

// Straight from class counts, independent of the split search.
double BruteImpurity(double neg, double pos, Criterion c) {
  const double n = neg + pos;
  double acc = 0.0;
  for (double k : {neg, pos}) {
    const double p = k / n;
    if (c == Criterion::kGini) {
      acc += p * p;
    } else if (p > 0) {
      acc -= p * std::log2(p);
    }
  }
  return c == Criterion::kGini ? 1.0 - acc : acc;
}

std::optional<Split> BruteBestSplit(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& feats, Criterion c,
                                    std::size_t min_leaf) {
  double pos = 0;
  for (std::size_t r : rows) pos += m.label(r);
  const double n = static_cast<double>(rows.size());
  const double parent = BruteImpurity(n - pos, pos, c);
  std::optional<Split> best;
  for (std::size_t f : feats) {
    std::set<double> distinct;
    for (std::size_t r : rows) distinct.insert(m.At(r, f));
    for (auto it = distinct.begin(); std::next(it) != distinct.end(); ++it) {
      const double thr = *it + (*std::next(it) - *it) / 2.0;
      double ln = 0, lp = 0;
      for (std::size_t r : rows) {
        if (m.At(r, f) <= thr) {
          ++ln;
          lp += m.label(r);
        }
      }
      const double rn = n - ln, rp = pos - lp;
      if (ln < min_leaf || rn < min_leaf) continue;
      const double gain = parent - ln / n * BruteImpurity(ln - lp, lp, c) -
                          rn / n * BruteImpurity(rn - rp, rp, c);
      if (!best || gain > best->gain + kGainTieEpsilon) best = Split{f, thr, gain};
    }
  }
  return best;
}

TEST(Impurity, ThreeToOne) {
  const std::vector<std::size_t> counts{3, 1};
  EXPECT_DOUBLE_EQ(Impurity(counts, Criterion::kGini), 0.375);
  EXPECT_NEAR(Impurity(counts, Criterion::kEntropy),
              -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25)), 1e-15);
  EXPECT_NEAR(Impurity(counts, Criterion::kEntropy), 0.8112781244591328, 1e-15);
  const std::vector<std::size_t> pure{0, 7};
  EXPECT_EQ(Impurity(pure, Criterion::kGini), 0.0);
  EXPECT_EQ(Impurity(pure, Criterion::kEntropy), 0.0);
  const std::vector<std::size_t> none{0, 0};
  EXPECT_THROW(Impurity(none, Criterion::kGini), Error);
}

TEST(FindBestSplit, SeparableColumnWins) {
  const FeatureMatrix m = Matrix({{1, 5}, {2, 5}, {3, 6}, {4, 6}}, {0, 0, 1, 1});
  const auto rows = Iota(4);
  const std::vector<std::size_t> feats{0, 1};
  const auto s = FindBestSplit(m, rows, feats, Criterion::kGini, 1);
  ASSERT_TRUE(s);
  // Both columns separate perfectly; the lower column wins the tie.
  EXPECT_EQ(s->feature, 0u);
  EXPECT_DOUBLE_EQ(s->threshold, 2.5);
  EXPECT_DOUBLE_EQ(s->gain, 0.5);
}

TEST(FindBestSplit, MinLeafAndConstantColumns) {
  const FeatureMatrix m = Matrix({{1}, {2}, {3}}, {0, 1, 1});
  const auto rows = Iota(3);
  const std::vector<std::size_t> feats{0};
  EXPECT_FALSE(FindBestSplit(m, rows, feats, Criterion::kGini, 2));
  const std::vector<std::size_t> constant{5};
  EXPECT_FALSE(FindBestSplit(m, rows, constant, Criterion::kGini, 1));
}

TEST(FindBestSplitProperty, MatchesExhaustiveSearch) {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.Below(25);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      // Few distinct values so ties and duplicates are common.
      rows.push_back({static_cast<double>(rng.Below(5)), static_cast<double>(rng.Below(3)) * 0.5,
                      static_cast<double>(rng.Below(8)) - 3.0});
      labels.push_back(static_cast<int>(rng.Below(2)));
    }
    const FeatureMatrix m = Matrix(rows, labels);
    std::vector<std::size_t> sample;  // with duplicates, like a bootstrap
    for (std::size_t i = 0; i < n; ++i) sample.push_back(rng.Below(n));
    const std::vector<std::size_t> feats{0, 1, 2};
    const std::size_t min_leaf = 1 + rng.Below(3);
    for (Criterion c : {Criterion::kGini, Criterion::kEntropy}) {
      const auto got = FindBestSplit(m, sample, feats, c, min_leaf);
      const auto want = BruteBestSplit(m, sample, feats, c, min_leaf);
      ASSERT_EQ(got.has_value(), want.has_value()) << trial;
      if (!got) continue;
      EXPECT_EQ(got->feature, want->feature) << trial;
      EXPECT_EQ(got->threshold, want->threshold) << trial;
      EXPECT_NEAR(got->gain, want->gain, 1e-12) << trial;
    }
  }
}

TEST(TrainTree, XorNeedsZeroGainRootSplit) {
  const FeatureMatrix m = Matrix({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  const auto rows = Iota(4);
  const std::vector<std::size_t> feats{0, 1};
  const DecisionTree t = TrainTree(m, rows, feats, TreeParams{});
  ASSERT_FALSE(t.nodes.empty());
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_EQ(t.nodes[0].threshold, 0.5);
  EXPECT_EQ(t.Depth(), 2u);
  EXPECT_EQ(t.nodes.size(), 7u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(t.Predict(m.Row(i)), m.label(i));
}

TEST(TrainTree, MaxDepthGivesFractionalLeaves) {
  const FeatureMatrix m = Matrix({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  const auto rows = Iota(4);
  const std::vector<std::size_t> feats{0, 1};
  const DecisionTree t = TrainTree(m, rows, feats, TreeParams{Criterion::kGini, 1, 1});
  EXPECT_EQ(t.Depth(), 1u);
  EXPECT_EQ(t.Predict(m.Row(0)), 0.5);
}

// Pre-order layout, count bookkeeping, and training accuracy on a sample
// without conflicting duplicates.
TEST(TrainTreeProperty, StructureAndFit) {
  const FeatureMatrix& m = SmallCorpus(SchemaName::kFanci);
  const auto rows = Iota(m.rows());
  for (Criterion c : {Criterion::kGini, Criterion::kEntropy}) {
    const std::vector<std::size_t> feats = Iota(m.width());
    const DecisionTree t = TrainTree(m, rows, feats, TreeParams{c, 0, 1});
    EXPECT_EQ(t.nodes[0].sample_count, m.rows());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const TreeNode& n = t.nodes[i];
      if (n.is_leaf()) continue;
      ASSERT_GT(n.right, static_cast<std::int32_t>(i + 1));
      ASSERT_LT(static_cast<std::size_t>(n.right), t.nodes.size());
      EXPECT_EQ(t.nodes[i + 1].sample_count + t.nodes[n.right].sample_count, n.sample_count);
      EXPECT_GT(n.malicious_fraction, 0.0);
      EXPECT_LT(n.malicious_fraction, 1.0);
    }
    // Rows whose feature vectors are unique are fit exactly.
    std::map<std::vector<double>, std::set<int>> seen;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      seen[{m.Row(r).begin(), m.Row(r).end()}].insert(m.label(r));
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (seen[{m.Row(r).begin(), m.Row(r).end()}].size() == 1) {
        EXPECT_EQ(t.Predict(m.Row(r)), m.label(r));
      }
    }
  }
}

TEST(TrainForest, FanciShape) {
  const FeatureMatrix& m = SmallCorpus(SchemaName::kFanci);
  const ForestModel model = TrainFanci(m, 7);
  ASSERT_EQ(model.trees.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(model.trees[i].criterion, i < 7 ? Criterion::kGini : Criterion::kEntropy);
    const auto& fs = model.trees[i].feature_subset;
    EXPECT_GE(fs.size(), 2u);
    EXPECT_LE(fs.size(), 18u);
    EXPECT_TRUE(std::is_sorted(fs.begin(), fs.end()));
    for (const TreeNode& n : model.trees[i].nodes) {
      if (!n.is_leaf()) {
        EXPECT_TRUE(std::binary_search(fs.begin(), fs.end(),
                                       static_cast<std::size_t>(n.feature)));
      }
    }
  }
  EXPECT_EQ(model.schema, SchemaName::kFanci);
  EXPECT_EQ(model.train_config_digest.size(), 16u);
}

TEST(TrainForest, BrfShape) {
  const FeatureMatrix& m = SmallCorpus(SchemaName::kBrf);
  const ForestModel model = TrainBrf(m, 7);
  ASSERT_EQ(model.trees.size(), 100u);
  for (const auto& t : model.trees) {
    EXPECT_EQ(t.criterion, Criterion::kEntropy);
    EXPECT_EQ(t.feature_subset.size(), 20u);
    // n bootstrap draws, duplicates included.
    EXPECT_EQ(t.nodes[0].sample_count, m.rows());
  }
}

TEST(TrainForest, DeterministicInSeed) {
  const FeatureMatrix& m = SmallCorpus(SchemaName::kFanci);
  EXPECT_EQ(TrainFanci(m, 3), TrainFanci(m, 3));
  EXPECT_NE(TrainFanci(m, 3), TrainFanci(m, 4));
}

TEST(TrainForest, RejectsDegenerateInput) {
  const FeatureMatrix one_class = Matrix({{1}, {2}}, {1, 1});
  try {
    TrainFanci(one_class, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleClassData);
  }
  try {
    TrainFanci(FeatureMatrix(SchemaName::kFanci), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateData);
  }
  TrainConfig bad = FanciConfig(1);
  bad.max_features_per_tree = 99;
  EXPECT_THROW(TrainForest(Matrix({{1}, {2}}, {0, 1}), bad), Error);
}

TEST(Score, MeanOfTreePredictionsInUnitInterval) {
  const FeatureMatrix& m = SmallCorpus(SchemaName::kFanci);
  const ForestModel model = TrainFanci(m, 11);
  const auto scores = ScoreMatrix(model, m);
  ASSERT_EQ(scores.size(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.Predict(m.Row(r));
    EXPECT_DOUBLE_EQ(scores[r], sum / 9.0);
    EXPECT_GE(scores[r], 0.0);
    EXPECT_LE(scores[r], 1.0);
  }
  const FeatureVector wrong{SchemaName::kBrf, std::vector<double>(26, 0.0)};
  try {
    Score(model, wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

TEST(ModelFile, RoundTripIsExact) {
  const FeatureMatrix& m = SmallCorpus(SchemaName::kBrf);
  const ForestModel model = TrainBrf(m, 5);
  TempDir dir;
  SaveModel(model, dir / "model.txt");
  const ForestModel back = LoadModel(dir / "model.txt");
  EXPECT_EQ(back, model);
  EXPECT_EQ(ScoreMatrix(back, m), ScoreMatrix(model, m));
  EXPECT_EQ(SerializeModel(back), SerializeModel(model));
}

TEST(ModelFile, CorruptAndVersionErrors) {
  const FeatureMatrix m = Matrix({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  const std::string text = SerializeModel(TrainFanci(m, 1));
  EXPECT_TRUE(text.starts_with("DGALAB-FOREST 1\n"));
  for (std::size_t cut : {text.size() / 2, text.size() - 4, std::size_t{20}}) {
    try {
      ParseModel(text.substr(0, cut));
      ADD_FAILURE() << cut;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kCorruptModel) << cut;
    }
  }
  std::string v2 = text;
  v2.replace(0, 15, "DGALAB-FOREST 2");
  try {
    ParseModel(v2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  EXPECT_THROW(LoadModel("/nonexistent/model.txt"), Error);
}

}  // namespace
}  // namespace dgalab
