#ifndef DGALAB_FOREST_H_
#define DGALAB_FOREST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgalab/feature_matrix.h"
#include "dgalab/features.h"

namespace dgalab {

enum class Criterion { kGini, kEntropy };

std::string_view ToString(Criterion c);

// Gini = 1 - sum p^2; entropy = -sum p log2 p with 0 log 0 = 0.
// `counts` holds per-class counts with a positive total.
double Impurity(std::span<const std::size_t> counts, Criterion criterion);

// Flat pre-order node. Internal nodes route value <= threshold left; the
// left child always sits at index + 1, the right child at `right`.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t right = -1;
  double malicious_fraction = 0.0;
  std::uint32_t sample_count = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  Criterion criterion = Criterion::kGini;
  std::vector<std::size_t> feature_subset;  // ascending column indices

  // Malicious fraction of the leaf `row` lands in.
  double Predict(std::span<const double> row) const;
  std::size_t Depth() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeParams {
  Criterion criterion = Criterion::kGini;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
};

struct Split {
  std::size_t feature;
  double threshold;
  double gain;
};

// Gains within this distance of the incumbent count as ties; ties keep the
// lowest column, then the lowest threshold.
inline constexpr double kGainTieEpsilon = 1e-12;

// Best axis-aligned split of the given rows (duplicates allowed) over
// `features`, trying midpoints between consecutive distinct values. Returns
// nothing when no split leaves min_samples_leaf rows on each side.
std::optional<Split> FindBestSplit(const FeatureMatrix& m,
                                   std::span<const std::size_t> rows,
                                   std::span<const std::size_t> features,
                                   Criterion criterion,
                                   std::size_t min_samples_leaf);

// Greedy CART induction. Impure nodes split even at zero gain while a valid
// split exists. Throws Error(kDegenerateData) for zero rows.
DecisionTree TrainTree(const FeatureMatrix& m, std::span<const std::size_t> rows,
                       std::span<const std::size_t> features,
                       const TreeParams& params);

struct TrainConfig {
  std::size_t tree_count = 1;
  // Criterion of tree i is criteria[i % criteria.size()].
  std::vector<Criterion> criteria{Criterion::kGini};
  std::size_t min_features_per_tree = 1;
  std::size_t max_features_per_tree = 1;
  bool bootstrap = true;
  std::size_t max_depth = 0;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;

  std::string Describe() const;
  // Throws Error(kInvalidConfig).
  void Validate(std::size_t schema_width) const;
};

// 9 trees, the first 7 Gini and the last 2 entropy, each on a uniform
// 2..18 feature subset.
TrainConfig FanciConfig(std::uint64_t seed);
// 100 entropy trees on min(20, width) features each.
TrainConfig BrfConfig(std::uint64_t seed, std::size_t schema_width);

struct ForestModel {
  SchemaName schema = SchemaName::kFull;
  std::vector<DecisionTree> trees;
  std::string train_config_digest;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

// Each tree uses its own stream seeded from (seed, tree index): subset size,
// subset, then bootstrap draws. Throws Error(kSingleClassData).
ForestModel TrainForest(const FeatureMatrix& m, const TrainConfig& config);
ForestModel TrainFanci(const FeatureMatrix& m, std::uint64_t seed);
ForestModel TrainBrf(const FeatureMatrix& m, std::uint64_t seed);

// Mean leaf malicious fraction over trees.
double Score(const ForestModel& model, std::span<const double> row);
// Throws Error(kSchemaMismatch).
double Score(const ForestModel& model, const FeatureVector& fv);
std::vector<double> ScoreMatrix(const ForestModel& model, const FeatureMatrix& m);

inline constexpr int kModelFormatVersion = 1;

// Text format, see docs/formats.md. Throws Error(kIo).
void SaveModel(const ForestModel& model, const std::filesystem::path& path);
std::string SerializeModel(const ForestModel& model);
// Throws Error(kIo), Error(kVersionMismatch), Error(kCorruptModel).
ForestModel LoadModel(const std::filesystem::path& path);
ForestModel ParseModel(std::string_view text);

}  // namespace dgalab

#endif  // DGALAB_FOREST_H_
