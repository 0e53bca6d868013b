#include "dgalab/forest.h"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dgalab/error.h"
#include "dgalab/hash.h"
#include "dgalab/rng.h"
#include "text_util.h"

namespace dgalab {

std::string_view ToString(Criterion c) {
  return c == Criterion::kGini ? "gini" : "entropy";
}

double Impurity(std::span<const std::size_t> counts, Criterion criterion) {
  const double total =
      static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (total <= 0) throw Error(ErrorCode::kDegenerateData, "impurity of an empty node");
  double acc = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    acc += criterion == Criterion::kGini ? p * p : -p * std::log2(p);
  }
  return criterion == Criterion::kGini ? 1.0 - acc : acc;
}

double DecisionTree::Predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = row[static_cast<std::size_t>(n.feature)] <= n.threshold
            ? i + 1
            : static_cast<std::size_t>(n.right);
  }
  return nodes[i].malicious_fraction;
}

std::size_t DecisionTree::Depth() const {
  if (nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({i + 1, d + 1});
      stack.push_back({static_cast<std::size_t>(nodes[i].right), d + 1});
    }
  }
  return deepest;
}

namespace {

// Midpoint that stays strictly below `hi` so `lo` still goes left.
double Midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(mid < hi)) mid = lo;
  return mid;
}

double WeightedGain(double parent, std::size_t left_mal, std::size_t left_n,
                    std::size_t total_mal, std::size_t total_n,
                    Criterion criterion) {
  const std::size_t right_n = total_n - left_n;
  const std::size_t right_mal = total_mal - left_mal;
  const std::array<std::size_t, 2> l{left_n - left_mal, left_mal};
  const std::array<std::size_t, 2> r{right_n - right_mal, right_mal};
  const double n = static_cast<double>(total_n);
  return parent - (static_cast<double>(left_n) / n) * Impurity(l, criterion) -
         (static_cast<double>(right_n) / n) * Impurity(r, criterion);
}

// Samples are positions 0..n-1 into the bootstrap multiset. Every feature
// keeps its own value-sorted position list; a node owns the same range
// [begin, end) in each list, and splitting stably partitions that range.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& m, std::span<const std::size_t> rows,
              std::span<const std::size_t> features, const TreeParams& params,
              const std::vector<std::vector<std::uint32_t>>* global_order)
      : params_(params), features_(features.begin(), features.end()) {
    const std::size_t n = rows.size();
    labels_.resize(n);
    for (std::size_t p = 0; p < n; ++p) labels_[p] = m.label(rows[p]) != 0;
    values_.assign(features_.size(), std::vector<double>(n));
    for (std::size_t f = 0; f < features_.size(); ++f) {
      for (std::size_t p = 0; p < n; ++p) values_[f][p] = m.At(rows[p], features_[f]);
    }
    order_.resize(features_.size());
    if (global_order != nullptr && std::is_sorted(rows.begin(), rows.end())) {
      // rows ascending: the copies of row r occupy a contiguous position run.
      std::vector<std::uint32_t> first(m.rows(), 0), count(m.rows(), 0);
      for (std::size_t p = n; p-- > 0;) {
        first[rows[p]] = static_cast<std::uint32_t>(p);
        ++count[rows[p]];
      }
      for (std::size_t f = 0; f < features_.size(); ++f) {
        auto& out = order_[f];
        out.reserve(n);
        for (std::uint32_t r : (*global_order)[features_[f]]) {
          for (std::uint32_t k = 0; k < count[r]; ++k) out.push_back(first[r] + k);
        }
      }
    } else {
      for (std::size_t f = 0; f < features_.size(); ++f) {
        auto& out = order_[f];
        out.resize(n);
        std::iota(out.begin(), out.end(), 0u);
        const auto& v = values_[f];
        std::stable_sort(out.begin(), out.end(),
                         [&v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
      }
    }
    goes_left_.resize(n);
    scratch_.resize(n);
  }

  std::optional<Split> BestSplit(std::size_t begin, std::size_t end) const {
    const std::size_t total = end - begin;
    std::size_t total_mal = 0;
    for (std::size_t i = begin; i < end; ++i) total_mal += labels_[order_[0][i]];
    const std::array<std::size_t, 2> counts{total - total_mal, total_mal};
    const double parent = Impurity(counts, params_.criterion);
    const std::size_t min_leaf = std::max<std::size_t>(params_.min_samples_leaf, 1);

    std::optional<Split> best;
    for (std::size_t f = 0; f < features_.size(); ++f) {
      const auto& ord = order_[f];
      const auto& v = values_[f];
      std::size_t left_mal = 0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left_mal += labels_[ord[i]];
        const double lo = v[ord[i]];
        const double hi = v[ord[i + 1]];
        if (!(lo < hi)) continue;
        const std::size_t left_n = i + 1 - begin;
        if (left_n < min_leaf || total - left_n < min_leaf) continue;
        const double gain = WeightedGain(parent, left_mal, left_n, total_mal,
                                         total, params_.criterion);
        if (!best || gain > best->gain + kGainTieEpsilon) {
          best = Split{features_[f], Midpoint(lo, hi), gain};
        }
      }
    }
    return best;
  }

  DecisionTree Build() {
    DecisionTree tree;
    tree.criterion = params_.criterion;
    tree.feature_subset = features_;
    struct Task {
      std::size_t begin, end, depth;
      std::int32_t parent;  // node whose `right` should point here, or -1
    };
    std::vector<Task> stack{{0, labels_.size(), 0, -1}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      const auto index = static_cast<std::int32_t>(tree.nodes.size());
      if (t.parent >= 0) tree.nodes[static_cast<std::size_t>(t.parent)].right = index;

      std::size_t mal = 0;
      for (std::size_t i = t.begin; i < t.end; ++i) mal += labels_[order_[0][i]];
      const std::size_t n = t.end - t.begin;
      TreeNode node;
      node.sample_count = static_cast<std::uint32_t>(n);
      node.malicious_fraction = static_cast<double>(mal) / static_cast<double>(n);

      std::optional<Split> split;
      const bool pure = mal == 0 || mal == n;
      const bool depth_ok = params_.max_depth == 0 || t.depth < params_.max_depth;
      if (!pure && depth_ok && !features_.empty()) split = BestSplit(t.begin, t.end);
      if (!split) {
        tree.nodes.push_back(node);
        continue;
      }
      node.feature = static_cast<std::int32_t>(split->feature);
      node.threshold = split->threshold;
      tree.nodes.push_back(node);

      const std::size_t local =
          static_cast<std::size_t>(std::find(features_.begin(), features_.end(),
                                             split->feature) -
                                   features_.begin());
      for (std::size_t i = t.begin; i < t.end; ++i) {
        const std::uint32_t p = order_[local][i];
        goes_left_[p] = values_[local][p] <= split->threshold;
      }
      std::size_t mid = t.begin;
      for (auto& ord : order_) mid = Partition(ord, t.begin, t.end);
      stack.push_back({mid, t.end, t.depth + 1, index});
      stack.push_back({t.begin, mid, t.depth + 1, -1});
    }
    return tree;
  }

 private:
  std::size_t Partition(std::vector<std::uint32_t>& ord, std::size_t begin,
                        std::size_t end) {
    std::size_t out = begin, spill = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t p = ord[i];
      if (goes_left_[p]) {
        ord[out++] = p;
      } else {
        scratch_[spill++] = p;
      }
    }
    std::copy_n(scratch_.begin(), spill, ord.begin() + static_cast<std::ptrdiff_t>(out));
    return out;
  }

  TreeParams params_;
  std::vector<std::size_t> features_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
};

std::vector<std::size_t> SortedFeatures(std::span<const std::size_t> features,
                                        std::size_t width) {
  std::vector<std::size_t> out(features.begin(), features.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (std::size_t f : out) {
    if (f >= width) throw Error(ErrorCode::kInvalidParameters, "feature index out of range");
  }
  return out;
}

}  // namespace

std::optional<Split> FindBestSplit(const FeatureMatrix& m,
                                   std::span<const std::size_t> rows,
                                   std::span<const std::size_t> features,
                                   Criterion criterion,
                                   std::size_t min_samples_leaf) {
  if (rows.empty()) throw Error(ErrorCode::kDegenerateData, "no rows to split");
  const auto feats = SortedFeatures(features, m.width());
  if (feats.empty()) return std::nullopt;
  TreeParams params{criterion, 0, min_samples_leaf};
  TreeBuilder builder(m, rows, feats, params, nullptr);
  return builder.BestSplit(0, rows.size());
}

DecisionTree TrainTree(const FeatureMatrix& m, std::span<const std::size_t> rows,
                       std::span<const std::size_t> features,
                       const TreeParams& params) {
  if (rows.empty()) throw Error(ErrorCode::kDegenerateData, "no training rows");
  const auto feats = SortedFeatures(features, m.width());
  TreeBuilder builder(m, rows, feats, params, nullptr);
  return builder.Build();
}

std::string TrainConfig::Describe() const {
  std::ostringstream os;
  os << "trees=" << tree_count << ";criteria=";
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    os << (i ? "," : "") << ToString(criteria[i]);
  }
  os << ";features=" << min_features_per_tree << ".." << max_features_per_tree
     << ";bootstrap=" << bootstrap << ";max_depth=" << max_depth
     << ";min_leaf=" << min_samples_leaf << ";seed=" << seed;
  return os.str();
}

void TrainConfig::Validate(std::size_t schema_width) const {
  if (tree_count == 0) throw Error(ErrorCode::kInvalidConfig, "tree_count must be positive");
  if (criteria.empty()) throw Error(ErrorCode::kInvalidConfig, "no split criteria");
  if (min_features_per_tree == 0 || min_features_per_tree > max_features_per_tree) {
    throw Error(ErrorCode::kInvalidConfig, "bad per-tree feature range");
  }
  if (max_features_per_tree > schema_width) {
    throw Error(ErrorCode::kInvalidConfig,
                "per-tree feature count exceeds schema width " +
                    std::to_string(schema_width));
  }
}

TrainConfig FanciConfig(std::uint64_t seed) {
  TrainConfig c;
  c.tree_count = 9;
  c.criteria = {Criterion::kGini,  Criterion::kGini,    Criterion::kGini,
                Criterion::kGini,  Criterion::kGini,    Criterion::kGini,
                Criterion::kGini,  Criterion::kEntropy, Criterion::kEntropy};
  c.min_features_per_tree = 2;
  c.max_features_per_tree = 18;
  c.seed = seed;
  return c;
}

TrainConfig BrfConfig(std::uint64_t seed, std::size_t schema_width) {
  TrainConfig c;
  c.tree_count = 100;
  c.criteria = {Criterion::kEntropy};
  c.min_features_per_tree = c.max_features_per_tree =
      std::min<std::size_t>(20, schema_width);
  c.seed = seed;
  return c;
}

ForestModel TrainForest(const FeatureMatrix& m, const TrainConfig& config) {
  config.Validate(m.width());
  if (m.empty()) throw Error(ErrorCode::kDegenerateData, "empty training matrix");
  const auto mal = static_cast<std::size_t>(
      std::count(m.labels().begin(), m.labels().end(), std::uint8_t{1}));
  if (mal == 0 || mal == m.rows()) {
    throw Error(ErrorCode::kSingleClassData, "training data holds a single class");
  }

  std::vector<std::vector<std::uint32_t>> global_order(m.width());
  for (std::size_t f = 0; f < m.width(); ++f) {
    auto& ord = global_order[f];
    ord.resize(m.rows());
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
      return m.At(a, f) < m.At(b, f);
    });
  }

  ForestModel model;
  model.schema = m.schema();
  model.train_config_digest = [&] {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(Fnv1a64(config.Describe())));
    return std::string(buf);
  }();

  std::vector<std::size_t> columns(m.width());
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  for (std::size_t t = 0; t < config.tree_count; ++t) {
    SplitMix64 rng(DeriveSeed(config.seed, t));
    const std::size_t k = config.min_features_per_tree +
                          rng.Below(config.max_features_per_tree -
                                    config.min_features_per_tree + 1);
    std::vector<std::size_t> pool = columns;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + rng.Below(pool.size() - i)]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(subset.begin(), subset.end());

    std::vector<std::size_t> rows(m.rows());
    if (config.bootstrap) {
      for (auto& r : rows) r = rng.Below(m.rows());
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeParams params{config.criteria[t % config.criteria.size()], config.max_depth,
                      config.min_samples_leaf};
    TreeBuilder builder(m, rows, subset, params, &global_order);
    model.trees.push_back(builder.Build());
  }
  return model;
}

ForestModel TrainFanci(const FeatureMatrix& m, std::uint64_t seed) {
  return TrainForest(m, FanciConfig(seed));
}

ForestModel TrainBrf(const FeatureMatrix& m, std::uint64_t seed) {
  return TrainForest(m, BrfConfig(seed, m.width()));
}

double Score(const ForestModel& model, std::span<const double> row) {
  if (model.trees.empty()) throw Error(ErrorCode::kCorruptModel, "model has no trees");
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree.Predict(row);
  return sum / static_cast<double>(model.trees.size());
}

double Score(const ForestModel& model, const FeatureVector& fv) {
  if (fv.schema != model.schema ||
      fv.values.size() != FeatureSchema::Get(model.schema).width()) {
    throw Error(ErrorCode::kSchemaMismatch,
                "model expects " + std::string(ToString(model.schema)) +
                    " features, got " + std::string(ToString(fv.schema)));
  }
  return Score(model, std::span<const double>(fv.values));
}

std::vector<double> ScoreMatrix(const ForestModel& model, const FeatureMatrix& m) {
  if (m.schema() != model.schema) {
    throw Error(ErrorCode::kSchemaMismatch,
                "model expects " + std::string(ToString(model.schema)) +
                    " features, got " + std::string(ToString(m.schema())));
  }
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = Score(model, m.Row(i));
  return out;
}

namespace {

std::string HexFloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

[[noreturn]] void Corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptModel, what);
}

double ParseDouble(const std::string& s) {
  if (s.empty()) Corrupt("missing number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno == ERANGE || end != s.c_str() + s.size()) Corrupt("bad number '" + s + "'");
  return v;
}

std::uint64_t ParseUnsigned(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    Corrupt("bad count '" + s + "'");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) Corrupt("count out of range '" + s + "'");
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::vector<std::string> Next() {
    if (pos_ >= text_.size()) Corrupt("unexpected end of model");
    std::size_t nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    std::string line(text_.substr(pos_, nl - pos_));
    pos_ = nl + 1;
    std::vector<std::string> fields;
    std::istringstream is(line);
    for (std::string f; is >> f;) fields.push_back(f);
    if (fields.empty()) Corrupt("blank line in model");
    return fields;
  }

  bool AtEnd() const {
    return text_.find_first_not_of(" \t\r\n", pos_) == std::string_view::npos;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SerializeModel(const ForestModel& model) {
  std::ostringstream os;
  os << "DGALAB-FOREST " << kModelFormatVersion << "\n";
  os << "schema " << ToString(model.schema) << "\n";
  os << "digest " << (model.train_config_digest.empty() ? "-" : model.train_config_digest)
     << "\n";
  os << "trees " << model.trees.size() << "\n";
  for (const auto& tree : model.trees) {
    os << "tree " << ToString(tree.criterion) << " " << tree.nodes.size() << "\n";
    os << "features " << tree.feature_subset.size();
    for (std::size_t f : tree.feature_subset) os << " " << f;
    os << "\n";
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) {
        os << "L " << HexFloat(n.malicious_fraction) << " " << n.sample_count << "\n";
      } else {
        os << "I " << n.feature << " " << HexFloat(n.threshold) << " " << n.right << " "
           << HexFloat(n.malicious_fraction) << " " << n.sample_count << "\n";
      }
    }
  }
  os << "end\n";
  return os.str();
}

void SaveModel(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << SerializeModel(model);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

ForestModel ParseModel(std::string_view text) {
  LineReader in(text);
  auto header = in.Next();
  if (header.size() != 2 || header[0] != "DGALAB-FOREST") Corrupt("not a forest model");
  if (header[1] != std::to_string(kModelFormatVersion)) {
    throw Error(ErrorCode::kVersionMismatch,
                "model format version " + header[1] + ", expected " +
                    std::to_string(kModelFormatVersion));
  }
  ForestModel model;
  auto f = in.Next();
  if (f.size() != 2 || f[0] != "schema") Corrupt("missing schema line");
  try {
    model.schema = ParseSchemaName(f[1]);
  } catch (const Error&) {
    Corrupt("unknown schema '" + f[1] + "'");
  }
  const std::size_t width = FeatureSchema::Get(model.schema).width();
  f = in.Next();
  if (f.size() != 2 || f[0] != "digest") Corrupt("missing digest line");
  model.train_config_digest = f[1] == "-" ? "" : f[1];
  f = in.Next();
  if (f.size() != 2 || f[0] != "trees") Corrupt("missing tree count");
  const std::uint64_t tree_count = ParseUnsigned(f[1]);
  if (tree_count == 0) Corrupt("model has no trees");

  for (std::uint64_t t = 0; t < tree_count; ++t) {
    DecisionTree tree;
    f = in.Next();
    if (f.size() != 3 || f[0] != "tree") Corrupt("missing tree header");
    if (f[1] == "gini") {
      tree.criterion = Criterion::kGini;
    } else if (f[1] == "entropy") {
      tree.criterion = Criterion::kEntropy;
    } else {
      Corrupt("unknown criterion '" + f[1] + "'");
    }
    const std::uint64_t node_count = ParseUnsigned(f[2]);
    if (node_count == 0) Corrupt("empty tree");
    f = in.Next();
    if (f.size() < 2 || f[0] != "features" || ParseUnsigned(f[1]) != f.size() - 2) {
      Corrupt("bad feature subset line");
    }
    for (std::size_t i = 2; i < f.size(); ++i) {
      const std::uint64_t c = ParseUnsigned(f[i]);
      if (c >= width) Corrupt("feature index out of range");
      tree.feature_subset.push_back(c);
    }
    for (std::uint64_t i = 0; i < node_count; ++i) {
      f = in.Next();
      TreeNode n;
      if (f[0] == "L" && f.size() == 3) {
        n.malicious_fraction = ParseDouble(f[1]);
        n.sample_count = static_cast<std::uint32_t>(ParseUnsigned(f[2]));
      } else if (f[0] == "I" && f.size() == 6) {
        const std::uint64_t col = ParseUnsigned(f[1]);
        const std::uint64_t right = ParseUnsigned(f[3]);
        if (col >= width) Corrupt("split column out of range");
        if (right <= i + 1 || right >= node_count) Corrupt("bad child index");
        n.feature = static_cast<std::int32_t>(col);
        n.threshold = ParseDouble(f[2]);
        n.right = static_cast<std::int32_t>(right);
        n.malicious_fraction = ParseDouble(f[4]);
        n.sample_count = static_cast<std::uint32_t>(ParseUnsigned(f[5]));
      } else {
        Corrupt("bad node line");
      }
      tree.nodes.push_back(n);
    }
    if (!tree.nodes.back().is_leaf()) Corrupt("tree ends in an internal node");
    model.trees.push_back(std::move(tree));
  }
  f = in.Next();
  if (f.size() != 1 || f[0] != "end") Corrupt("missing end marker");
  if (!in.AtEnd()) Corrupt("trailing data after end marker");
  return model;
}

ForestModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseModel(buf.str());
}

}  // namespace dgalab
