#ifndef DGALAB_FEATURES_H_
#define DGALAB_FEATURES_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dgalab/dataset.h"
#include "dgalab/domain.h"

namespace dgalab {

enum class SchemaName { kFanci, kBrf, kFull };

std::string_view ToString(SchemaName name);
// Case-insensitive "fanci" / "brf" / "full". Throws Error(kInvalidParameters).
SchemaName ParseSchemaName(std::string_view text);

struct FeatureColumn {
  int feature_id;  // row of the lexical feature catalogue, 1..40
  std::string name;
};

// Fixed, ordered column layout. FULL lists all 45 columns (feature 26 spans
// six); FANCI and BRF are ordered subsequences of it.
class FeatureSchema {
 public:
  static const FeatureSchema& Get(SchemaName name);

  SchemaName name() const { return name_; }
  const std::vector<FeatureColumn>& columns() const { return columns_; }
  std::size_t width() const { return columns_.size(); }
  // Positions of this schema's columns inside the FULL layout.
  const std::vector<std::size_t>& full_index() const { return full_index_; }
  bool needs_ngram_tables() const { return needs_tables_; }

 private:
  FeatureSchema(SchemaName name, std::vector<int> feature_ids);

  SchemaName name_;
  std::vector<FeatureColumn> columns_;
  std::vector<std::size_t> full_index_;
  bool needs_tables_ = false;
};

class NgramTable {
 public:
  NgramTable() = default;
  NgramTable(int n, std::map<std::string, double, std::less<>> entries,
             double default_frequency);

  int n() const { return n_; }
  double default_frequency() const { return default_frequency_; }
  const std::map<std::string, double, std::less<>>& entries() const {
    return entries_;
  }
  double Lookup(std::string_view gram) const;

  // "#n=<n> default=<f>" header, then "ngram<TAB>frequency" lines.
  void Save(const std::filesystem::path& path) const;
  static NgramTable Load(const std::filesystem::path& path);

  friend bool operator==(const NgramTable&, const NgramTable&) = default;

 private:
  int n_ = 0;
  std::map<std::string, double, std::less<>> entries_;
  double default_frequency_ = 0.0;
};

struct NgramTables {
  NgramTable bigram;
  NgramTable trigram;

  void Save(const std::filesystem::path& dir) const;
  static NgramTables Load(const std::filesystem::path& dir);
};

// Relative frequencies of contiguous n-grams over the slds of `benign`;
// unseen n-grams get half the smallest observed frequency.
// Throws Error(kEmptyDataset), Error(kInvalidParameters) for n not in {2,3}.
NgramTable BuildNgramTable(const Dataset& benign, int n);
NgramTables BuildNgramTables(const Dataset& benign);

struct TldContext {
  std::unordered_set<std::string> valid_tlds;
  std::unordered_set<std::string> malicious_tlds;

  // One TLD per line, '#' comments. Throws Error(kIo).
  static TldContext Load(const std::filesystem::path& valid_path,
                         const std::filesystem::path& malicious_path);
  bool IsValid(std::string_view tld) const;
  bool IsMalicious(std::string_view tld) const;
};

// Character-distribution statistics. All throw Error(kEmptyString).
double Entropy(std::string_view s);
double GiniIndex(std::string_view s);
double ClassificationError(std::string_view s);

// Median frequency of the string's n-grams (mean of the middle pair for an
// even count). Circular mode also wraps around using the first n-1
// characters. Throws Error(kStringTooShort).
double NgramMedian(std::string_view s, const NgramTable& table, bool circular);

struct FeatureVector {
  SchemaName schema;
  std::vector<double> values;
};

// `tables` may be null for schemas that do not need n-gram tables.
// Throws Error(kFeatureExtraction) naming the failing column.
FeatureVector Extract(const Domain& d, const FeatureSchema& schema,
                      const NgramTables* tables, const TldContext& tld_ctx);

}  // namespace dgalab

#endif  // DGALAB_FEATURES_H_
