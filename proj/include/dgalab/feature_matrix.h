#ifndef DGALAB_FEATURE_MATRIX_H_
#define DGALAB_FEATURE_MATRIX_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dgalab/dataset.h"
#include "dgalab/features.h"

namespace dgalab {

// Row-major feature values plus per-row label and provenance.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(SchemaName schema)
      : schema_(schema), width_(FeatureSchema::Get(schema).width()) {}

  SchemaName schema() const { return schema_; }
  std::size_t width() const { return width_; }
  std::size_t rows() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> Row(std::size_t i) const {
    return {values_.data() + i * width_, width_};
  }
  double At(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  const std::string& domain(std::size_t i) const { return domains_[i]; }
  const std::string& source_tag(std::size_t i) const { return tags_[i]; }

  // Throws Error(kSchemaMismatch) on a width mismatch.
  void AddRow(std::span<const double> values, int label, std::string domain,
              std::string source_tag);

  // Rows of `other` appended; schemas must match.
  void Append(const FeatureMatrix& other);

  // CSV: "domain,<columns...>,label,source_tag". Values use %.17g so a
  // reload is bit-identical.
  void Save(const std::filesystem::path& path) const;
  // Infers the schema from the header. Throws Error(kIo),
  // Error(kSchemaMismatch).
  static FeatureMatrix Load(const std::filesystem::path& path);

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  SchemaName schema_ = SchemaName::kFull;
  std::size_t width_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::string> domains_;
  std::vector<std::string> tags_;
};

struct RowError {
  std::size_t row;
  std::string message;
};

struct FeaturizeResult {
  FeatureMatrix matrix;
  // Rows that could not be extracted; they are left out of `matrix`, which
  // otherwise keeps dataset order.
  std::vector<RowError> errors;
};

FeaturizeResult Featurize(const Dataset& ds, SchemaName schema,
                          const NgramTables* tables, const TldContext& tld_ctx);

}  // namespace dgalab

#endif  // DGALAB_FEATURE_MATRIX_H_
