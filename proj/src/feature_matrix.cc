#include "dgalab/feature_matrix.h"

#include <cstdio>
#include <fstream>
#include <optional>

#include "dgalab/error.h"
#include "text_util.h"

namespace dgalab {

void FeatureMatrix::AddRow(std::span<const double> values, int label,
                           std::string domain, std::string source_tag) {
  if (values.size() != width_) {
    throw Error(ErrorCode::kSchemaMismatch,
                "row width " + std::to_string(values.size()) + " != " +
                    std::to_string(width_));
  }
  values_.insert(values_.end(), values.begin(), values.end());
  labels_.push_back(static_cast<std::uint8_t>(label));
  domains_.push_back(std::move(domain));
  tags_.push_back(std::move(source_tag));
}

void FeatureMatrix::Append(const FeatureMatrix& other) {
  if (other.schema_ != schema_) {
    throw Error(ErrorCode::kSchemaMismatch, "cannot append across schemas");
  }
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
  domains_.insert(domains_.end(), other.domains_.begin(), other.domains_.end());
  tags_.insert(tags_.end(), other.tags_.begin(), other.tags_.end());
}

void FeatureMatrix::Save(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  std::fputs("domain", f);
  for (const auto& c : FeatureSchema::Get(schema_).columns()) {
    std::fprintf(f, ",%s", c.name.c_str());
  }
  std::fputs(",label,source_tag\n", f);
  for (std::size_t r = 0; r < rows(); ++r) {
    std::fputs(domains_[r].c_str(), f);
    for (double x : Row(r)) std::fprintf(f, ",%.17g", x);
    std::fprintf(f, ",%d,%s\n", labels_[r], tags_[r].c_str());
  }
  if (std::fclose(f) != 0) {
    throw Error(ErrorCode::kIo, "write failed " + path.string());
  }
}

FeatureMatrix FeatureMatrix::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kIo, "empty matrix file " + path.string());
  }
  const auto header = internal::Split(internal::Trim(line), ',');
  if (header.size() < 3 || header.front() != "domain" ||
      header[header.size() - 2] != "label" || header.back() != "source_tag") {
    throw Error(ErrorCode::kSchemaMismatch, "unrecognized matrix header");
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i + 2 < header.size(); ++i) {
    names.emplace_back(header[i]);
  }
  std::optional<SchemaName> schema;
  for (SchemaName s : {SchemaName::kFanci, SchemaName::kBrf, SchemaName::kFull}) {
    const auto& cols = FeatureSchema::Get(s).columns();
    if (cols.size() != names.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < cols.size() && same; ++i) {
      same = cols[i].name == names[i];
    }
    if (same) schema = s;
  }
  if (!schema) {
    throw Error(ErrorCode::kSchemaMismatch,
                "matrix columns match no known schema");
  }
  FeatureMatrix m(*schema);
  std::vector<double> row(m.width());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (internal::Trim(line).empty()) continue;
    const auto fields = internal::Split(internal::Trim(line), ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) +
                                      ": wrong field count");
    }
    for (std::size_t i = 0; i < m.width(); ++i) {
      row[i] = std::strtod(std::string(fields[i + 1]).c_str(), nullptr);
    }
    const auto label_text = fields[fields.size() - 2];
    if (label_text != "0" && label_text != "1") {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) +
                                      ": label must be 0 or 1");
    }
    m.AddRow(row, label_text == "1" ? 1 : 0, std::string(fields.front()),
             std::string(fields.back()));
  }
  return m;
}

FeaturizeResult Featurize(const Dataset& ds, SchemaName schema,
                          const NgramTables* tables,
                          const TldContext& tld_ctx) {
  const auto& s = FeatureSchema::Get(schema);
  FeaturizeResult result{FeatureMatrix(schema), {}};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& e = ds.examples()[i];
    try {
      const auto fv = Extract(e.domain, s, tables, tld_ctx);
      result.matrix.AddRow(fv.values, static_cast<int>(e.label),
                           e.domain.Render(), e.source_tag);
    } catch (const Error& err) {
      result.errors.push_back({i, err.what()});
    }
  }
  return result;
}

}  // namespace dgalab
