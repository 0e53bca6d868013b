#ifndef DGALAB_DATASET_H_
#define DGALAB_DATASET_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dgalab/domain.h"

namespace dgalab {

enum class Label { kBenign = 0, kMalicious = 1 };

struct LabeledExample {
  Domain domain;
  Label label;
  std::string source_tag;
};

// Ordered, deduplicated on the rendered domain string.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::string name) : name_(std::move(name)) {}

  // Returns false (and drops the example) when its rendering is already
  // present. Throws Error(kInvalidParameters) on an empty source tag.
  bool Add(LabeledExample example);

  bool Contains(const std::string& rendered) const {
    return rendered_.contains(rendered);
  }

  const std::vector<LabeledExample>& examples() const { return examples_; }
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::size_t CountLabel(Label label) const;

  // Concatenation keeping first occurrences.
  static Dataset Merge(std::string name, std::span<const Dataset* const> parts);

 private:
  std::string name_;
  std::vector<LabeledExample> examples_;
  std::unordered_set<std::string> rendered_;
};

// Counters reported by the file loaders.
struct LoadStats {
  std::size_t lines = 0;
  std::size_t skipped_malformed = 0;
  std::size_t skipped_filtered = 0;
  std::size_t duplicates = 0;
};

// Reads "rank,domain" or bare "domain" lines, keeping file order. A first
// line whose first field is non-numeric is treated as a header. Keeps at
// most `limit` domains (0 = no limit) whose sld has min_sld_len characters.
// Throws Error(kIo), Error(kEmptyDataset).
Dataset LoadAlexa(const std::filesystem::path& path, std::size_t min_sld_len,
                  std::size_t limit, LoadStats* stats = nullptr);

// One domain per line, '#' comments. Throws Error(kIo), Error(kEmptyDataset).
Dataset LoadDomainList(const std::filesystem::path& path, Label label,
                       const std::string& source_tag,
                       LoadStats* stats = nullptr);

void WriteDomainList(const std::filesystem::path& path, const Dataset& ds);

enum class QueryResponse { kResolved, kNxDomain };

struct QueryLogRecord {
  std::string domain;
  std::chrono::sys_seconds timestamp;
  QueryResponse response;
};

// Parses an RFC 3339 timestamp ("2018-01-02T03:04:05Z", optional fraction,
// optional +hh:mm offset). Throws Error(kInvalidParameters).
std::chrono::sys_seconds ParseRfc3339(std::string_view text);

// CSV "domain,timestamp,response". Malformed rows are skipped and counted.
std::vector<QueryLogRecord> LoadQueryLog(const std::filesystem::path& path,
                                         LoadStats* stats = nullptr);

// Benign iff >= 2 resolved queries, no NXDOMAIN, and the calendar-day gap
// between first and last resolved query exceeds 30. Output is sorted by
// rendered domain so it does not depend on record order.
Dataset WeakLabel(std::span<const QueryLogRecord> records);

std::size_t OverlapCount(const Dataset& a, const Dataset& b);

// Stratified, seeded split. Throws Error(kInvalidParameters) for a fraction
// outside (0,1) and Error(kEmptyDataset) when either side would be empty.
std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& d,
                                           double train_fraction,
                                           std::uint64_t seed);

// Uniform-random-string DGA: sld length uniform in [min_len, max_len] over
// a-z0-9, TLD uniform from `tlds`. Used as the synthetic malicious class.
Dataset GenerateRandomDga(std::size_t n, std::uint64_t seed,
                          std::size_t min_len, std::size_t max_len,
                          std::span<const std::string> tlds);

}  // namespace dgalab

#endif  // DGALAB_DATASET_H_
