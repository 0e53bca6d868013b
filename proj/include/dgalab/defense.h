#ifndef DGALAB_DEFENSE_H_
#define DGALAB_DEFENSE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgalab/charbot.h"
#include "dgalab/domain.h"

namespace dgalab {

inline constexpr std::uint64_t kDefaultFilterBudgetBytes = 1ULL << 30;
inline constexpr double kDefaultFilterFpr = 0.001;

struct FilterOptions {
  std::size_t edits = 2;
  std::string alphabet{kDnsAlphabet};
  double target_fpr = kDefaultFilterFpr;
  std::uint64_t memory_budget_bytes = kDefaultFilterBudgetBytes;
  // Also insert variants with fewer than `edits` substitutions.
  bool up_to_edits = false;
  // Also insert each unmodified source sld.
  bool include_original = false;
};

struct FilterBuildPlan {
  std::size_t source_count = 0;
  double mean_length = 0.0;
  std::size_t alphabet_size = 0;
  std::size_t edits = 0;
  BigInt predicted_insertions;
  double target_fpr = 0.0;
  std::uint64_t bits = 0;
  std::uint32_t hash_count = 0;
  std::uint64_t memory_budget_bytes = 0;
  // Set when the predicted insertions overflow 64 bits or the bit array is
  // beyond the budget.
  bool feasible = false;

  std::uint64_t bytes() const { return (bits + 7) / 8; }
  std::string Summary() const;
};

// Bloom sizing for `insertions` elements: bits = ceil(-N ln p / ln(2)^2),
// hashes = ceil(bits / N * ln 2).
std::pair<BigInt, std::uint32_t> BloomSizing(const BigInt& insertions, double fpr);

// Exact count of what BuildFilter inserts for `sources`; with every sld
// character inside the alphabet this is sum of C(|sld|, k) (m-1)^k. Never
// throws for an oversized plan; see `feasible`. Throws
// Error(kInvalidParameters) for bad options or an sld shorter than k.
FilterBuildPlan EstimatePlan(std::span<const Domain> sources, const FilterOptions& opts);
// From summary statistics: n * C(l, k) * (m-1)^k insertions.
FilterBuildPlan EstimatePlan(std::uint64_t n, std::uint64_t mean_length,
                             std::uint64_t alphabet_size, std::uint64_t k,
                             double target_fpr,
                             std::uint64_t budget_bytes = kDefaultFilterBudgetBytes);
// EstimatePlan, but throws Error(kInfeasiblePlan) naming the predicted
// insertions when the plan does not fit.
FilterBuildPlan PlanFilter(std::span<const Domain> sources, const FilterOptions& opts);

enum class CheckResult { kHit, kMiss };

inline constexpr int kFilterFormatVersion = 1;

class TyposquatFilter {
 public:
  TyposquatFilter() = default;
  TyposquatFilter(std::uint64_t bits, std::uint32_t hash_count);

  void Insert(std::string_view sld);
  bool MayContain(std::string_view sld) const;
  CheckResult Check(const Domain& d) const {
    return MayContain(d.sld()) ? CheckResult::kHit : CheckResult::kMiss;
  }

  std::uint64_t bits() const { return bits_; }
  std::uint32_t hash_count() const { return hash_count_; }
  std::uint64_t inserted() const { return inserted_; }
  std::size_t edits() const { return edits_; }
  std::uint64_t source_digest() const { return source_digest_; }
  std::uint64_t alphabet_digest() const { return alphabet_digest_; }
  std::size_t PopCount() const;

  // Binary layout in docs/formats.md. Throws Error(kIo).
  void Save(const std::filesystem::path& path) const;
  // Throws Error(kIo), Error(kVersionMismatch), Error(kCorruptModel).
  static TyposquatFilter Load(const std::filesystem::path& path);

  friend bool operator==(const TyposquatFilter&, const TyposquatFilter&) = default;

 private:
  friend TyposquatFilter BuildFilter(std::span<const Domain>, const FilterOptions&,
                                     const FilterBuildPlan&);

  std::uint64_t bits_ = 0;
  std::uint32_t hash_count_ = 0;
  std::uint64_t inserted_ = 0;
  std::size_t edits_ = 0;
  std::uint64_t source_digest_ = 0;
  std::uint64_t alphabet_digest_ = 0;
  std::vector<std::uint64_t> words_;
};

// Inserts every sld reachable by exactly `edits` substitutions from a source
// (see FilterOptions for the wider variants). Throws Error(kInfeasiblePlan)
// for an infeasible plan.
TyposquatFilter BuildFilter(std::span<const Domain> sources, const FilterOptions& opts,
                            const FilterBuildPlan& plan);
TyposquatFilter BuildFilter(std::span<const Domain> sources, const FilterOptions& opts);

// Calls `visit` with each variant BuildFilter would insert, in order.
template <typename Visit>
void EnumerateVariants(std::string_view sld, std::string_view alphabet, std::size_t edits,
                       Visit&& visit);

struct NearMatch {
  std::size_t index;
  Domain source;
  std::size_t distance;
};

// First source (lowest index) whose sld is within max_edit edits of d's sld.
std::optional<NearMatch> NearMatchScan(const Domain& d, std::span<const Domain> sources,
                                       std::size_t max_edit);

std::uint64_t SourceDigest(std::span<const Domain> sources);

template <typename Visit>
void EnumerateVariants(std::string_view sld, std::string_view alphabet, std::size_t edits,
                       Visit&& visit) {
  const std::size_t len = sld.size();
  if (edits > len) return;
  std::string work(sld);
  std::vector<std::size_t> pos(edits);
  for (std::size_t i = 0; i < edits; ++i) pos[i] = i;
  // Per-position replacement lists, skipping the original character.
  std::vector<std::string> choices(len);
  for (std::size_t i = 0; i < len; ++i) {
    for (char c : alphabet) {
      if (c != sld[i]) choices[i].push_back(c);
    }
  }
  std::vector<std::size_t> digit(edits);
  while (true) {
    bool empty = false;
    for (std::size_t i = 0; i < edits; ++i) empty |= choices[pos[i]].empty();
    if (!empty) {
      std::fill(digit.begin(), digit.end(), 0);
      while (true) {
        for (std::size_t i = 0; i < edits; ++i) work[pos[i]] = choices[pos[i]][digit[i]];
        visit(std::string_view(work));
        std::size_t j = edits;
        while (j > 0) {
          --j;
          if (++digit[j] < choices[pos[j]].size()) break;
          digit[j] = 0;
          if (j == 0) {
            j = edits + 1;
            break;
          }
        }
        if (edits == 0 || j == edits + 1) break;
      }
      for (std::size_t i = 0; i < edits; ++i) work[pos[i]] = sld[pos[i]];
    }
    // Next combination in lexicographic order.
    std::size_t i = edits;
    while (i > 0 && pos[i - 1] == len - edits + i - 1) --i;
    if (i == 0) return;
    ++pos[i - 1];
    for (std::size_t j = i; j < edits; ++j) pos[j] = pos[j - 1] + 1;
  }
}

}  // namespace dgalab

#endif  // DGALAB_DEFENSE_H_
