#ifndef DGALAB_CHARBOT_H_
#define DGALAB_CHARBOT_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dgalab/dataset.h"
#include "dgalab/domain.h"
#include "dgalab/error.h"
#include "dgalab/rng.h"

namespace dgalab {

using BigInt = boost::multiprecision::cpp_int;

// The 22 TLDs CharBot appends by default, in the published order.
const std::vector<std::string>& DefaultCharbotTlds();

// a-z, 0-9, '-'.
inline constexpr std::string_view kDnsAlphabet =
    "abcdefghijklmnopqrstuvwxyz0123456789-";

enum class EditOp { kSubstitute, kInsert, kDelete };

struct CharbotConfig {
  std::vector<std::string> tld_list = DefaultCharbotTlds();
  std::size_t replacement_count = 2;
  std::string alphabet{kDnsAlphabet};
  // Insertions and deletions are off by default; with either enabled each of
  // the `replacement_count` edits picks its operation uniformly.
  bool allow_insertions = false;
  bool allow_deletions = false;

  // Throws Error(kInvalidConfig).
  void Validate() const;
};

// One generated domain with full provenance.
struct PerturbationRecord {
  Domain source;
  Domain output;
  // Positions edited, in draw order. For substitutions these index the
  // source sld; for mixed edit scripts they index the working string at the
  // time of the edit.
  std::vector<std::size_t> indices;
  // Replacement character per index ('\0' for a deletion).
  std::string replacements;
  std::vector<EditOp> ops;
  std::uint64_t seed = 0;
};

// 64-bit FNV-1a of the ISO-8601 "YYYY-MM-DD" text.
// Throws Error(kInvalidDate).
std::uint64_t SeedFromDate(std::string_view iso_date);
std::uint64_t SeedFromDate(std::chrono::year_month_day date);

// Builds a record from explicit choices; the deterministic core of
// GenerateOne. Throws Error(kInvalidParameters) if the edit is not a valid
// substitution (duplicate or out-of-range index, replacement equal to the
// original character, or a resulting leading/trailing hyphen).
PerturbationRecord ApplySubstitutions(const Domain& source,
                                      std::span<const std::size_t> indices,
                                      std::string_view replacements,
                                      std::string_view tld);

// Builds a record from a mixed edit script applied left to right.
PerturbationRecord ApplyEditScript(const Domain& source,
                                   std::span<const EditOp> ops,
                                   std::span<const std::size_t> indices,
                                   std::string_view replacements,
                                   std::string_view tld);

namespace internal {

// Uniform over the alphabet, re-drawn until it differs from `original`.
// At the first or last position a hyphen is re-drawn from the alphabet
// without '-'.
template <typename Rng>
char DrawReplacement(const CharbotConfig& cfg, char original, bool at_edge,
                     Rng& rng) {
  const std::string& a = cfg.alphabet;
  char c;
  do {
    c = a[rng.Below(a.size())];
  } while (c == original);
  if (at_edge && c == '-') {
    std::string no_hyphen;
    for (char x : a) {
      if (x != '-' && x != original) no_hyphen.push_back(x);
    }
    if (no_hyphen.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "alphabet has no usable edge replacement");
    }
    c = no_hyphen[rng.Below(no_hyphen.size())];
  }
  return c;
}

template <typename Rng>
PerturbationRecord GenerateWithEditScript(const CharbotConfig& cfg,
                                          const Domain& source, Rng& rng) {
  std::vector<EditOp> enabled{EditOp::kSubstitute};
  if (cfg.allow_insertions) enabled.push_back(EditOp::kInsert);
  if (cfg.allow_deletions) enabled.push_back(EditOp::kDelete);
  std::string work = source.sld();
  std::vector<EditOp> ops;
  std::vector<std::size_t> indices;
  std::string replacements;
  for (std::size_t e = 0; e < cfg.replacement_count; ++e) {
    EditOp op = enabled[rng.Below(enabled.size())];
    if (op == EditOp::kDelete && work.size() <= 1) op = EditOp::kSubstitute;
    std::size_t pos = 0;
    char c = '\0';
    switch (op) {
      case EditOp::kSubstitute:
        pos = rng.Below(work.size());
        c = DrawReplacement(cfg, work[pos], pos == 0 || pos + 1 == work.size(),
                            rng);
        work[pos] = c;
        break;
      case EditOp::kInsert:
        pos = rng.Below(work.size() + 1);
        c = DrawReplacement(cfg, '\0', pos == 0 || pos == work.size(), rng);
        work.insert(work.begin() + static_cast<std::ptrdiff_t>(pos), c);
        break;
      case EditOp::kDelete: {
        pos = rng.Below(work.size());
        std::string trial = work;
        trial.erase(pos, 1);
        if (IsValidSld(trial)) {
          work = std::move(trial);
          break;
        }
        // Deleting here would expose a hyphen; substitute instead.
        op = EditOp::kSubstitute;
        c = DrawReplacement(cfg, work[pos], pos == 0 || pos + 1 == work.size(),
                            rng);
        work[pos] = c;
        break;
      }
    }
    ops.push_back(op);
    indices.push_back(pos);
    replacements.push_back(c);
  }
  const std::string& tld = cfg.tld_list[rng.Below(cfg.tld_list.size())];
  return ApplyEditScript(source, ops, indices, replacements, tld);
}

}  // namespace internal

// Draw order: source, k distinct positions (partial Fisher-Yates),
// a replacement per position, then the TLD.
// Throws Error(kSourceTooShort), Error(kInvalidConfig).
template <typename Rng>
PerturbationRecord GenerateOne(const CharbotConfig& cfg,
                               std::span<const Domain> sources, Rng& rng) {
  if (sources.empty()) {
    throw Error(ErrorCode::kInvalidParameters, "no source domains");
  }
  const Domain& source = sources[rng.Below(sources.size())];
  const std::string& sld = source.sld();
  const std::size_t k = cfg.replacement_count;
  if (sld.size() < k) {
    throw Error(ErrorCode::kSourceTooShort,
                "sld '" + sld + "' shorter than the edit count");
  }
  if (cfg.allow_insertions || cfg.allow_deletions) {
    return internal::GenerateWithEditScript(cfg, source, rng);
  }
  std::vector<std::size_t> positions(sld.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  for (std::size_t t = 0; t < k; ++t) {
    std::swap(positions[t], positions[t + rng.Below(sld.size() - t)]);
  }
  positions.resize(k);
  std::string replacements;
  for (std::size_t p : positions) {
    const bool edge = p == 0 || p + 1 == sld.size();
    replacements.push_back(internal::DrawReplacement(cfg, sld[p], edge, rng));
  }
  const std::string& tld = cfg.tld_list[rng.Below(cfg.tld_list.size())];
  return ApplySubstitutions(source, positions, replacements, tld);
}

// Unique outputs, none equal to a source rendering; gives up after 100*n
// draws. Throws Error(kExhaustedAttempts).
std::vector<PerturbationRecord> GenerateBatch(const CharbotConfig& cfg,
                                              std::span<const Domain> sources,
                                              std::uint64_t seed,
                                              std::size_t n);

// Outputs as a malicious dataset tagged "charbot".
Dataset RecordsToDataset(std::span<const PerturbationRecord> records,
                         std::string name);

void WriteBatch(const std::filesystem::path& path,
                std::span<const PerturbationRecord> records);
// CSV "output,source,indices,replacements,seed"; indices ';'-joined.
void WriteProvenance(const std::filesystem::path& path,
                     std::span<const PerturbationRecord> records);

class RegistrationOracle {
 public:
  virtual ~RegistrationOracle() = default;
  virtual bool IsRegistered(const Domain& domain) const = 0;
};

// Backed by a file of known-registered domains, one per line.
class SortedFileOracle : public RegistrationOracle {
 public:
  explicit SortedFileOracle(const std::filesystem::path& path);
  explicit SortedFileOracle(std::vector<std::string> registered);

  bool IsRegistered(const Domain& domain) const override;
  std::size_t size() const { return registered_.size(); }

 private:
  std::vector<std::string> registered_;
};

class AdversarialCost {
 public:
  static AdversarialCost Infinite() { return AdversarialCost(true, 0); }
  static AdversarialCost Finite(std::size_t v) {
    return AdversarialCost(false, v);
  }

  bool is_infinite() const { return infinite_; }
  // Meaningless when infinite.
  std::size_t value() const { return value_; }

  friend bool operator==(const AdversarialCost&,
                         const AdversarialCost&) = default;

 private:
  AdversarialCost(bool infinite, std::size_t value)
      : infinite_(infinite), value_(value) {}
  bool infinite_;
  std::size_t value_;
};

// Infinite when the perturbed domain is registered, otherwise the edit
// distance between renderings. Oracle failures become
// Error(kOracleUnavailable).
AdversarialCost ComputeAdversarialCost(const Domain& original,
                                       const Domain& perturbed,
                                       const RegistrationOracle& oracle);

// n * C(l, k) * (m - 1)^k exactly. Throws Error(kInvalidParameters) unless
// k <= l and m >= 2.
BigInt CandidateSpaceSize(std::uint64_t n, std::uint64_t l, std::uint64_t m,
                          std::uint64_t k);

BigInt Binomial(std::uint64_t n, std::uint64_t k);

}  // namespace dgalab

#endif  // DGALAB_CHARBOT_H_
