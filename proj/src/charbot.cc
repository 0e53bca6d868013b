#include "dgalab/charbot.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include "dgalab/hash.h"
#include "dgalab/levenshtein.h"
#include "text_util.h"

namespace dgalab {

const std::vector<std::string>& DefaultCharbotTlds() {
  static const std::vector<std::string> kTlds = {
      "com", "at", "uk",  "pl", "be", "biz", "co",   "jp",  "cz",  "de", "eu",
      "fr",  "info", "it", "ru", "lv", "me", "name", "net", "nz", "org", "us"};
  return kTlds;
}

void CharbotConfig::Validate() const {
  if (tld_list.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "empty TLD list");
  }
  for (const auto& t : tld_list) {
    if (!IsValidTld(t)) {
      throw Error(ErrorCode::kInvalidConfig, "invalid TLD '" + t + "'");
    }
  }
  if (replacement_count < 1) {
    throw Error(ErrorCode::kInvalidConfig, "replacement count must be >= 1");
  }
  if (alphabet.size() < 2) {
    throw Error(ErrorCode::kInvalidConfig, "alphabet needs >= 2 characters");
  }
  std::string sorted = alphabet;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kInvalidConfig, "duplicate alphabet character");
  }
  if (!std::all_of(alphabet.begin(), alphabet.end(), IsDnsChar)) {
    throw Error(ErrorCode::kInvalidConfig, "alphabet has non-DNS character");
  }
}

std::uint64_t SeedFromDate(std::chrono::year_month_day date) {
  if (!date.ok() || static_cast<int>(date.year()) < 1 ||
      static_cast<int>(date.year()) > 9999) {
    throw Error(ErrorCode::kInvalidDate, "invalid calendar date");
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u",
                static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return Fnv1a64(std::string_view(buf, 10));
}

std::uint64_t SeedFromDate(std::string_view iso_date) {
  auto fail = [&] {
    return Error(ErrorCode::kInvalidDate,
                 "expected YYYY-MM-DD, got '" + std::string(iso_date) + "'");
  };
  if (iso_date.size() != 10 || iso_date[4] != '-' || iso_date[7] != '-') {
    throw fail();
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    unsigned v = 0;
    const char* b = iso_date.data() + pos;
    auto [p, ec] = std::from_chars(b, b + len, v);
    if (ec != std::errc() || p != b + len) throw fail();
    return v;
  };
  const std::chrono::year_month_day ymd{
      std::chrono::year{static_cast<int>(num(0, 4))},
      std::chrono::month{num(5, 2)}, std::chrono::day{num(8, 2)}};
  if (!ymd.ok()) throw fail();
  return SeedFromDate(ymd);
}

PerturbationRecord ApplySubstitutions(const Domain& source,
                                      std::span<const std::size_t> indices,
                                      std::string_view replacements,
                                      std::string_view tld) {
  if (indices.size() != replacements.size()) {
    throw Error(ErrorCode::kInvalidParameters,
                "indices and replacements differ in length");
  }
  std::string sld = source.sld();
  std::vector<bool> seen(sld.size(), false);
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const std::size_t p = indices[t];
    if (p >= sld.size() || seen[p]) {
      throw Error(ErrorCode::kInvalidParameters, "bad substitution index");
    }
    if (sld[p] == replacements[t]) {
      throw Error(ErrorCode::kInvalidParameters,
                  "replacement equals the original character");
    }
    seen[p] = true;
    sld[p] = replacements[t];
  }
  PerturbationRecord r{source, Domain(sld, tld),
                       std::vector<std::size_t>(indices.begin(), indices.end()),
                       std::string(replacements),
                       std::vector<EditOp>(indices.size(), EditOp::kSubstitute),
                       0};
  return r;
}

PerturbationRecord ApplyEditScript(const Domain& source,
                                   std::span<const EditOp> ops,
                                   std::span<const std::size_t> indices,
                                   std::string_view replacements,
                                   std::string_view tld) {
  if (ops.size() != indices.size() || ops.size() != replacements.size()) {
    throw Error(ErrorCode::kInvalidParameters, "edit script lengths differ");
  }
  std::string sld = source.sld();
  for (std::size_t t = 0; t < ops.size(); ++t) {
    const std::size_t p = indices[t];
    switch (ops[t]) {
      case EditOp::kSubstitute:
        if (p >= sld.size()) {
          throw Error(ErrorCode::kInvalidParameters, "bad edit index");
        }
        sld[p] = replacements[t];
        break;
      case EditOp::kInsert:
        if (p > sld.size()) {
          throw Error(ErrorCode::kInvalidParameters, "bad edit index");
        }
        sld.insert(sld.begin() + static_cast<std::ptrdiff_t>(p),
                   replacements[t]);
        break;
      case EditOp::kDelete:
        if (p >= sld.size()) {
          throw Error(ErrorCode::kInvalidParameters, "bad edit index");
        }
        sld.erase(p, 1);
        break;
    }
  }
  return PerturbationRecord{source,
                            Domain(sld, tld),
                            {indices.begin(), indices.end()},
                            std::string(replacements),
                            {ops.begin(), ops.end()},
                            0};
}

std::vector<PerturbationRecord> GenerateBatch(const CharbotConfig& cfg,
                                              std::span<const Domain> sources,
                                              std::uint64_t seed,
                                              std::size_t n) {
  cfg.Validate();
  if (n < 1) throw Error(ErrorCode::kInvalidParameters, "n must be >= 1");
  if (sources.empty()) {
    throw Error(ErrorCode::kInvalidParameters, "no source domains");
  }
  for (const auto& s : sources) {
    if (s.sld().size() < cfg.replacement_count) {
      throw Error(ErrorCode::kSourceTooShort,
                  "sld '" + s.sld() + "' shorter than the edit count");
    }
  }
  std::unordered_set<std::string> taken;
  taken.reserve(sources.size() + n);
  for (const auto& s : sources) taken.insert(s.Render());

  SplitMix64 rng(seed);
  std::vector<PerturbationRecord> out;
  out.reserve(n);
  const std::size_t max_attempts = 100 * n;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < n;
       ++attempt) {
    auto record = GenerateOne(cfg, sources, rng);
    if (!taken.insert(record.output.Render()).second) continue;
    record.seed = seed;
    out.push_back(std::move(record));
  }
  if (out.size() < n) {
    throw Error(ErrorCode::kExhaustedAttempts,
                "only " + std::to_string(out.size()) + " unique domains after " +
                    std::to_string(max_attempts) + " attempts");
  }
  return out;
}

Dataset RecordsToDataset(std::span<const PerturbationRecord> records,
                         std::string name) {
  Dataset ds(std::move(name));
  for (const auto& r : records) ds.Add({r.output, Label::kMalicious, "charbot"});
  return ds;
}

void WriteBatch(const std::filesystem::path& path,
                std::span<const PerturbationRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& r : records) out << r.output.Render() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed " + path.string());
}

void WriteProvenance(const std::filesystem::path& path,
                     std::span<const PerturbationRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "output,source,indices,replacements,seed\n";
  for (const auto& r : records) {
    out << r.output.Render() << ',' << r.source.Render() << ',';
    for (std::size_t i = 0; i < r.indices.size(); ++i) {
      if (i) out << ';';
      out << r.indices[i];
    }
    out << ',';
    for (std::size_t i = 0; i < r.replacements.size(); ++i) {
      // deletions carry no character
      if (r.replacements[i] != '\0') out << r.replacements[i];
      else out << '_';
    }
    out << ',' << r.seed << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed " + path.string());
}

SortedFileOracle::SortedFileOracle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    auto v = internal::Trim(line);
    if (v.empty() || v.front() == '#') continue;
    registered_.push_back(internal::Lower(v));
  }
  std::sort(registered_.begin(), registered_.end());
}

SortedFileOracle::SortedFileOracle(std::vector<std::string> registered)
    : registered_(std::move(registered)) {
  for (auto& r : registered_) r = internal::Lower(r);
  std::sort(registered_.begin(), registered_.end());
}

bool SortedFileOracle::IsRegistered(const Domain& domain) const {
  return std::binary_search(registered_.begin(), registered_.end(),
                            domain.Render());
}

AdversarialCost ComputeAdversarialCost(const Domain& original,
                                       const Domain& perturbed,
                                       const RegistrationOracle& oracle) {
  bool registered;
  try {
    registered = oracle.IsRegistered(perturbed);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kOracleUnavailable, e.what());
  }
  if (registered) return AdversarialCost::Infinite();
  return AdversarialCost::Finite(
      Levenshtein(original.Render(), perturbed.Render()));
}

BigInt Binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;  // exact: result is C(n-k+i, i) here
  }
  return result;
}

BigInt CandidateSpaceSize(std::uint64_t n, std::uint64_t l, std::uint64_t m,
                          std::uint64_t k) {
  if (k > l || m < 2) {
    throw Error(ErrorCode::kInvalidParameters,
                "candidate space needs k <= l and m >= 2");
  }
  return BigInt(n) * Binomial(l, k) *
         boost::multiprecision::pow(BigInt(m - 1), static_cast<unsigned>(k));
}

}  // namespace dgalab
