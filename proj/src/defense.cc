#include "dgalab/defense.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "dgalab/error.h"
#include "dgalab/hash.h"
#include "dgalab/levenshtein.h"

namespace dgalab {

namespace {

// Second hash basis; any odd constant unrelated to the FNV basis works.
constexpr std::uint64_t kSecondBasis = 0x9e3779b97f4a7c15ULL;
constexpr char kFilterMagic[8] = {'D', 'G', 'A', 'B', 'L', 'O', 'O', 'M'};

void ValidateOptions(const FilterOptions& opts) {
  if (opts.alphabet.empty()) {
    throw Error(ErrorCode::kInvalidParameters, "empty filter alphabet");
  }
  if (!(opts.target_fpr > 0.0 && opts.target_fpr < 0.5)) {
    throw Error(ErrorCode::kInvalidParameters, "filter FPR must lie in (0, 0.5)");
  }
}

// Elementary symmetric polynomials e_0..e_k of the per-position choice
// counts; e_j is the number of exactly-j substitution variants.
std::vector<BigInt> VariantCounts(std::string_view sld, std::string_view alphabet,
                                  std::size_t k) {
  std::vector<BigInt> e(k + 1);
  e[0] = 1;
  for (char c : sld) {
    const auto choices = alphabet.size() - (alphabet.find(c) != std::string_view::npos);
    for (std::size_t j = std::min(k, sld.size()); j >= 1; --j) e[j] += e[j - 1] * choices;
  }
  return e;
}

void FinishPlan(FilterBuildPlan& plan) {
  if (plan.predicted_insertions <= 0) {
    throw Error(ErrorCode::kInvalidParameters, "plan inserts nothing");
  }
  const auto [bits, hashes] = BloomSizing(plan.predicted_insertions, plan.target_fpr);
  const BigInt budget_bits = BigInt(plan.memory_budget_bytes) * 8;
  plan.feasible = bits <= budget_bits &&
                  plan.predicted_insertions <= std::numeric_limits<std::uint64_t>::max();
  plan.bits = bits <= std::numeric_limits<std::uint64_t>::max()
                  ? bits.convert_to<std::uint64_t>()
                  : std::numeric_limits<std::uint64_t>::max();
  plan.hash_count = hashes;
}

}  // namespace

std::pair<BigInt, std::uint32_t> BloomSizing(const BigInt& insertions, double fpr) {
  const double n = insertions.convert_to<double>();
  const double ln2 = std::log(2.0);
  const double bits = std::ceil(-n * std::log(fpr) / (ln2 * ln2));
  BigInt big_bits(bits);
  if (big_bits < 8) big_bits = 8;
  const double h = std::ceil(big_bits.convert_to<double>() / n * ln2);
  return {big_bits, static_cast<std::uint32_t>(std::max(1.0, h))};
}

std::string FilterBuildPlan::Summary() const {
  std::ostringstream os;
  os << "sources=" << source_count << " mean_sld_length=" << mean_length
     << " alphabet=" << alphabet_size << " edits=" << edits
     << " predicted_insertions=" << predicted_insertions << " target_fpr=" << target_fpr
     << " bits=" << bits
     << " hashes=" << hash_count << " budget_bytes=" << memory_budget_bytes
     << (feasible ? " feasible" : " infeasible");
  return os.str();
}

FilterBuildPlan EstimatePlan(std::span<const Domain> sources, const FilterOptions& opts) {
  ValidateOptions(opts);
  if (sources.empty()) throw Error(ErrorCode::kEmptyDataset, "no filter sources");
  FilterBuildPlan plan;
  plan.source_count = sources.size();
  plan.alphabet_size = opts.alphabet.size();
  plan.edits = opts.edits;
  plan.target_fpr = opts.target_fpr;
  plan.memory_budget_bytes = opts.memory_budget_bytes;
  double total_len = 0;
  for (const auto& d : sources) {
    const std::string& s = d.sld();
    if (s.size() < opts.edits) {
      throw Error(ErrorCode::kSourceTooShort,
                  "source sld '" + s + "' is shorter than " + std::to_string(opts.edits));
    }
    total_len += static_cast<double>(s.size());
    const auto e = VariantCounts(s, opts.alphabet, opts.edits);
    if (opts.up_to_edits) {
      for (std::size_t j = 1; j <= opts.edits; ++j) plan.predicted_insertions += e[j];
      if (opts.edits == 0) plan.predicted_insertions += e[0];
    } else {
      plan.predicted_insertions += e[opts.edits];
    }
    if (opts.include_original) plan.predicted_insertions += 1;
  }
  plan.mean_length = total_len / static_cast<double>(sources.size());
  FinishPlan(plan);
  return plan;
}

FilterBuildPlan EstimatePlan(std::uint64_t n, std::uint64_t mean_length,
                             std::uint64_t alphabet_size, std::uint64_t k,
                             double target_fpr, std::uint64_t budget_bytes) {
  if (!(target_fpr > 0.0 && target_fpr < 0.5)) {
    throw Error(ErrorCode::kInvalidParameters, "filter FPR must lie in (0, 0.5)");
  }
  FilterBuildPlan plan;
  plan.source_count = n;
  plan.mean_length = static_cast<double>(mean_length);
  plan.alphabet_size = alphabet_size;
  plan.edits = k;
  plan.target_fpr = target_fpr;
  plan.memory_budget_bytes = budget_bytes;
  plan.predicted_insertions = CandidateSpaceSize(n, mean_length, alphabet_size, k);
  FinishPlan(plan);
  return plan;
}

FilterBuildPlan PlanFilter(std::span<const Domain> sources, const FilterOptions& opts) {
  FilterBuildPlan plan = EstimatePlan(sources, opts);
  if (!plan.feasible) {
    throw Error(ErrorCode::kInfeasiblePlan,
                "filter needs " + plan.predicted_insertions.str() + " insertions; " +
                    plan.Summary());
  }
  return plan;
}

TyposquatFilter::TyposquatFilter(std::uint64_t bits, std::uint32_t hash_count)
    : bits_(bits), hash_count_(hash_count), words_((bits + 63) / 64, 0) {
  if (bits < 8 || hash_count < 1) {
    throw Error(ErrorCode::kInvalidParameters, "filter needs >= 8 bits and >= 1 hash");
  }
}

void TyposquatFilter::Insert(std::string_view sld) {
  const std::uint64_t h1 = Fnv1a64(sld);
  const std::uint64_t h2 = Mix64(Fnv1a64(sld, kSecondBasis)) | 1;
  for (std::uint32_t i = 0; i < hash_count_; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % bits_;
    words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  }
  ++inserted_;
}

bool TyposquatFilter::MayContain(std::string_view sld) const {
  if (bits_ == 0) return false;
  const std::uint64_t h1 = Fnv1a64(sld);
  const std::uint64_t h2 = Mix64(Fnv1a64(sld, kSecondBasis)) | 1;
  for (std::uint32_t i = 0; i < hash_count_; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % bits_;
    if ((words_[bit >> 6] & (std::uint64_t{1} << (bit & 63))) == 0) return false;
  }
  return true;
}

std::size_t TyposquatFilter::PopCount() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

namespace {

void PutU64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t GetU64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw Error(ErrorCode::kCorruptModel, "truncated filter file");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

}  // namespace

void TyposquatFilter::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(kFilterMagic, sizeof kFilterMagic);
  PutU64(out, kFilterFormatVersion);
  PutU64(out, bits_);
  PutU64(out, hash_count_);
  PutU64(out, inserted_);
  PutU64(out, edits_);
  PutU64(out, source_digest_);
  PutU64(out, alphabet_digest_);
  for (std::uint64_t w : words_) PutU64(out, w);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

TyposquatFilter TyposquatFilter::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  char magic[sizeof kFilterMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kFilterMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::kCorruptModel, "not a filter file");
  }
  const std::uint64_t version = GetU64(in);
  if (version != kFilterFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "filter format version " + std::to_string(version));
  }
  const std::uint64_t bits = GetU64(in);
  const std::uint64_t hashes = GetU64(in);
  if (bits < 8 || hashes < 1 || hashes > 1024) {
    throw Error(ErrorCode::kCorruptModel, "bad filter header");
  }
  const std::uint64_t file_size = std::filesystem::file_size(path);
  // magic, seven header fields, then the bit words
  if (file_size != sizeof kFilterMagic + 7 * 8 + ((bits + 63) / 64) * 8) {
    throw Error(ErrorCode::kCorruptModel, "filter file size does not match its header");
  }
  TyposquatFilter f(bits, static_cast<std::uint32_t>(hashes));
  f.inserted_ = GetU64(in);
  f.edits_ = GetU64(in);
  f.source_digest_ = GetU64(in);
  f.alphabet_digest_ = GetU64(in);
  for (auto& w : f.words_) w = GetU64(in);
  return f;
}

std::uint64_t SourceDigest(std::span<const Domain> sources) {
  std::uint64_t h = kFnvOffsetBasis;
  for (const auto& d : sources) {
    h = Fnv1a64(d.sld(), h);
    h = Fnv1a64("\n", h);
  }
  return h;
}

TyposquatFilter BuildFilter(std::span<const Domain> sources, const FilterOptions& opts,
                            const FilterBuildPlan& plan) {
  if (!plan.feasible) {
    throw Error(ErrorCode::kInfeasiblePlan,
                "filter needs " + plan.predicted_insertions.str() + " insertions; " +
                    plan.Summary());
  }
  TyposquatFilter f(plan.bits, plan.hash_count);
  f.edits_ = opts.edits;
  f.source_digest_ = SourceDigest(sources);
  f.alphabet_digest_ = Fnv1a64(opts.alphabet);
  auto insert = [&f](std::string_view v) { f.Insert(v); };
  for (const auto& d : sources) {
    if (opts.up_to_edits && opts.edits > 0) {
      for (std::size_t j = 1; j <= opts.edits; ++j) {
        EnumerateVariants(d.sld(), opts.alphabet, j, insert);
      }
    } else {
      EnumerateVariants(d.sld(), opts.alphabet, opts.edits, insert);
    }
    if (opts.include_original) f.Insert(d.sld());
  }
  return f;
}

TyposquatFilter BuildFilter(std::span<const Domain> sources, const FilterOptions& opts) {
  return BuildFilter(sources, opts, PlanFilter(sources, opts));
}

std::optional<NearMatch> NearMatchScan(const Domain& d, std::span<const Domain> sources,
                                       std::size_t max_edit) {
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::size_t dist = BoundedLevenshtein(d.sld(), sources[i].sld(), max_edit);
    if (dist <= max_edit) return NearMatch{i, sources[i], dist};
  }
  return std::nullopt;
}

}  // namespace dgalab
