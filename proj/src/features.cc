#include "dgalab/features.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "dgalab/error.h"
#include "dgalab/hash.h"
#include "text_util.h"

namespace dgalab {

namespace {

// Full column layout: one entry per output column, in order.
const std::vector<FeatureColumn>& FullColumns() {
  static const std::vector<FeatureColumn> kColumns = {
      {1, "domain_length"},
      {2, "sld_length"},
      {3, "tld_length"},
      {4, "domain_unique_chars"},
      {5, "sld_unique_chars"},
      {6, "tld_unique_chars"},
      {7, "has_malicious_tld"},
      {8, "has_valid_tld"},
      {9, "tld_hash"},
      {10, "contains_digits"},
      {11, "starts_with_digit"},
      {12, "underscore_ratio"},
      {13, "symbol_ratio"},
      {14, "hex_ratio"},
      {15, "digit_ratio"},
      {16, "vowel_ratio"},
      {17, "consonant_ratio"},
      {18, "repeated_char_ratio"},
      {19, "consecutive_consonant_ratio"},
      {20, "consecutive_digit_ratio"},
      {21, "sld_token_count"},
      {22, "sld_digit_count"},
      {23, "entropy"},
      {24, "gini_index"},
      {25, "classification_error"},
      {26, "ngram1_count_mean"},
      {26, "ngram1_count_std"},
      {26, "ngram2_count_mean"},
      {26, "ngram2_count_std"},
      {26, "ngram3_count_mean"},
      {26, "ngram3_count_std"},
      {27, "bigram_median"},
      {28, "trigram_median"},
      {29, "bigram_circle_median"},
      {30, "trigram_circle_median"},
      {31, "subdomain_count"},
      {32, "subdomain_length_mean"},
      {33, "has_www_prefix"},
      {34, "has_single_char_subdomain"},
      {35, "is_exclusive_prefix_repetition"},
      {36, "has_tld_as_subdomain"},
      {37, "digit_subdomain_ratio"},
      {38, "hex_subdomain_ratio"},
      {39, "contains_ip_address"},
      {40, "alphabet_cardinality"},
  };
  return kColumns;
}

constexpr std::size_t kFullWidth = 45;
// FULL positions of the n-gram median columns (features 27-30).
constexpr std::size_t kBigramMedianCol = 31;
constexpr std::size_t kTrigramMedianCol = 32;
constexpr std::size_t kBigramCircleCol = 33;
constexpr std::size_t kTrigramCircleCol = 34;

bool IsVowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}
bool IsLetter(char c) { return c >= 'a' && c <= 'z'; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsConsonant(char c) { return IsLetter(c) && !IsVowel(c); }
bool IsHex(char c) { return IsDigit(c) || (c >= 'a' && c <= 'f'); }

std::array<std::size_t, 256> CharCounts(std::string_view s) {
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : s) ++counts[c];
  return counts;
}

std::size_t DistinctChars(std::string_view s) {
  const auto counts = CharCounts(s);
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(),
                    [](std::size_t c) { return c > 0; }));
}

template <typename Pred>
double Ratio(std::string_view s, Pred pred) {
  if (s.empty()) return 0.0;
  return static_cast<double>(std::count_if(s.begin(), s.end(), pred)) /
         static_cast<double>(s.size());
}

// Total length of maximal runs (length >= 2) of class members, over |s|.
template <typename Pred>
double RunRatio(std::string_view s, Pred pred) {
  if (s.empty()) return 0.0;
  std::size_t total = 0, run = 0;
  for (char c : s) {
    if (pred(c)) {
      ++run;
    } else {
      if (run >= 2) total += run;
      run = 0;
    }
  }
  if (run >= 2) total += run;
  return static_cast<double>(total) / static_cast<double>(s.size());
}

// Mean and population std of within-string n-gram occurrence counts.
std::pair<double, double> NgramCountStats(std::string_view s, std::size_t n) {
  if (s.size() < n) return {0.0, 0.0};
  std::unordered_map<std::string_view, std::size_t> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  double sum = 0.0;
  for (const auto& [g, c] : counts) sum += static_cast<double>(c);
  const double mean = sum / static_cast<double>(counts.size());
  double var = 0.0;
  for (const auto& [g, c] : counts) {
    const double d = static_cast<double>(c) - mean;
    var += d * d;
  }
  var /= static_cast<double>(counts.size());
  return {mean, std::sqrt(var)};
}

bool IsIpv4(std::string_view s) {
  const auto parts = internal::Split(s, '.');
  if (parts.size() != 4) return false;
  for (auto p : parts) {
    if (p.empty() || p.size() > 3) return false;
    if (!std::all_of(p.begin(), p.end(), IsDigit)) return false;
    if (std::stoi(std::string(p)) > 255) return false;
  }
  return true;
}

std::string LastLabel(std::string_view tld) {
  const auto dot = tld.rfind('.');
  return std::string(dot == std::string_view::npos ? tld : tld.substr(dot + 1));
}

std::unordered_set<std::string> LoadTldFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto v = internal::Trim(line);
    if (v.empty() || v.front() == '#') continue;
    if (v.front() == '.') v.remove_prefix(1);
    out.insert(internal::Lower(v));
  }
  return out;
}

}  // namespace

std::string_view ToString(SchemaName name) {
  switch (name) {
    case SchemaName::kFanci: return "FANCI";
    case SchemaName::kBrf: return "BRF";
    case SchemaName::kFull: return "FULL";
  }
  return "?";
}

SchemaName ParseSchemaName(std::string_view text) {
  const auto upper = internal::Upper(text);
  if (upper == "FANCI") return SchemaName::kFanci;
  if (upper == "BRF" || upper == "B-RF") return SchemaName::kBrf;
  if (upper == "FULL") return SchemaName::kFull;
  throw Error(ErrorCode::kInvalidParameters,
              "unknown schema '" + std::string(text) + "'");
}

FeatureSchema::FeatureSchema(SchemaName name, std::vector<int> feature_ids)
    : name_(name) {
  const auto& full = FullColumns();
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (std::find(feature_ids.begin(), feature_ids.end(),
                  full[i].feature_id) == feature_ids.end()) {
      continue;
    }
    columns_.push_back(full[i]);
    full_index_.push_back(i);
    if (full[i].feature_id >= 27 && full[i].feature_id <= 30) {
      needs_tables_ = true;
    }
  }
}

const FeatureSchema& FeatureSchema::Get(SchemaName name) {
  static const FeatureSchema kFanci(
      SchemaName::kFanci, {1, 8, 10, 12, 15, 16, 18, 19, 20, 23, 26, 31, 32, 33,
                           34, 35, 36, 37, 38, 39, 40});
  static const FeatureSchema kBrf(
      SchemaName::kBrf, {1, 2, 3, 4, 5, 6, 7, 9, 11, 13, 14, 15, 16,
                         17, 18, 19, 20, 21, 22, 23, 24, 25, 27, 28, 29, 30});
  static const FeatureSchema kFull = [] {
    std::vector<int> all;
    for (int i = 1; i <= 40; ++i) all.push_back(i);
    return FeatureSchema(SchemaName::kFull, all);
  }();
  switch (name) {
    case SchemaName::kFanci: return kFanci;
    case SchemaName::kBrf: return kBrf;
    case SchemaName::kFull: return kFull;
  }
  return kFull;
}

NgramTable::NgramTable(int n, std::map<std::string, double, std::less<>> entries,
                       double default_frequency)
    : n_(n), entries_(std::move(entries)), default_frequency_(default_frequency) {
  if (n_ < 1) throw Error(ErrorCode::kInvalidParameters, "n-gram size < 1");
  if (!(default_frequency_ >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameters, "negative default frequency");
  }
  for (const auto& [g, f] : entries_) {
    if (!(f >= 0.0) || g.size() != static_cast<std::size_t>(n_)) {
      throw Error(ErrorCode::kInvalidParameters, "bad n-gram entry '" + g + "'");
    }
  }
}

double NgramTable::Lookup(std::string_view gram) const {
  const auto it = entries_.find(gram);
  return it == entries_.end() ? default_frequency_ : it->second;
}

void NgramTable::Save(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  std::fprintf(f, "#n=%d default=%.17g\n", n_, default_frequency_);
  for (const auto& [g, freq] : entries_) {
    std::fprintf(f, "%s\t%.17g\n", g.c_str(), freq);
  }
  if (std::fclose(f) != 0) {
    throw Error(ErrorCode::kIo, "write failed " + path.string());
  }
}

NgramTable NgramTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kIo, "empty n-gram table " + path.string());
  }
  int n = 0;
  double def = 0.0;
  if (std::sscanf(line.c_str(), "#n=%d default=%lf", &n, &def) != 2) {
    throw Error(ErrorCode::kIo, "bad n-gram table header in " + path.string());
  }
  std::map<std::string, double, std::less<>> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kIo, "bad n-gram line in " + path.string());
    }
    entries.emplace(line.substr(0, tab), std::strtod(line.c_str() + tab + 1, nullptr));
  }
  return NgramTable(n, std::move(entries), def);
}

void NgramTables::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  bigram.Save(dir / "bigram.tsv");
  trigram.Save(dir / "trigram.tsv");
}

NgramTables NgramTables::Load(const std::filesystem::path& dir) {
  return {NgramTable::Load(dir / "bigram.tsv"),
          NgramTable::Load(dir / "trigram.tsv")};
}

NgramTable BuildNgramTable(const Dataset& benign, int n) {
  if (n != 2 && n != 3) {
    throw Error(ErrorCode::kInvalidParameters, "n-gram tables support n=2,3");
  }
  if (benign.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no benign domains for n-grams");
  }
  const auto width = static_cast<std::size_t>(n);
  std::map<std::string, std::size_t, std::less<>> counts;
  std::size_t total = 0;
  for (const auto& e : benign.examples()) {
    const std::string& s = e.domain.sld();
    for (std::size_t i = 0; i + width <= s.size(); ++i) {
      ++counts[s.substr(i, width)];
      ++total;
    }
  }
  if (total == 0) {
    throw Error(ErrorCode::kEmptyDataset, "benign slds too short for n-grams");
  }
  std::map<std::string, double, std::less<>> freqs;
  double min_freq = 1.0;
  for (const auto& [g, c] : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    freqs.emplace(g, f);
    min_freq = std::min(min_freq, f);
  }
  return NgramTable(n, std::move(freqs), min_freq / 2.0);
}

NgramTables BuildNgramTables(const Dataset& benign) {
  return {BuildNgramTable(benign, 2), BuildNgramTable(benign, 3)};
}

TldContext TldContext::Load(const std::filesystem::path& valid_path,
                            const std::filesystem::path& malicious_path) {
  return {LoadTldFile(valid_path), LoadTldFile(malicious_path)};
}

bool TldContext::IsValid(std::string_view tld) const {
  return valid_tlds.contains(LastLabel(tld));
}

bool TldContext::IsMalicious(std::string_view tld) const {
  return malicious_tlds.contains(LastLabel(tld));
}

double Entropy(std::string_view s) {
  if (s.empty()) throw Error(ErrorCode::kEmptyString, "entropy of empty string");
  const auto counts = CharCounts(s);
  const double n = static_cast<double>(s.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;  // no negative zero
}

double GiniIndex(std::string_view s) {
  if (s.empty()) throw Error(ErrorCode::kEmptyString, "gini of empty string");
  const auto counts = CharCounts(s);
  const double n = static_cast<double>(s.size());
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / n;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double ClassificationError(std::string_view s) {
  if (s.empty()) {
    throw Error(ErrorCode::kEmptyString, "classification error of empty string");
  }
  const auto counts = CharCounts(s);
  const auto max = *std::max_element(counts.begin(), counts.end());
  return 1.0 - static_cast<double>(max) / static_cast<double>(s.size());
}

double NgramMedian(std::string_view s, const NgramTable& table, bool circular) {
  const auto n = static_cast<std::size_t>(table.n());
  if (circular ? s.empty() : s.size() < n) {
    throw Error(ErrorCode::kStringTooShort,
                "'" + std::string(s) + "' too short for " + std::to_string(n) +
                    "-grams");
  }
  std::vector<double> freqs;
  std::string gram(n, ' ');
  const std::size_t count = circular ? s.size() : s.size() - n + 1;
  freqs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < n; ++j) gram[j] = s[(i + j) % s.size()];
    freqs.push_back(table.Lookup(gram));
  }
  std::sort(freqs.begin(), freqs.end());
  const std::size_t mid = freqs.size() / 2;
  if (freqs.size() % 2 == 1) return freqs[mid];
  return (freqs[mid - 1] + freqs[mid]) / 2.0;
}

FeatureVector Extract(const Domain& d, const FeatureSchema& schema,
                      const NgramTables* tables, const TldContext& tld_ctx) {
  const std::string& sld = d.sld();
  const std::string& tld = d.tld();
  const std::string rendered = d.Render();
  std::string dot_free;
  for (char c : rendered) {
    if (c != '.') dot_free.push_back(c);
  }
  // For sld.tld inputs the public-suffix-free domain is the sld itself, and
  // its only label is the sld.
  const std::string& psf = sld;
  const std::vector<std::string_view> labels{psf};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::array<double, kFullWidth> v;
  v.fill(nan);
  auto b = [](bool x) { return x ? 1.0 : 0.0; };
  auto sz = [](std::size_t x) { return static_cast<double>(x); };

  v[0] = sz(rendered.size());
  v[1] = sz(sld.size());
  v[2] = sz(tld.size());
  v[3] = sz(DistinctChars(dot_free));
  v[4] = sz(DistinctChars(sld));
  v[5] = sz(DistinctChars(tld));
  v[6] = b(tld_ctx.IsMalicious(tld));
  v[7] = b(tld_ctx.IsValid(tld));
  v[8] = static_cast<double>(Fnv1a64(tld) >> 11) * 0x1.0p-53;
  v[9] = b(std::any_of(sld.begin(), sld.end(), IsDigit));
  v[10] = b(IsDigit(sld.front()));
  v[11] = Ratio(psf, [](char c) { return c == '_'; });
  v[12] = Ratio(sld, [](char c) { return !IsLetter(c); });
  v[13] = Ratio(sld, IsHex);
  v[14] = Ratio(psf, IsDigit);
  v[15] = Ratio(psf, IsVowel);
  v[16] = Ratio(sld, IsConsonant);
  {
    const auto counts = CharCounts(psf);
    std::size_t distinct = 0, repeated = 0;
    for (std::size_t c : counts) {
      if (c > 0) ++distinct;
      if (c >= 2) ++repeated;
    }
    v[17] = sz(repeated) / sz(distinct);
  }
  v[18] = RunRatio(psf, IsConsonant);
  v[19] = RunRatio(psf, IsDigit);
  {
    std::size_t tokens = 0;
    for (auto t : internal::Split(sld, '-')) {
      if (!t.empty()) ++tokens;
    }
    v[20] = sz(tokens);
  }
  v[21] = sz(static_cast<std::size_t>(std::count_if(sld.begin(), sld.end(), IsDigit)));
  v[22] = Entropy(psf);
  v[23] = GiniIndex(sld);
  v[24] = ClassificationError(sld);
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto [mean, stddev] = NgramCountStats(psf, n);
    v[25 + 2 * (n - 1)] = mean;
    v[26 + 2 * (n - 1)] = stddev;
  }
  if (tables != nullptr) {
    const auto& cols = FullColumns();
    auto median = [&](std::size_t col, const NgramTable& t, bool circular) {
      try {
        v[col] = NgramMedian(sld, t, circular);
      } catch (const Error& e) {
        v[col] = nan;
        if (std::find(schema.full_index().begin(), schema.full_index().end(),
                      col) != schema.full_index().end()) {
          throw Error(ErrorCode::kFeatureExtraction,
                      cols[col].name + ": " + e.what());
        }
      }
    };
    median(kBigramMedianCol, tables->bigram, false);
    median(kTrigramMedianCol, tables->trigram, false);
    median(kBigramCircleCol, tables->bigram, true);
    median(kTrigramCircleCol, tables->trigram, true);
  }
  v[35] = sz(labels.size());
  {
    double total = 0.0;
    for (auto l : labels) total += sz(l.size());
    v[36] = total / sz(labels.size());
  }
  v[37] = b(labels.front() == "www");
  v[38] = b(std::any_of(labels.begin(), labels.end(),
                        [](std::string_view l) { return l.size() == 1; }));
  v[39] = b(labels.size() >= 2 &&
            std::all_of(labels.begin(), labels.end(),
                        [&](std::string_view l) { return l == labels.front(); }));
  v[40] = b(std::any_of(labels.begin(), labels.end(), [&](std::string_view l) {
    return tld_ctx.valid_tlds.contains(std::string(l));
  }));
  auto label_ratio = [&](auto pred) {
    std::size_t hits = 0;
    for (auto l : labels) {
      if (std::all_of(l.begin(), l.end(), pred)) ++hits;
    }
    return sz(hits) / sz(labels.size());
  };
  v[41] = label_ratio(IsDigit);
  v[42] = label_ratio(IsHex);
  v[43] = b(IsIpv4(rendered));
  v[44] = sz(DistinctChars(psf));

  FeatureVector out{schema.name(), {}};
  out.values.reserve(schema.width());
  for (std::size_t i = 0; i < schema.width(); ++i) {
    const std::size_t col = schema.full_index()[i];
    if (std::isnan(v[col])) {
      throw Error(ErrorCode::kFeatureExtraction,
                  schema.columns()[i].name + ": n-gram tables required");
    }
    out.values.push_back(v[col]);
  }
  return out;
}

}  // namespace dgalab
