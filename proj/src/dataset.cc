#include "dgalab/dataset.h"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <map>

#include "dgalab/error.h"
#include "dgalab/rng.h"
#include "text_util.h"

namespace dgalab {

bool Dataset::Add(LabeledExample example) {
  if (example.source_tag.empty()) {
    throw Error(ErrorCode::kInvalidParameters, "empty source tag");
  }
  auto rendered = example.domain.Render();
  if (!rendered_.insert(std::move(rendered)).second) return false;
  examples_.push_back(std::move(example));
  return true;
}

std::size_t Dataset::CountLabel(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(examples_.begin(), examples_.end(),
                    [&](const LabeledExample& e) { return e.label == label; }));
}

Dataset Dataset::Merge(std::string name,
                       std::span<const Dataset* const> parts) {
  Dataset out(std::move(name));
  for (const Dataset* part : parts) {
    for (const auto& e : part->examples()) out.Add(e);
  }
  return out;
}

namespace {

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

bool IsNumber(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

}  // namespace

Dataset LoadAlexa(const std::filesystem::path& path, std::size_t min_sld_len,
                  std::size_t limit, LoadStats* stats) {
  auto in = OpenOrThrow(path);
  LoadStats local;
  Dataset out(path.stem().string());
  std::string line;
  bool first = true;
  while ((limit == 0 || out.size() < limit) && std::getline(in, line)) {
    ++local.lines;
    std::string_view view = internal::Trim(line);
    if (view.empty()) continue;
    std::string_view field = view;
    if (const auto comma = view.find(','); comma != std::string_view::npos) {
      std::string_view rank = internal::Trim(view.substr(0, comma));
      field = internal::Trim(view.substr(comma + 1));
      if (!IsNumber(rank)) {
        if (first) {
          first = false;
          continue;  // header
        }
        ++local.skipped_malformed;
        continue;
      }
    }
    first = false;
    try {
      Domain d = ParseDomain(field);
      if (d.sld().size() < min_sld_len) {
        ++local.skipped_filtered;
        continue;
      }
      if (!out.Add({std::move(d), Label::kBenign, "alexa"})) ++local.duplicates;
    } catch (const Error&) {
      ++local.skipped_malformed;
    }
  }
  if (stats) *stats = local;
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyDataset,
                "no domains survived filtering in " + path.string());
  }
  return out;
}

Dataset LoadDomainList(const std::filesystem::path& path, Label label,
                       const std::string& source_tag, LoadStats* stats) {
  auto in = OpenOrThrow(path);
  LoadStats local;
  Dataset out(path.stem().string());
  std::string line;
  while (std::getline(in, line)) {
    ++local.lines;
    std::string_view view = internal::Trim(line);
    if (view.empty() || view.front() == '#') continue;
    try {
      if (!out.Add({ParseDomain(view), label, source_tag})) ++local.duplicates;
    } catch (const Error&) {
      ++local.skipped_malformed;
    }
  }
  if (stats) *stats = local;
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no domains in " + path.string());
  }
  return out;
}

void WriteDomainList(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& e : ds.examples()) out << e.domain.Render() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed " + path.string());
}

std::chrono::sys_seconds ParseRfc3339(std::string_view text) {
  using namespace std::chrono;
  auto fail = [&]() -> Error {
    return Error(ErrorCode::kInvalidParameters,
                 "bad RFC 3339 timestamp '" + std::string(text) + "'");
  };
  auto num = [&](std::size_t pos, std::size_t len) {
    if (pos + len > text.size()) throw fail();
    int v = 0;
    auto sub = text.substr(pos, len);
    auto [p, ec] = std::from_chars(sub.data(), sub.data() + sub.size(), v);
    if (ec != std::errc() || p != sub.data() + sub.size()) throw fail();
    return v;
  };
  if (text.size() < 20 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != 't' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    throw fail();
  }
  const year_month_day ymd{year{num(0, 4)}, month{static_cast<unsigned>(num(5, 2))},
                           day{static_cast<unsigned>(num(8, 2))}};
  const int hh = num(11, 2), mm = num(14, 2), ss = num(17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) throw fail();
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  if (pos >= text.size()) throw fail();
  seconds offset{0};
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    if (pos + 6 != text.size() || text[pos + 3] != ':') throw fail();
    const int sign = text[pos] == '+' ? 1 : -1;
    offset = sign * (hours{num(pos + 1, 2)} + minutes{num(pos + 4, 2)});
    pos += 6;
  } else {
    throw fail();
  }
  if (pos != text.size()) throw fail();
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} - offset;
}

std::vector<QueryLogRecord> LoadQueryLog(const std::filesystem::path& path,
                                         LoadStats* stats) {
  auto in = OpenOrThrow(path);
  LoadStats local;
  std::vector<QueryLogRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    ++local.lines;
    std::string_view view = internal::Trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = internal::Split(view, ',');
    if (fields.size() != 3) {
      ++local.skipped_malformed;
      continue;
    }
    const auto response = internal::Upper(internal::Trim(fields[2]));
    QueryResponse r;
    if (response == "RESOLVED") {
      r = QueryResponse::kResolved;
    } else if (response == "NXDOMAIN") {
      r = QueryResponse::kNxDomain;
    } else {
      // header lines land here too
      ++local.skipped_malformed;
      continue;
    }
    try {
      records.push_back({std::string(internal::Trim(fields[0])),
                         ParseRfc3339(internal::Trim(fields[1])), r});
    } catch (const Error&) {
      ++local.skipped_malformed;
    }
  }
  if (stats) *stats = local;
  return records;
}

Dataset WeakLabel(std::span<const QueryLogRecord> records) {
  using namespace std::chrono;
  struct Summary {
    std::size_t resolved = 0;
    bool nxdomain = false;
    sys_days first = sys_days::max();
    sys_days last = sys_days::min();
  };
  std::map<std::string, Summary> by_domain;
  for (const auto& r : records) {
    auto& s = by_domain[internal::Lower(internal::Trim(r.domain))];
    if (r.response == QueryResponse::kNxDomain) {
      s.nxdomain = true;
      continue;
    }
    ++s.resolved;
    const auto day = floor<days>(r.timestamp);
    s.first = std::min(s.first, day);
    s.last = std::max(s.last, day);
  }
  Dataset out("qname");
  for (const auto& [name, s] : by_domain) {
    if (s.nxdomain || s.resolved < 2) continue;
    if ((s.last - s.first).count() <= 30) continue;
    try {
      out.Add({ParseDomain(name), Label::kBenign, "qname"});
    } catch (const Error&) {
      // not representable as sld.tld
    }
  }
  return out;
}

std::size_t OverlapCount(const Dataset& a, const Dataset& b) {
  const Dataset& small = a.size() <= b.size() ? a : b;
  const Dataset& large = a.size() <= b.size() ? b : a;
  std::size_t n = 0;
  for (const auto& e : small.examples()) {
    if (large.Contains(e.domain.Render())) ++n;
  }
  return n;
}

std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& d,
                                           double train_fraction,
                                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidParameters,
                "train fraction must lie in (0,1)");
  }
  SplitMix64 rng(seed);
  std::vector<bool> in_train(d.size(), false);
  for (Label label : {Label::kBenign, Label::kMalicious}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.examples()[i].label == label) idx.push_back(i);
    }
    Shuffle(idx, rng);
    const auto take = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < take; ++i) in_train[idx[i]] = true;
  }
  Dataset train(d.name() + "-train"), test(d.name() + "-test");
  for (std::size_t i = 0; i < d.size(); ++i) {
    (in_train[i] ? train : test).Add(d.examples()[i]);
  }
  if (train.empty() || test.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "split leaves an empty side");
  }
  return {std::move(train), std::move(test)};
}

Dataset GenerateRandomDga(std::size_t n, std::uint64_t seed,
                          std::size_t min_len, std::size_t max_len,
                          std::span<const std::string> tlds) {
  static constexpr std::string_view kChars =
      "abcdefghijklmnopqrstuvwxyz0123456789";
  if (n == 0 || min_len == 0 || min_len > max_len || tlds.empty()) {
    throw Error(ErrorCode::kInvalidParameters, "bad random DGA parameters");
  }
  SplitMix64 rng(seed);
  Dataset out("random-dga");
  while (out.size() < n) {
    const auto len = rng.Between(min_len, max_len);
    std::string sld(len, 'a');
    for (auto& c : sld) c = kChars[rng.Below(kChars.size())];
    const auto& tld = tlds[rng.Below(tlds.size())];
    out.Add({Domain(sld, tld), Label::kMalicious, "random-dga"});
  }
  return out;
}

}  // namespace dgalab
