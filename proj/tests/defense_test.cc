#include "dgalab/defense.h"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include <gtest/gtest.h>

#include "dgalab/charbot.h"
#include "dgalab/levenshtein.h"
#include "dgalab/rng.h"
#include "test_util.h"

namespace dgalab {
namespace {

using testing::TempDir;

std::vector<std::string> Variants(std::string_view sld, std::string_view alphabet,
                                  std::size_t k) {
  std::vector<std::string> out;
  EnumerateVariants(sld, alphabet, k, [&](std::string_view v) { out.emplace_back(v); });
  return out;
}

std::vector<Domain> Sources(std::initializer_list<const char*> names) {
  std::vector<Domain> out;
  for (const char* n : names) out.push_back(ParseDomain(n));
  return out;
}

// Every string over `alphabet` of the given length, by odometer.
std::vector<std::string> AllStrings(std::string_view alphabet, std::size_t len) {
  std::vector<std::string> out;
  std::vector<std::size_t> d(len, 0);
  while (true) {
    std::string s(len, ' ');
    for (std::size_t i = 0; i < len; ++i) s[i] = alphabet[d[i]];
    out.push_back(s);
    std::size_t i = 0;
    while (i < len && ++d[i] == alphabet.size()) d[i++] = 0;
    if (i == len) return out;
  }
}

TEST(EnumerateVariants, SingleEditExample) {
  EXPECT_EQ(Variants("ab", "abc", 1), (std::vector<std::string>{"bb", "cb", "aa", "ac"}));
  EXPECT_EQ(Variants("ab", "abc", 0), (std::vector<std::string>{"ab"}));
  EXPECT_TRUE(Variants("ab", "abc", 3).empty());
}

// Exactly the strings at Hamming distance k, each once.
TEST(EnumerateVariantsProperty, MatchesBruteForce) {
  for (std::string_view sld : {"abca", "ccc", "a-b", "ba"}) {
    for (std::size_t k = 0; k <= sld.size(); ++k) {
      const std::string alphabet = "abc-";
      std::set<std::string> want;
      for (const auto& s : AllStrings(alphabet, sld.size())) {
        std::size_t h = 0;
        for (std::size_t i = 0; i < s.size(); ++i) h += s[i] != sld[i];
        if (h == k) want.insert(s);
      }
      const auto got = Variants(sld, alphabet, k);
      EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), want) << sld << " " << k;
      EXPECT_EQ(got.size(), want.size()) << "duplicates for " << sld;
      EXPECT_EQ(BigInt(got.size()), Binomial(sld.size(), k) * BigInt(std::pow(3, k)));
    }
  }
}

TEST(BloomSizing, StandardFormulas) {
  const auto [bits, hashes] = BloomSizing(BigInt(1000), 0.01);
  const double ln2 = std::log(2.0);
  const double want_bits = std::ceil(-1000 * std::log(0.01) / (ln2 * ln2));
  EXPECT_EQ(bits, BigInt(static_cast<std::uint64_t>(want_bits)));
  EXPECT_EQ(hashes, static_cast<std::uint32_t>(std::ceil(want_bits / 1000 * ln2)));
  EXPECT_EQ(bits, BigInt(9586));
  EXPECT_EQ(hashes, 7u);
}

TEST(EstimatePlan, HeadlineCountIsInfeasible) {
  const FilterBuildPlan p = EstimatePlan(10000, 16, 40, 2, 0.001);
  EXPECT_EQ(p.predicted_insertions, BigInt(1825200000));
  EXPECT_FALSE(p.feasible);
  EXPECT_GT(p.bytes(), kDefaultFilterBudgetBytes);
  EXPECT_NE(p.Summary().find("predicted_insertions=1825200000"), std::string::npos);
}

TEST(PlanFilter, ThrowsNamingThePredictedCount) {
  // 10000 slds of length 16 over the 37-char alphabet: 10000*120*36^2.
  std::vector<Domain> sources;
  SplitMix64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    std::string s(16, 'a');
    for (char& c : s) c = static_cast<char>('a' + rng.Below(26));
    sources.push_back(ParseDomain(s + ".com"));
  }
  try {
    PlanFilter(sources, FilterOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasiblePlan);
    EXPECT_NE(std::string(e.what()).find("1555200000"), std::string::npos) << e.what();
  }
}

TEST(EstimatePlan, Errors) {
  const auto shortie = Sources({"a.com"});
  try {
    EstimatePlan(shortie, FilterOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSourceTooShort);
  }
  FilterOptions bad;
  bad.target_fpr = 0.0;
  EXPECT_THROW(EstimatePlan(Sources({"google.com"}), bad), Error);
  EXPECT_THROW(EstimatePlan(std::vector<Domain>{}, FilterOptions{}), Error);
}

class FilterFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    sources_ = Sources({"google.com", "youtube.com", "amazon.co.uk", "wiki-pedia.org"});
    opts_.target_fpr = 0.01;
  }
  std::vector<Domain> sources_;
  FilterOptions opts_;
};

TEST_F(FilterFixture, PlanMatchesInsertions) {
  for (bool up_to : {false, true}) {
    for (bool original : {false, true}) {
      opts_.up_to_edits = up_to;
      opts_.include_original = original;
      const FilterBuildPlan plan = EstimatePlan(sources_, opts_);
      BigInt want = 0;
      for (const auto& s : sources_) {
        const std::size_t l = s.sld().size();
        want += Binomial(l, 2) * 36 * 36;
        if (up_to) want += Binomial(l, 1) * 36;
        if (original) want += 1;
      }
      EXPECT_EQ(plan.predicted_insertions, want);
      const TyposquatFilter f = BuildFilter(sources_, opts_, plan);
      EXPECT_EQ(BigInt(f.inserted()), want);
      EXPECT_EQ(f.bits(), plan.bits);
      EXPECT_EQ(f.hash_count(), plan.hash_count);
    }
  }
}

TEST_F(FilterFixture, NoFalseNegativesAndBoundedFalsePositives) {
  const TyposquatFilter f = BuildFilter(sources_, opts_);
  std::unordered_set<std::string> members;
  for (const auto& s : sources_) {
    for (const auto& v : Variants(s.sld(), kDnsAlphabet, 2)) {
      EXPECT_TRUE(f.MayContain(v)) << v;
      members.insert(v);
    }
  }
  EXPECT_EQ(f.Check(ParseDomain("g0ogl3.net")), CheckResult::kHit);
  // False positive rate on random strings outside the set.
  SplitMix64 rng(42);
  std::size_t trials = 0, hits = 0;
  while (trials < 200000) {
    std::string s(6 + rng.Below(6), 'a');
    for (char& c : s) c = static_cast<char>('a' + rng.Below(26));
    if (members.contains(s)) continue;
    ++trials;
    hits += f.MayContain(s);
  }
  EXPECT_LE(static_cast<double>(hits) / trials, 2 * opts_.target_fpr);
}

TEST_F(FilterFixture, OriginalsOnlyWhenRequested) {
  const TyposquatFilter exact = BuildFilter(sources_, opts_);
  opts_.include_original = true;
  const TyposquatFilter with = BuildFilter(sources_, opts_);
  for (const auto& s : sources_) EXPECT_TRUE(with.MayContain(s.sld()));
  EXPECT_EQ(with.inserted(), exact.inserted() + sources_.size());
}

TEST_F(FilterFixture, FileRoundTripAndCorruption) {
  const TyposquatFilter f = BuildFilter(sources_, opts_);
  EXPECT_EQ(f.source_digest(), SourceDigest(sources_));
  EXPECT_GT(f.PopCount(), 0u);
  TempDir dir;
  f.Save(dir / "f.bloom");
  EXPECT_EQ(TyposquatFilter::Load(dir / "f.bloom"), f);
  std::string bytes = testing::ReadFile(dir / "f.bloom");
  EXPECT_TRUE(bytes.starts_with("DGABLOOM"));

  testing::WriteFile(dir / "short.bloom", bytes.substr(0, bytes.size() - 5));
  try {
    TyposquatFilter::Load(dir / "short.bloom");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptModel);
  }
  std::string v2 = bytes;
  v2[8] = 2;  // version field, little endian
  testing::WriteFile(dir / "v2.bloom", v2);
  try {
    TyposquatFilter::Load(dir / "v2.bloom");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  testing::WriteFile(dir / "junk.bloom", "hello");
  EXPECT_THROW(TyposquatFilter::Load(dir / "junk.bloom"), Error);
}

TEST(NearMatchScan, FirstSourceWithinDistance) {
  const auto sources = Sources({"example.com", "google.com", "googie.com"});
  const auto m = NearMatchScan(ParseDomain("g0ogl3.net"), sources, 2);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->index, 1u);
  EXPECT_EQ(m->source.sld(), "google");
  EXPECT_EQ(m->distance, 2u);
  EXPECT_FALSE(NearMatchScan(ParseDomain("g0ogl3.net"), sources, 1));
  const auto exact = NearMatchScan(ParseDomain("googie.org"), sources, 1);
  ASSERT_TRUE(exact);
  EXPECT_EQ(exact->index, 1u);  // google is one edit away and comes first
  EXPECT_EQ(exact->distance, 1u);
}

// Every CharBot output is caught by a filter built from its sources.
TEST(FilterProperty, CatchesCharbotOutputs) {
  const Dataset benign = LoadAlexa(testing::DataDir() / "benign" / "benign_head.csv", 6, 20);
  std::vector<Domain> sources;
  for (const auto& e : benign.examples()) sources.push_back(e.domain);
  const TyposquatFilter f = BuildFilter(sources, FilterOptions{});
  for (const auto& r : GenerateBatch(CharbotConfig{}, sources, 17, 500)) {
    EXPECT_EQ(f.Check(r.output), CheckResult::kHit) << r.output.Render();
    const auto m = NearMatchScan(r.output, sources, 2);
    ASSERT_TRUE(m);
    EXPECT_LE(m->distance, Levenshtein(r.output.sld(), r.source.sld()));
  }
}

}  // namespace
}  // namespace dgalab
