#include "dgalab/features.h"

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "dgalab/charbot.h"
#include "dgalab/dataset.h"
#include "dgalab/feature_matrix.h"
#include "test_util.h"

namespace dgalab {
namespace {

using testing::TempDir;

std::size_t Col(const FeatureSchema& s, const std::string& name) {
  for (std::size_t i = 0; i < s.width(); ++i) {
    if (s.columns()[i].name == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

TldContext SmallTlds() {
  TldContext ctx;
  ctx.valid_tlds = {"com", "net", "org", "uk"};
  ctx.malicious_tlds = {"biz", "ru"};
  return ctx;
}

Dataset Benign(std::initializer_list<const char*> names) {
  Dataset ds("benign");
  for (const char* n : names) ds.Add({ParseDomain(n), Label::kBenign, "test"});
  return ds;
}

TEST(CharStats, HandComputedValues) {
  EXPECT_DOUBLE_EQ(Entropy("aabb"), 1.0);
  EXPECT_DOUBLE_EQ(Entropy("abcd"), 2.0);
  EXPECT_EQ(Entropy("aaaa"), 0.0);
  EXPECT_FALSE(std::signbit(Entropy("aaaa")));
  EXPECT_DOUBLE_EQ(GiniIndex("aab"), 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(GiniIndex("zzzz"), 0.0);
  EXPECT_DOUBLE_EQ(ClassificationError("aab"), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(ClassificationError("abcd"), 0.75);
}

TEST(CharStats, EmptyStringRejected) {
  for (auto f : {&Entropy, &GiniIndex, &ClassificationError}) {
    try {
      f("");
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kEmptyString);
    }
  }
}

// Bounds: 0 <= H <= log2(distinct), 0 <= Gini, ClassErr <= 1 - 1/distinct.
TEST(CharStatsProperty, BoundsOverGeneratedStrings) {
  const Dataset dga = GenerateRandomDga(500, 3, 1, 30, DefaultCharbotTlds());
  for (const auto& e : dga.examples()) {
    const std::string& s = e.domain.sld();
    std::set<char> distinct(s.begin(), s.end());
    const double d = static_cast<double>(distinct.size());
    EXPECT_GE(Entropy(s), 0.0);
    EXPECT_LE(Entropy(s), std::log2(d) + 1e-12);
    EXPECT_GE(GiniIndex(s), 0.0);
    EXPECT_LE(GiniIndex(s), 1.0 - 1.0 / d + 1e-12);
    EXPECT_GE(ClassificationError(s), 0.0);
    EXPECT_LE(ClassificationError(s), 1.0 - 1.0 / d + 1e-12);
  }
}

TEST(NgramMedian, OddEvenAndCircular) {
  const NgramTable t(2, {{"ab", 0.5}, {"bc", 0.25}}, 0.1);
  // ab .5, bc .25, cd .1
  EXPECT_DOUBLE_EQ(NgramMedian("abcd", t, false), 0.25);
  // + da .1 -> {.1, .1, .25, .5}
  EXPECT_DOUBLE_EQ(NgramMedian("abcd", t, true), 0.175);
  EXPECT_DOUBLE_EQ(NgramMedian("ab", t, false), 0.5);
  // circular "a": the single gram "aa"
  EXPECT_DOUBLE_EQ(NgramMedian("a", t, true), 0.1);
  try {
    NgramMedian("a", t, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStringTooShort);
  }
}

TEST(NgramTable, BuildFrequenciesAndDefault) {
  const Dataset ds = Benign({"abab.com", "abc.net"});
  const NgramTable t = BuildNgramTable(ds, 2);
  // grams: ab ba ab | ab bc -> ab 3/5, ba 1/5, bc 1/5
  EXPECT_DOUBLE_EQ(t.Lookup("ab"), 0.6);
  EXPECT_DOUBLE_EQ(t.Lookup("ba"), 0.2);
  EXPECT_DOUBLE_EQ(t.Lookup("zz"), 0.1);
  double sum = 0.0;
  for (const auto& [g, f] : t.entries()) sum += f;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(BuildNgramTable(ds, 4), Error);
  EXPECT_THROW(BuildNgramTable(Dataset("empty"), 2), Error);
}

TEST(NgramTable, SaveLoadRoundTrip) {
  const Dataset ds = LoadAlexa(testing::DataDir() / "benign" / "benign_head.csv", 1, 500);
  const NgramTables tables = BuildNgramTables(ds);
  TempDir dir;
  tables.Save(dir.path());
  const NgramTables back = NgramTables::Load(dir.path());
  EXPECT_EQ(back.bigram, tables.bigram);
  EXPECT_EQ(back.trigram, tables.trigram);
}

TEST(Schema, Widths) {
  EXPECT_EQ(FeatureSchema::Get(SchemaName::kFull).width(), 45u);
  EXPECT_EQ(FeatureSchema::Get(SchemaName::kFanci).width(), 26u);
  EXPECT_EQ(FeatureSchema::Get(SchemaName::kBrf).width(), 26u);
  EXPECT_FALSE(FeatureSchema::Get(SchemaName::kFanci).needs_ngram_tables());
  EXPECT_TRUE(FeatureSchema::Get(SchemaName::kBrf).needs_ngram_tables());
  EXPECT_EQ(ParseSchemaName("fanci"), SchemaName::kFanci);
  EXPECT_EQ(ParseSchemaName("B-RF"), SchemaName::kBrf);
  EXPECT_THROW(ParseSchemaName("svm"), Error);
}

TEST(Schema, SubsetsAreOrderedSubsequencesOfFull) {
  const auto& full = FeatureSchema::Get(SchemaName::kFull);
  for (SchemaName n : {SchemaName::kFanci, SchemaName::kBrf}) {
    const auto& s = FeatureSchema::Get(n);
    for (std::size_t i = 0; i < s.width(); ++i) {
      EXPECT_EQ(s.columns()[i].name, full.columns()[s.full_index()[i]].name);
      if (i > 0) {
        EXPECT_LT(s.full_index()[i - 1], s.full_index()[i]);
      }
    }
  }
}

TEST(Extract, GoogleDotCom) {
  const auto& full = FeatureSchema::Get(SchemaName::kFull);
  const NgramTables tables = BuildNgramTables(Benign({"google.com", "goal.org"}));
  const auto v = Extract(ParseDomain("google.com"), full, &tables, SmallTlds()).values;
  ASSERT_EQ(v.size(), 45u);
  EXPECT_EQ(v[Col(full, "domain_length")], 10);
  EXPECT_EQ(v[Col(full, "sld_length")], 6);
  EXPECT_EQ(v[Col(full, "tld_length")], 3);
  EXPECT_EQ(v[Col(full, "domain_unique_chars")], 6);  // g o l e c m
  EXPECT_EQ(v[Col(full, "sld_unique_chars")], 4);
  EXPECT_EQ(v[Col(full, "has_valid_tld")], 1);
  EXPECT_EQ(v[Col(full, "has_malicious_tld")], 0);
  EXPECT_EQ(v[Col(full, "contains_digits")], 0);
  EXPECT_DOUBLE_EQ(v[Col(full, "vowel_ratio")], 0.5);
  EXPECT_DOUBLE_EQ(v[Col(full, "consonant_ratio")], 0.5);
  EXPECT_DOUBLE_EQ(v[Col(full, "hex_ratio")], 1.0 / 6.0);  // e
  EXPECT_DOUBLE_EQ(v[Col(full, "repeated_char_ratio")], 0.5);  // g, o of 4
  // runs of consonants >= 2: "gl" -> 2/6
  EXPECT_DOUBLE_EQ(v[Col(full, "consecutive_consonant_ratio")], 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(v[Col(full, "entropy")], Entropy("google"));
  // unigram counts g2 o2 l1 e1
  EXPECT_DOUBLE_EQ(v[Col(full, "ngram1_count_mean")], 1.5);
  EXPECT_DOUBLE_EQ(v[Col(full, "ngram1_count_std")], 0.5);
  EXPECT_EQ(v[Col(full, "sld_token_count")], 1);
  EXPECT_EQ(v[Col(full, "alphabet_cardinality")], 4);
  EXPECT_EQ(v[Col(full, "contains_ip_address")], 0);
}

TEST(Extract, DigitsAndHyphens) {
  const auto v = Extract(ParseDomain("12ab-34-x.biz"), FeatureSchema::Get(SchemaName::kFanci),
                         nullptr, SmallTlds());
  const auto& fanci = FeatureSchema::Get(SchemaName::kFanci);
  EXPECT_EQ(v.values[Col(fanci, "contains_digits")], 1);
  EXPECT_DOUBLE_EQ(v.values[Col(fanci, "digit_ratio")], 4.0 / 9.0);
  // digit runs "12" and "34"
  EXPECT_DOUBLE_EQ(v.values[Col(fanci, "consecutive_digit_ratio")], 4.0 / 9.0);
}

TEST(Extract, FullWithoutTablesFails) {
  try {
    Extract(ParseDomain("google.com"), FeatureSchema::Get(SchemaName::kBrf), nullptr,
            SmallTlds());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFeatureExtraction);
  }
}

TEST(Extract, ShortSldFailsOnlyWhenColumnSelected) {
  const NgramTables tables = BuildNgramTables(Benign({"google.com"}));
  const Domain d = ParseDomain("ab.com");  // too short for trigrams
  EXPECT_NO_THROW(Extract(d, FeatureSchema::Get(SchemaName::kFanci), &tables, SmallTlds()));
  try {
    Extract(d, FeatureSchema::Get(SchemaName::kBrf), &tables, SmallTlds());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFeatureExtraction);
    EXPECT_NE(std::string(e.what()).find("trigram_median"), std::string::npos);
  }
}

// Every extracted value is finite; ratio columns lie in [0,1]; the subset
// schemas agree with the FULL projection.
TEST(ExtractProperty, FiniteBoundedAndProjected) {
  const Dataset benign =
      LoadAlexa(testing::DataDir() / "benign" / "benign_head.csv", 3, 400);
  const NgramTables tables = BuildNgramTables(benign);
  const auto& full = FeatureSchema::Get(SchemaName::kFull);
  const Dataset dga = GenerateRandomDga(400, 9, 3, 25, DefaultCharbotTlds());
  for (const Dataset* ds : {&benign, &dga}) {
    for (const auto& e : ds->examples()) {
      const auto v = Extract(e.domain, full, &tables, SmallTlds()).values;
      for (std::size_t i = 0; i < v.size(); ++i) {
        ASSERT_TRUE(std::isfinite(v[i])) << e.domain.Render() << " " << i;
        if (full.columns()[i].name.ends_with("_ratio")) {
          EXPECT_GE(v[i], 0.0);
          EXPECT_LE(v[i], 1.0);
        }
      }
      for (SchemaName n : {SchemaName::kFanci, SchemaName::kBrf}) {
        const auto& s = FeatureSchema::Get(n);
        const auto sub = Extract(e.domain, s, &tables, SmallTlds()).values;
        for (std::size_t i = 0; i < s.width(); ++i) {
          EXPECT_EQ(sub[i], v[s.full_index()[i]]);
        }
      }
    }
  }
}

TEST(TldContext, LastLabelAndFileLoad) {
  TempDir dir;
  testing::WriteFile(dir / "v.txt", "# valid\nCOM\n.uk\n");
  testing::WriteFile(dir / "m.txt", "ru\n");
  const TldContext ctx = TldContext::Load(dir / "v.txt", dir / "m.txt");
  EXPECT_TRUE(ctx.IsValid("com"));
  EXPECT_TRUE(ctx.IsValid("co.uk"));
  EXPECT_FALSE(ctx.IsValid("ru"));
  EXPECT_TRUE(ctx.IsMalicious("ru"));
  EXPECT_THROW(TldContext::Load(dir / "missing", dir / "m.txt"), Error);
}

TEST(FeatureMatrix, FeaturizeRecordsErrorsAndKeepsOrder) {
  const NgramTables tables = BuildNgramTables(Benign({"google.com", "example.org"}));
  Dataset ds("mixed");
  ds.Add({ParseDomain("example.com"), Label::kBenign, "a"});
  ds.Add({ParseDomain("ab.com"), Label::kMalicious, "b"});
  ds.Add({ParseDomain("qwerty.net"), Label::kMalicious, "c"});
  const FeaturizeResult r = Featurize(ds, SchemaName::kBrf, &tables, SmallTlds());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].row, 1u);
  ASSERT_EQ(r.matrix.rows(), 2u);
  EXPECT_EQ(r.matrix.domain(0), "example.com");
  EXPECT_EQ(r.matrix.domain(1), "qwerty.net");
  EXPECT_EQ(r.matrix.label(0), 0);
  EXPECT_EQ(r.matrix.label(1), 1);
  EXPECT_EQ(r.matrix.source_tag(1), "c");
}

TEST(FeatureMatrix, SaveLoadIsBitIdentical) {
  const Dataset benign =
      LoadAlexa(testing::DataDir() / "benign" / "benign_head.csv", 3, 200);
  const NgramTables tables = BuildNgramTables(benign);
  const FeatureMatrix m = Featurize(benign, SchemaName::kBrf, &tables, SmallTlds()).matrix;
  TempDir dir;
  m.Save(dir / "m.csv");
  const FeatureMatrix back = FeatureMatrix::Load(dir / "m.csv");
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.schema(), SchemaName::kBrf);
}

TEST(FeatureMatrix, WidthAndSchemaMismatch) {
  FeatureMatrix m(SchemaName::kFanci);
  const std::vector<double> short_row(3, 0.0);
  EXPECT_THROW(m.AddRow(short_row, 0, "x.com", "t"), Error);
  FeatureMatrix other(SchemaName::kBrf);
  try {
    m.Append(other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

}  // namespace
}  // namespace dgalab
