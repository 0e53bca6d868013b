#include "dgalab/manifest.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dgalab/charbot.h"
#include "dgalab/error.h"
#include "json.hpp"

namespace dgalab {

namespace {

using nlohmann::json;

std::filesystem::path ResolvePath(const std::string& raw,
                                  const std::filesystem::path& base_dir,
                                  const std::filesystem::path& data_dir) {
  constexpr std::string_view kDataPrefix = "@data/";
  if (raw.starts_with(kDataPrefix)) return data_dir / raw.substr(kDataPrefix.size());
  std::filesystem::path p(raw);
  return p.is_absolute() ? p : base_dir / p;
}

std::uint64_t SeedField(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_string()) return ParseSeed(j.get<std::string>());
  throw Error(ErrorCode::kInvalidConfig, "seed must be an unsigned integer or a date");
}

DomainSource SourceFromJson(const json& j, const std::string& default_name,
                            const std::filesystem::path& base_dir,
                            const std::filesystem::path& data_dir) {
  DomainSource s;
  s.name = j.value("name", default_name);
  if (j.contains("path")) {
    s.path = ResolvePath(j.at("path").get<std::string>(), base_dir, data_dir);
  }
  s.limit = j.value("limit", std::size_t{0});
  s.min_sld_len = j.value("min_sld_len", std::size_t{1});
  if (j.contains("charbot")) {
    const json& c = j.at("charbot");
    s.charbot = DomainSource::Charbot{c.at("date").get<std::string>(),
                                      c.at("count").get<std::size_t>()};
  }
  if (j.contains("random_dga")) {
    const json& r = j.at("random_dga");
    DomainSource::RandomDga g;
    g.count = r.at("count").get<std::size_t>();
    g.seed = r.contains("seed") ? SeedField(r.at("seed")) : 0;
    g.min_len = r.value("min_len", g.min_len);
    g.max_len = r.value("max_len", g.max_len);
    s.random_dga = g;
  }
  const int kinds = !s.path.empty() + s.charbot.has_value() + s.random_dga.has_value();
  if (kinds != 1) {
    throw Error(ErrorCode::kInvalidConfig,
                "source '" + s.name + "' needs exactly one of path, charbot, random_dga");
  }
  return s;
}

}  // namespace

std::uint64_t ParseSeed(std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) return v;
  return SeedFromDate(text);
}

ExperimentManifest ParseManifest(std::string_view json_text,
                                 const std::filesystem::path& base_dir,
                                 const std::filesystem::path& data_dir) {
  ExperimentManifest m;
  try {
    const json j = json::parse(json_text);
    m.dataset_id = j.value("dataset_id", m.dataset_id);
    if (j.contains("model")) m.model = ParseModelKind(j.at("model").get<std::string>());
    if (j.contains("seed")) m.seed = SeedField(j.at("seed"));
    if (j.contains("target_fprs")) {
      m.target_fprs = j.at("target_fprs").get<std::vector<double>>();
    }
    m.benign = SourceFromJson(j.at("benign"), "benign", base_dir, data_dir);
    m.malicious = SourceFromJson(j.at("malicious"), "malicious", base_dir, data_dir);
    if (j.contains("split")) {
      const json& s = j.at("split");
      m.train_fraction = s.value("train_fraction", m.train_fraction);
      if (s.contains("seed")) m.split_seed = SeedField(s.at("seed"));
    }
    if (j.contains("charbot_sources")) {
      m.charbot_sources =
          SourceFromJson(j.at("charbot_sources"), "sources", base_dir, data_dir);
    } else {
      m.charbot_sources.name = "sources";
      m.charbot_sources.path = data_dir / "benign" / "benign_head.csv";
      m.charbot_sources.min_sld_len = 6;
      m.charbot_sources.limit = 10000;
    }
    for (const auto& a : j.value("augmentations", json::array())) {
      m.augmentations.push_back(SourceFromJson(a, "augmentation", base_dir, data_dir));
    }
    for (const auto& a : j.value("adversarial_tests", json::array())) {
      m.adversarial_tests.push_back(SourceFromJson(a, "adversarial", base_dir, data_dir));
    }
    const json tlds = j.value("tlds", json::object());
    m.valid_tlds = ResolvePath(tlds.value("valid", "@data/tlds/iana_tlds.txt"), base_dir,
                               data_dir);
    m.malicious_tlds = ResolvePath(tlds.value("malicious", "@data/tlds/malicious_tlds.txt"),
                                   base_dir, data_dir);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("malformed manifest: ") + e.what());
  }
  for (double t : m.target_fprs) {
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "target FPRs must lie in (0, 1)");
    }
  }
  return m;
}

ExperimentManifest LoadManifest(const std::filesystem::path& path,
                                const std::filesystem::path& data_dir) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseManifest(buf.str(), path.parent_path(), data_dir);
}

Dataset MaterializeSource(const DomainSource& src, Label label,
                          const Dataset* charbot_sources) {
  Dataset out(src.name);
  if (src.random_dga) {
    const auto& g = *src.random_dga;
    out = GenerateRandomDga(g.count, g.seed, g.min_len, g.max_len, DefaultCharbotTlds());
  } else if (src.charbot) {
    if (charbot_sources == nullptr || charbot_sources->empty()) {
      throw Error(ErrorCode::kEmptyDataset, "CharBot set without source domains");
    }
    std::vector<Domain> sources;
    for (const auto& e : charbot_sources->examples()) sources.push_back(e.domain);
    const auto records = GenerateBatch(CharbotConfig{}, sources,
                                       SeedFromDate(src.charbot->date), src.charbot->count);
    out = RecordsToDataset(records, src.name);
  } else if (label == Label::kBenign) {
    out = LoadAlexa(src.path, src.min_sld_len, src.limit);
  } else {
    out = LoadDomainList(src.path, label, src.name);
    if (src.limit > 0 && out.size() > src.limit) {
      Dataset cut(src.name);
      for (std::size_t i = 0; i < src.limit; ++i) cut.Add(out.examples()[i]);
      out = std::move(cut);
    }
  }
  out.set_name(src.name);
  return out;
}

PreparedExperiment PrepareExperiment(const ExperimentManifest& m) {
  PreparedExperiment p;
  p.tld_ctx = TldContext::Load(m.valid_tlds, m.malicious_tlds);
  const Dataset benign = MaterializeSource(m.benign, Label::kBenign, nullptr);
  const Dataset malicious = MaterializeSource(m.malicious, Label::kMalicious, nullptr);
  const Dataset* parts[] = {&benign, &malicious};
  const Dataset base = Dataset::Merge(m.dataset_id, parts);
  auto [train, test] = SplitTrainTest(base, m.train_fraction, m.split_seed);

  std::optional<Dataset> sources;
  auto needs_sources = [](const std::vector<DomainSource>& v) {
    return std::any_of(v.begin(), v.end(), [](const auto& s) { return s.charbot.has_value(); });
  };
  if (needs_sources(m.augmentations) || needs_sources(m.adversarial_tests)) {
    sources = MaterializeSource(m.charbot_sources, Label::kBenign, nullptr);
  }
  const Dataset* src_ptr = sources ? &*sources : nullptr;

  ExperimentInput& in = p.input;
  in.dataset_id = m.dataset_id;
  in.base_train = std::move(train);
  in.base_test = std::move(test);
  in.kind = m.model;
  in.seed = m.seed;
  in.target_fprs = m.target_fprs;
  for (const auto& a : m.augmentations) {
    in.augmentations.push_back({a.name, MaterializeSource(a, Label::kMalicious, src_ptr)});
  }
  for (const auto& t : m.adversarial_tests) {
    Dataset ds = MaterializeSource(t, Label::kMalicious, src_ptr);
    if (t.charbot || t.random_dga) {
      Dataset kept(ds.name());
      for (const auto& e : ds.examples()) {
        const std::string r = e.domain.Render();
        const bool seen = std::any_of(in.augmentations.begin(), in.augmentations.end(),
                                      [&](const auto& a) { return a.data.Contains(r); });
        if (!seen) kept.Add(e);
      }
      ds = std::move(kept);
    }
    in.adversarial_tests.push_back({t.name, std::move(ds)});
  }
  return p;
}

}  // namespace dgalab
