#include "cli.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dgalab/analysis.h"
#include "dgalab/charbot.h"
#include "dgalab/dataset.h"
#include "dgalab/defense.h"
#include "dgalab/eval.h"
#include "dgalab/feature_matrix.h"
#include "dgalab/features.h"
#include "dgalab/forest.h"
#include "dgalab/manifest.h"

#ifndef DGALAB_DEFAULT_DATA_DIR
#define DGALAB_DEFAULT_DATA_DIR "data"
#endif

namespace dgalab::cli {

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kExhaustedAttempts: return kExitExhausted;
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kVersionMismatch: return kExitSchema;
    case ErrorCode::kDegenerateData:
    case ErrorCode::kSingleClassData: return kExitDegenerate;
    case ErrorCode::kInfeasiblePlan: return kExitInfeasible;
    default: return kExitInput;
  }
}

namespace {

std::string Trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

const std::map<std::string, std::string>& Defaults() {
  static const std::map<std::string, std::string> d{
      {"data_dir", DGALAB_DEFAULT_DATA_DIR},
      {"sources", "@data/benign/benign_head.csv"},
      {"source_min_sld_len", "6"},
      {"source_limit", "10000"},
      {"valid_tlds", "@data/tlds/iana_tlds.txt"},
      {"malicious_tlds", "@data/tlds/malicious_tlds.txt"},
      {"ngram_source", "@data/benign/benign_head.csv"},
      {"ngram_limit", "20000"},
      {"ngram_dir", ""},
      {"out", "."},
      {"seed", "0"},
      {"edits", "2"},
      {"target_fprs", "0.001,0.01"},
      {"filter_fpr", "0.001"},
      {"memory_budget", std::to_string(kDefaultFilterBudgetBytes)},
  };
  return d;
}

}  // namespace

CliConfig::CliConfig() : values_(Defaults()) {}

const std::vector<std::string>& CliConfig::Keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, _] : Defaults()) k.push_back(key);
    return k;
  }();
  return keys;
}

void CliConfig::Set(const std::string& key, std::string value) {
  if (!values_.contains(key)) {
    throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  }
  values_[key] = std::move(value);
}

void CliConfig::MergeText(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = Trimmed(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, std::string(origin) + ":" +
                                                 std::to_string(lineno) +
                                                 ": expected 'key = value'");
    }
    const std::string key = Trimmed(std::string_view(t).substr(0, eq));
    if (!values_.contains(key)) {
      throw Error(ErrorCode::kInvalidConfig, std::string(origin) + ":" +
                                                 std::to_string(lineno) +
                                                 ": unknown key '" + key + "'");
    }
    values_[key] = Trimmed(std::string_view(t).substr(eq + 1));
  }
}

void CliConfig::MergeFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  MergeText(buf.str(), path.string());
}

void CliConfig::MergeEnvironment() {
  for (const auto& key : Keys()) {
    std::string name = "DGALAB_" + key;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (const char* v = std::getenv(name.c_str())) values_[key] = v;
  }
}

const std::string& CliConfig::Get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  }
  return it->second;
}

std::filesystem::path CliConfig::Path(const std::string& key) const {
  const std::string& v = Get(key);
  constexpr std::string_view kData = "@data/";
  if (v.starts_with(kData)) {
    return std::filesystem::path(Get("data_dir")) / v.substr(kData.size());
  }
  return v;
}

std::uint64_t CliConfig::Seed() const { return ParseSeed(Get("seed")); }

std::size_t CliConfig::Count(const std::string& key) const {
  const std::string& v = Get(key);
  std::size_t n = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::kInvalidConfig, key + " must be a non-negative integer");
  }
  return n;
}

double CliConfig::Real(const std::string& key) const {
  const std::string& v = Get(key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw Error(ErrorCode::kInvalidConfig, key + " must be a number");
  }
  return d;
}

std::vector<double> CliConfig::TargetFprs() const {
  std::vector<double> out;
  std::stringstream ss(Get("target_fprs"));
  for (std::string part; std::getline(ss, part, ',');) {
    const std::string t = Trimmed(part);
    char* end = nullptr;
    const double d = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !(d > 0.0 && d < 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "target_fprs entries must lie in (0, 1)");
    }
    out.push_back(d);
  }
  if (out.empty() || !std::is_sorted(out.begin(), out.end()) ||
      std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error(ErrorCode::kInvalidConfig, "target_fprs must be strictly ascending");
  }
  return out;
}

namespace {

struct Context {
  CliConfig config;
  std::ostream* out;
  std::ostream* err;
  bool quiet = false;

  std::ostream& Log() {
    static std::ostream null_stream(nullptr);
    return quiet ? null_stream : *err;
  }
  std::filesystem::path OutDir() const {
    std::filesystem::path dir = config.Path("out");
    std::filesystem::create_directories(dir);
    return dir;
  }
  TldContext Tlds() const {
    return TldContext::Load(config.Path("valid_tlds"), config.Path("malicious_tlds"));
  }
  NgramTables Tables() const {
    if (!config.Get("ngram_dir").empty()) return NgramTables::Load(config.Path("ngram_dir"));
    return BuildNgramTables(
        LoadAlexa(config.Path("ngram_source"), 1, config.Count("ngram_limit")));
  }
  std::vector<Domain> Sources() const {
    const Dataset ds = LoadAlexa(config.Path("sources"), config.Count("source_min_sld_len"),
                                 config.Count("source_limit"));
    std::vector<Domain> out;
    for (const auto& e : ds.examples()) out.push_back(e.domain);
    return out;
  }
};

std::filesystem::path OrDefault(const std::string& given, const std::filesystem::path& dir,
                                const std::string& name) {
  return given.empty() ? dir / name : std::filesystem::path(given);
}

// name=path pairs for the analyze commands.
std::vector<NamedDataset> LoadNamed(const std::vector<std::string>& specs) {
  std::vector<NamedDataset> out;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kInvalidParameters, "expected name=path, got '" + spec + "'");
    }
    Dataset ds = LoadAlexa(spec.substr(eq + 1), 1, 0);
    ds.set_name(spec.substr(0, eq));
    out.push_back({spec.substr(0, eq), std::move(ds)});
  }
  return out;
}

int CmdGenerate(Context& ctx, const std::string& date, std::size_t n, std::size_t edits,
                const std::string& output) {
  const std::uint64_t seed = date.empty() ? ctx.config.Seed() : SeedFromDate(date);
  const auto sources = ctx.Sources();
  CharbotConfig cfg;
  cfg.replacement_count = edits;
  const auto records = GenerateBatch(cfg, sources, seed, n);
  const std::string stem = "charbot_" + (date.empty() ? std::to_string(seed) : date);
  const auto path = OrDefault(output, ctx.OutDir(), stem + ".txt");
  WriteBatch(path, records);
  auto prov = path;
  prov += ".provenance.csv";
  WriteProvenance(prov, records);
  ctx.Log() << "wrote " << records.size() << " domains to " << path.string() << "\n";
  return kExitOk;
}

int CmdFeaturize(Context& ctx, const std::vector<std::string>& benign,
                 const std::vector<std::string>& malicious, const std::string& schema_text,
                 const std::string& output) {
  const SchemaName schema = ParseSchemaName(schema_text);
  std::vector<Dataset> parts;
  for (const auto& p : benign) parts.push_back(LoadAlexa(p, 1, 0));
  for (const auto& p : malicious) parts.push_back(LoadDomainList(p, Label::kMalicious, "malicious"));
  if (parts.empty()) throw Error(ErrorCode::kEmptyDataset, "no --benign or --malicious input");
  std::vector<const Dataset*> ptrs;
  for (const auto& d : parts) ptrs.push_back(&d);
  const Dataset all = Dataset::Merge("featurize", ptrs);
  std::optional<NgramTables> tables;
  if (FeatureSchema::Get(schema).needs_ngram_tables()) tables = ctx.Tables();
  const auto result = Featurize(all, schema, tables ? &*tables : nullptr, ctx.Tlds());
  for (const auto& e : result.errors) {
    ctx.Log() << "skipped " << all.examples()[e.row].domain.Render() << ": " << e.message
              << "\n";
  }
  const auto path = OrDefault(output, ctx.OutDir(), "features.csv");
  result.matrix.Save(path);
  ctx.Log() << "wrote " << result.matrix.rows() << " rows to " << path.string() << "\n";
  return kExitOk;
}

int CmdTrain(Context& ctx, const std::string& kind_text, const std::string& matrix,
             const std::string& output) {
  const ModelKind kind = ParseModelKind(kind_text);
  const FeatureMatrix m = FeatureMatrix::Load(matrix);
  const ForestModel model = TrainModel(kind, m, ctx.config.Seed());
  const auto path = OrDefault(output, ctx.OutDir(), std::string(ToString(kind)) + ".model");
  SaveModel(model, path);
  ctx.Log() << "trained " << model.trees.size() << " trees on " << m.rows() << " rows, wrote "
            << path.string() << "\n";
  return kExitOk;
}

int CmdScore(Context& ctx, const std::string& model_path, const std::string& input,
             const std::string& matrix_path, const std::string& output) {
  const ForestModel model = LoadModel(model_path);
  std::ostringstream os;
  os << "domain,score\n";
  char buf[40];
  if (!matrix_path.empty()) {
    const FeatureMatrix m = FeatureMatrix::Load(matrix_path);
    const auto scores = ScoreMatrix(model, m);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
      os << m.domain(i) << "," << buf << "\n";
    }
  } else {
    if (input.empty()) throw Error(ErrorCode::kInvalidParameters, "need --input or --matrix");
    const Dataset ds = LoadAlexa(input, 1, 0);
    std::optional<NgramTables> tables;
    if (FeatureSchema::Get(model.schema).needs_ngram_tables()) tables = ctx.Tables();
    const auto result = Featurize(ds, model.schema, tables ? &*tables : nullptr, ctx.Tlds());
    for (const auto& e : result.errors) {
      ctx.Log() << "skipped " << ds.examples()[e.row].domain.Render() << ": " << e.message
                << "\n";
    }
    const auto scores = ScoreMatrix(model, result.matrix);
    for (std::size_t i = 0; i < result.matrix.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", scores[i]);
      os << result.matrix.domain(i) << "," << buf << "\n";
    }
  }
  if (output.empty() || output == "-") {
    *ctx.out << os.str();
  } else {
    std::ofstream f(output);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + output);
    f << os.str();
  }
  return kExitOk;
}

std::string NowUtc() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    std::time_t t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
  }
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int CmdEvaluate(Context& ctx, const std::string& manifest_path) {
  const ExperimentManifest manifest =
      LoadManifest(manifest_path, ctx.config.Path("data_dir"));
  PreparedExperiment prepared = PrepareExperiment(manifest);
  prepared.input.generated_at = NowUtc();
  const EvalReport report = RunExperiment(prepared.input, prepared.tld_ctx);
  for (const auto& p : EmitReport(report, ctx.OutDir())) {
    ctx.Log() << "wrote " << p.string() << "\n";
  }
  char buf[64];
  for (const auto& row : report.rows) {
    for (const auto& c : row.cells) {
      *ctx.out << row.model_id << " " << row.training_set << " fpr<=" << c.target_fpr << " "
               << c.status;
      if (c.tpr) {
        std::snprintf(buf, sizeof buf, " tpr=%.4f", *c.tpr);
        *ctx.out << buf;
      }
      if (c.partial_auc) {
        std::snprintf(buf, sizeof buf, " pauc=%.4f", *c.partial_auc);
        *ctx.out << buf;
      }
      for (const auto& d : c.detections) {
        if (d.rate) {
          std::snprintf(buf, sizeof buf, "=%.4f", *d.rate);
          *ctx.out << " detect[" << d.adversarial_set << "]" << buf;
        }
      }
      *ctx.out << "\n";
    }
  }
  if (report.SucceededCells() == 0) {
    *ctx.err << "error: no grid cell succeeded\n";
    return kExitAllCellsFailed;
  }
  return kExitOk;
}

struct DefendBuildArgs {
  std::size_t edits = 2;
  bool up_to = false;
  bool include_original = false;
  std::string output;
};

int CmdDefendBuild(Context& ctx, const DefendBuildArgs& a) {
  const auto sources = ctx.Sources();
  FilterOptions opts;
  opts.edits = a.edits;
  opts.target_fpr = ctx.config.Real("filter_fpr");
  opts.memory_budget_bytes = ctx.config.Count("memory_budget");
  opts.up_to_edits = a.up_to;
  opts.include_original = a.include_original;
  const FilterBuildPlan plan = EstimatePlan(sources, opts);
  *ctx.out << "predicted_insertions," << plan.predicted_insertions << "\n";
  if (!plan.feasible) {
    *ctx.err << "error: infeasible filter: " << plan.Summary() << "\n";
    return kExitInfeasible;
  }
  const TyposquatFilter filter = BuildFilter(sources, opts, plan);
  const auto path = OrDefault(a.output, ctx.OutDir(), "filter.bin");
  filter.Save(path);
  ctx.Log() << plan.Summary() << "\nwrote " << path.string() << "\n";
  return kExitOk;
}

int CmdDefendCheck(Context& ctx, const std::string& filter_path,
                   const std::vector<std::string>& domains, const std::string& input,
                   std::size_t scan_edits, bool scan) {
  const TyposquatFilter filter = TyposquatFilter::Load(filter_path);
  std::vector<Domain> queries;
  for (const auto& d : domains) queries.push_back(ParseDomain(d));
  if (!input.empty()) {
    const Dataset listed = LoadAlexa(input, 1, 0);
    for (const auto& e : listed.examples()) queries.push_back(e.domain);
  }
  std::vector<Domain> sources;
  if (scan) sources = ctx.Sources();
  *ctx.out << (scan ? "domain,result,near_source,distance\n" : "domain,result\n");
  for (const auto& q : queries) {
    *ctx.out << q.Render() << "," << (filter.Check(q) == CheckResult::kHit ? "hit" : "miss");
    if (scan) {
      const auto m = NearMatchScan(q, sources, scan_edits);
      *ctx.out << "," << (m ? m->source.Render() : "") << ","
               << (m ? std::to_string(m->distance) : "");
    }
    *ctx.out << "\n";
  }
  return kExitOk;
}

int CmdAnalyzeKde(Context& ctx, const std::vector<std::string>& specs,
                  const std::vector<std::string>& feature_names, std::size_t grid) {
  const auto datasets = LoadNamed(specs);
  std::vector<KdeFeature> features;
  for (const auto& f : feature_names) features.push_back(ParseKdeFeature(f));
  if (features.empty()) features = AllKdeFeatures();
  const NgramTables tables = ctx.Tables();
  const auto curves = CompareFeatures(datasets, features, tables, grid);
  for (const auto& p : WriteDensityCsvs(curves, ctx.OutDir())) {
    ctx.Log() << "wrote " << p.string() << "\n";
  }
  // L1 distance of every dataset to the first one, per feature.
  *ctx.out << "feature,reference,dataset,l1\n";
  char buf[40];
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const DensityCurve& ref = curves[fi];
    for (std::size_t di = 1; di < datasets.size(); ++di) {
      const DensityCurve& c = curves[di * features.size() + fi];
      std::snprintf(buf, sizeof buf, "%.6f", L1Distance(ref, c));
      *ctx.out << c.feature << "," << ref.dataset << "," << c.dataset << "," << buf << "\n";
    }
  }
  return kExitOk;
}

int CmdAnalyzeLengths(Context& ctx, const std::vector<std::string>& specs,
                      const std::string& output) {
  std::vector<LengthStats> stats;
  for (const auto& nd : LoadNamed(specs)) stats.push_back(ComputeLengthStats(nd.data));
  if (output.empty() || output == "-") {
    WriteLengthStatsCsv(stats, *ctx.out);
  } else {
    WriteLengthStatsCsv(stats, output);
  }
  return kExitOk;
}

int CmdWeakLabel(Context& ctx, const std::string& log, const std::string& output) {
  LoadStats stats;
  const auto records = LoadQueryLog(log, &stats);
  const Dataset ds = WeakLabel(records);
  ctx.Log() << records.size() << " records (" << stats.skipped_malformed
            << " malformed), " << ds.size() << " domains labeled benign\n";
  if (output.empty() || output == "-") {
    for (const auto& e : ds.examples()) *ctx.out << e.domain.Render() << "\n";
  } else {
    WriteDomainList(output, ds);
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lexical DGA detection experiments: generation, features, forests, "
               "evaluation and defenses."};
  app.name("dgalab");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path, seed, out_dir;
  bool quiet = false;
  app.add_option("--config", config_path, "key = value config file (or DGALAB_CONFIG)");
  app.add_option("--seed", seed, "Seed as an unsigned integer or YYYY-MM-DD");
  app.add_option("--out", out_dir, "Output directory (or DGALAB_OUT)");
  app.add_flag("--quiet", quiet, "Suppress diagnostics");

  std::function<int(Context&)> action;

  auto* gen = app.add_subcommand("generate", "Generate CharBot domains");
  std::string gen_date, gen_output;
  std::size_t gen_n = 0, gen_edits = 2;
  gen->add_option("--date", gen_date, "Seed date (YYYY-MM-DD); overrides --seed");
  gen->add_option("-n,--count", gen_n, "Number of domains")->required();
  gen->add_option("-k,--edits", gen_edits, "Substitutions per domain");
  gen->add_option("-o,--output", gen_output, "Domain list path");
  gen->callback([&] {
    action = [&](Context& c) { return CmdGenerate(c, gen_date, gen_n, gen_edits, gen_output); };
  });

  auto* feat = app.add_subcommand("featurize", "Extract a feature matrix");
  std::vector<std::string> feat_benign, feat_malicious;
  std::string feat_schema = "brf", feat_output;
  feat->add_option("--benign", feat_benign, "Benign domain list(s), ranked CSV or plain");
  feat->add_option("--malicious", feat_malicious, "Malicious domain list(s)");
  feat->add_option("--schema", feat_schema, "fanci | brf | full");
  feat->add_option("-o,--output", feat_output, "Matrix CSV path");
  feat->callback([&] {
    action = [&](Context& c) {
      return CmdFeaturize(c, feat_benign, feat_malicious, feat_schema, feat_output);
    };
  });

  auto* train = app.add_subcommand("train", "Train a forest from a feature matrix");
  std::string train_kind, train_matrix, train_output;
  train->add_option("kind", train_kind, "fanci | brf")->required();
  train->add_option("--matrix", train_matrix, "Feature matrix CSV")->required();
  train->add_option("-o,--output", train_output, "Model file path");
  train->callback([&] {
    action = [&](Context& c) { return CmdTrain(c, train_kind, train_matrix, train_output); };
  });

  auto* score = app.add_subcommand("score", "Score domains with a trained forest");
  std::string score_model, score_input, score_matrix, score_output;
  score->add_option("--model", score_model, "Model file")->required();
  score->add_option("--input", score_input, "Domain list to featurize and score");
  score->add_option("--matrix", score_matrix, "Pre-computed feature matrix");
  score->add_option("-o,--output", score_output, "domain,score CSV (default stdout)");
  score->callback([&] {
    action = [&](Context& c) {
      return CmdScore(c, score_model, score_input, score_matrix, score_output);
    };
  });

  auto* eval = app.add_subcommand("evaluate", "Run a baseline-vs-augmented experiment");
  std::string manifest;
  eval->add_option("--manifest", manifest, "Experiment manifest (JSON)")->required();
  eval->callback([&] { action = [&](Context& c) { return CmdEvaluate(c, manifest); }; });

  auto* defend = app.add_subcommand("defend", "Typosquat Bloom filter");
  defend->require_subcommand(1);
  auto* dbuild = defend->add_subcommand("build", "Enumerate perturbations into a filter");
  DefendBuildArgs build_args;
  dbuild->add_option("-k,--edits", build_args.edits, "Substitutions to enumerate");
  dbuild->add_flag("--up-to", build_args.up_to, "Also insert variants with fewer edits");
  dbuild->add_flag("--include-original", build_args.include_original,
                   "Also insert the unmodified slds");
  dbuild->add_option("-o,--output", build_args.output, "Filter file path");
  dbuild->callback([&] { action = [&](Context& c) { return CmdDefendBuild(c, build_args); }; });

  auto* dcheck = defend->add_subcommand("check", "Query domains against a filter");
  std::string check_filter, check_input;
  std::vector<std::string> check_domains;
  std::size_t check_edits = 2;
  bool check_scan = false;
  dcheck->add_option("--filter", check_filter, "Filter file")->required();
  dcheck->add_option("domains", check_domains, "Domains to check");
  dcheck->add_option("--input", check_input, "File of domains to check");
  dcheck->add_flag("--scan", check_scan, "Also report the nearest source by edit distance");
  dcheck->add_option("--max-edit", check_edits, "Edit bound for --scan");
  dcheck->callback([&] {
    action = [&](Context& c) {
      return CmdDefendCheck(c, check_filter, check_domains, check_input, check_edits,
                            check_scan);
    };
  });

  auto* analyze = app.add_subcommand("analyze", "Feature and length distributions");
  analyze->require_subcommand(1);
  auto* kde = analyze->add_subcommand("kde", "Kernel density curves per feature");
  std::vector<std::string> kde_sets, kde_features;
  std::size_t kde_grid = 512;
  kde->add_option("--dataset", kde_sets, "name=path; the first is the reference")
      ->required();
  kde->add_option("--feature", kde_features,
                  "Entropy, Gini, 2gramMedian, 3gramMedian, SymbolRatio, "
                  "ConsecConsonantRatio (default all)");
  kde->add_option("--grid", kde_grid, "Minimum grid points");
  kde->callback([&] {
    action = [&](Context& c) { return CmdAnalyzeKde(c, kde_sets, kde_features, kde_grid); };
  });
  auto* lengths = analyze->add_subcommand("lengths", "Rendered length statistics");
  std::vector<std::string> len_sets;
  std::string len_output;
  lengths->add_option("--dataset", len_sets, "name=path")->required();
  lengths->add_option("-o,--output", len_output, "CSV path (default stdout)");
  lengths->callback([&] {
    action = [&](Context& c) { return CmdAnalyzeLengths(c, len_sets, len_output); };
  });

  auto* weak = app.add_subcommand("weak-label", "Weakly label benign domains from a query log");
  std::string weak_log, weak_output;
  weak->add_option("--log", weak_log, "domain,timestamp,response CSV")->required();
  weak->add_option("-o,--output", weak_output, "Domain list (default stdout)");
  weak->callback([&] { action = [&](Context& c) { return CmdWeakLabel(c, weak_log, weak_output); }; });

  std::vector<const char*> argv{"dgalab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  ctx.quiet = quiet;
  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("DGALAB_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) ctx.config.MergeFile(config_path);
    ctx.config.MergeEnvironment();
    if (!seed.empty()) ctx.config.Set("seed", seed);
    if (!out_dir.empty()) ctx.config.Set("out", out_dir);
    return action(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace dgalab::cli
