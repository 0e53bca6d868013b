#ifndef DGALAB_MANIFEST_H_
#define DGALAB_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgalab/eval.h"
#include "dgalab/features.h"

namespace dgalab {

// Where a set of domains comes from: a file, a CharBot run, or the
// uniform-random-string generator.
struct DomainSource {
  std::string name;
  std::filesystem::path path;
  std::size_t limit = 0;  // 0 = everything
  std::size_t min_sld_len = 1;
  struct Charbot {
    std::string date;
    std::size_t count = 0;
  };
  std::optional<Charbot> charbot;
  struct RandomDga {
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::size_t min_len = 8;
    std::size_t max_len = 20;
  };
  std::optional<RandomDga> random_dga;
};

// Declarative description of a baseline-vs-augmented run. The JSON keys
// match the field names; see docs/formats.md.
struct ExperimentManifest {
  std::string dataset_id = "base";
  ModelKind model = ModelKind::kBrf;
  std::uint64_t seed = 0;
  std::vector<double> target_fprs{0.001, 0.01};
  DomainSource benign;
  DomainSource malicious;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  DomainSource charbot_sources;  // used by CharBot-generated sets
  std::vector<DomainSource> augmentations;
  std::vector<DomainSource> adversarial_tests;
  std::filesystem::path valid_tlds;
  std::filesystem::path malicious_tlds;
};

// Relative paths resolve against the manifest's directory; a leading
// "@data/" resolves against `data_dir`. Throws Error(kIo),
// Error(kInvalidConfig).
ExperimentManifest LoadManifest(const std::filesystem::path& path,
                                const std::filesystem::path& data_dir);
ExperimentManifest ParseManifest(std::string_view json_text,
                                 const std::filesystem::path& base_dir,
                                 const std::filesystem::path& data_dir);

// A seed given as an integer or as an ISO date. Throws Error(kInvalidDate).
std::uint64_t ParseSeed(std::string_view text);

// Loads or generates the domains of `src` with the given label. CharBot sets
// draw from `charbot_sources`.
Dataset MaterializeSource(const DomainSource& src, Label label,
                          const Dataset* charbot_sources);

struct PreparedExperiment {
  ExperimentInput input;
  TldContext tld_ctx;
};

// Loads everything and splits base data. Generated adversarial test sets
// drop any domain that also appears in an augmentation set.
PreparedExperiment PrepareExperiment(const ExperimentManifest& manifest);

}  // namespace dgalab

#endif  // DGALAB_MANIFEST_H_
