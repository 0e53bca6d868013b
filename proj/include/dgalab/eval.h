#ifndef DGALAB_EVAL_H_
#define DGALAB_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgalab/dataset.h"
#include "dgalab/feature_matrix.h"
#include "dgalab/features.h"
#include "dgalab/forest.h"

namespace dgalab {

// One operating point: everything scoring >= threshold is flagged. Counts are
// kept so rates can be recomputed exactly.
struct RocPoint {
  double threshold;
  std::size_t false_positives;
  std::size_t true_positives;
  double fpr;
  double tpr;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// Starts with a (0,0) point at threshold +inf that flags nothing, then one
// point per distinct score in descending order; the last point is (1,1).
struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  friend bool operator==(const RocCurve&, const RocCurve&) = default;
};

// Throws Error(kSingleClassData), Error(kInvalidParameters) on a length
// mismatch.
RocCurve Roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct OperatingPoint {
  double threshold;
  double fpr;
  double tpr;
};

// The most permissive real threshold whose FPR stays <= target, i.e. the
// highest-TPR point that respects the target. Throws Error(kUnachievable)
// when even the top score's point overshoots, Error(kInvalidParameters)
// unless 0 < target < 1.
OperatingPoint ThresholdAtFpr(const RocCurve& curve, double target);
double TprAtFpr(const RocCurve& curve, double target);

// Trapezoidal area under the curve over fpr in [0, target], interpolating
// at the cut, divided by target. Requires 0 < target <= 1.
double PartialAuc(const RocCurve& curve, double target);
double FullAuc(const RocCurve& curve);

// Fraction of scores >= threshold. Throws Error(kEmptyDataset).
double DetectionRate(std::span<const double> scores, double threshold);
double DetectionRate(const ForestModel& model, const FeatureMatrix& adversarial,
                     double threshold);

enum class ModelKind { kFanci, kBrf };
std::string_view ToString(ModelKind kind);
// Throws Error(kInvalidConfig).
ModelKind ParseModelKind(std::string_view text);
SchemaName SchemaFor(ModelKind kind);
ForestModel TrainModel(ModelKind kind, const FeatureMatrix& m, std::uint64_t seed);

struct NamedDataset {
  std::string name;
  Dataset data;
};

struct ExperimentInput {
  std::string dataset_id = "base";
  Dataset base_train;
  Dataset base_test;
  // Every example is treated as malicious regardless of its stored label.
  std::vector<NamedDataset> augmentations;
  std::vector<NamedDataset> adversarial_tests;
  ModelKind kind = ModelKind::kBrf;
  std::uint64_t seed = 0;
  std::vector<double> target_fprs{0.001, 0.01};
  std::string generated_at;
};

struct Detection {
  std::string adversarial_set;
  std::optional<double> rate;
  friend bool operator==(const Detection&, const Detection&) = default;
};

inline constexpr std::string_view kCellOk = "ok";
inline constexpr std::string_view kCellUnachievable = "unachievable";
inline constexpr std::string_view kCellError = "error";

struct FprCell {
  double target_fpr = 0.0;
  std::string status;  // ok | unachievable | error
  std::string message;
  std::optional<double> threshold;
  std::optional<double> achieved_fpr;
  std::optional<double> tpr;
  std::optional<double> partial_auc;
  std::vector<Detection> detections;
  friend bool operator==(const FprCell&, const FprCell&) = default;
};

struct EvalRow {
  std::string model_id;
  std::string training_set;  // "baseline" or "baseline+<augmentation>"
  std::string status;        // ok | error
  std::string message;
  std::size_t train_rows = 0;
  std::size_t skipped_rows = 0;  // rows dropped by feature extraction
  std::vector<FprCell> cells;
  RocCurve roc;
  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

inline constexpr int kReportVersion = 1;

struct EvalReport {
  int version = kReportVersion;
  std::string model_kind;
  std::string dataset_id;
  std::string generated_at;
  std::uint64_t seed = 0;
  std::vector<double> target_fprs;
  std::vector<std::string> adversarial_sets;
  std::vector<EvalRow> rows;

  std::size_t SucceededCells() const;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Baseline row plus one row per augmentation. N-gram tables come from the
// benign half of base_train. Training and metric failures are recorded in
// the affected row or cell and the remaining cells still run.
EvalReport RunExperiment(const ExperimentInput& input, const TldContext& tld_ctx);

// JSON layout is described in docs/formats.md. Throws Error(kIo).
void WriteReportJson(const EvalReport& report, const std::filesystem::path& path);
std::string ReportToJson(const EvalReport& report);
// Throws Error(kIo), Error(kVersionMismatch), Error(kInvalidConfig).
EvalReport ReadReportJson(const std::filesystem::path& path);
EvalReport ReportFromJson(std::string_view text);
// One row per (row, target FPR).
void WriteReportCsv(const EvalReport& report, const std::filesystem::path& path);

inline constexpr double kRocPlotMaxFpr = 0.01;
// "fpr,tpr" ascending, cut at max_fpr with an interpolated end point.
void WriteRocPoints(const RocCurve& curve, const std::filesystem::path& path,
                    double max_fpr = kRocPlotMaxFpr);
std::vector<std::pair<double, double>> ClipRoc(const RocCurve& curve, double max_fpr);

// report.json, report.csv and roc_<model>_<training set>.csv in `dir`.
// Returns the files written.
std::vector<std::filesystem::path> EmitReport(const EvalReport& report,
                                              const std::filesystem::path& dir);

}  // namespace dgalab

#endif  // DGALAB_EVAL_H_
