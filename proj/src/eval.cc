#include "dgalab/eval.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "dgalab/error.h"
#include "text_util.h"

namespace dgalab {

RocCurve Roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidParameters, "scores and labels differ in length");
  }
  RocCurve curve;
  for (std::uint8_t l : labels) (l ? curve.positives : curve.negatives) += 1;
  if (curve.positives == 0 || curve.negatives == 0) {
    throw Error(ErrorCode::kSingleClassData, "ROC needs both classes");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto neg = static_cast<double>(curve.negatives);
  const auto pos = static_cast<double>(curve.positives);
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0, 0, 0.0, 0.0});
  std::size_t fp = 0, tp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      (labels[order[i]] ? tp : fp) += 1;
    }
    curve.points.push_back({s, fp, tp, static_cast<double>(fp) / neg,
                            static_cast<double>(tp) / pos});
  }
  return curve;
}

namespace {

void CheckCurve(const RocCurve& curve) {
  if (curve.points.size() < 2 || curve.positives == 0 || curve.negatives == 0) {
    throw Error(ErrorCode::kSingleClassData, "ROC curve without both classes");
  }
}

}  // namespace

OperatingPoint ThresholdAtFpr(const RocCurve& curve, double target) {
  if (!(target > 0.0 && target < 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "target FPR must lie in (0, 1)");
  }
  CheckCurve(curve);
  const RocPoint* best = nullptr;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (curve.points[i].fpr > target) break;
    best = &curve.points[i];
  }
  if (best == nullptr) {
    throw Error(ErrorCode::kUnachievable,
                "no threshold reaches FPR <= " + std::to_string(target) +
                    "; the strictest one gives " +
                    std::to_string(curve.points[1].fpr));
  }
  return {best->threshold, best->fpr, best->tpr};
}

double TprAtFpr(const RocCurve& curve, double target) {
  return ThresholdAtFpr(curve, target).tpr;
}

double PartialAuc(const RocCurve& curve, double target) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "partial AUC target must lie in (0, 1]");
  }
  CheckCurve(curve);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const double x0 = curve.points[i - 1].fpr, y0 = curve.points[i - 1].tpr;
    const double x1 = curve.points[i].fpr, y1 = curve.points[i].tpr;
    if (x0 >= target) break;
    if (x1 <= target) {
      area += (x1 - x0) * (y0 + y1) / 2.0;
    } else {
      const double y = y0 + (y1 - y0) * (target - x0) / (x1 - x0);
      area += (target - x0) * (y0 + y) / 2.0;
      break;
    }
  }
  return area / target;
}

double FullAuc(const RocCurve& curve) { return PartialAuc(curve, 1.0); }

double DetectionRate(std::span<const double> scores, double threshold) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyDataset, "no adversarial samples");
  const auto hits = std::count_if(scores.begin(), scores.end(),
                                  [threshold](double s) { return s >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double DetectionRate(const ForestModel& model, const FeatureMatrix& adversarial,
                     double threshold) {
  const auto scores = ScoreMatrix(model, adversarial);
  return DetectionRate(scores, threshold);
}

std::string_view ToString(ModelKind kind) {
  return kind == ModelKind::kFanci ? "fanci" : "brf";
}

ModelKind ParseModelKind(std::string_view text) {
  const std::string lower = internal::Lower(text);
  if (lower == "fanci") return ModelKind::kFanci;
  if (lower == "brf") return ModelKind::kBrf;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown model kind '" + std::string(text) + "' (fanci|brf)");
}

SchemaName SchemaFor(ModelKind kind) {
  return kind == ModelKind::kFanci ? SchemaName::kFanci : SchemaName::kBrf;
}

ForestModel TrainModel(ModelKind kind, const FeatureMatrix& m, std::uint64_t seed) {
  if (m.schema() != SchemaFor(kind)) {
    throw Error(ErrorCode::kSchemaMismatch,
                std::string(ToString(kind)) + " needs " +
                    std::string(ToString(SchemaFor(kind))) + " features, got " +
                    std::string(ToString(m.schema())));
  }
  return kind == ModelKind::kFanci ? TrainFanci(m, seed) : TrainBrf(m, seed);
}

std::size_t EvalReport::SucceededCells() const {
  std::size_t n = 0;
  for (const auto& row : rows) {
    for (const auto& cell : row.cells) n += cell.status == kCellOk;
  }
  return n;
}

namespace {

Dataset AsMalicious(const Dataset& ds) {
  Dataset out(ds.name());
  for (auto e : ds.examples()) {
    e.label = Label::kMalicious;
    out.Add(std::move(e));
  }
  return out;
}

struct AdversarialScores {
  std::string name;
  std::vector<double> scores;
  std::string problem;  // why the set cannot be scored, if it cannot
};

void FailRow(EvalRow& row, const std::vector<double>& targets,
             const std::vector<AdversarialScores>& adv, const std::string& message) {
  row.status = std::string(kCellError);
  row.message = message;
  row.cells.clear();
  for (double t : targets) {
    FprCell cell;
    cell.target_fpr = t;
    cell.status = std::string(kCellError);
    cell.message = message;
    for (const auto& a : adv) cell.detections.push_back({a.name, std::nullopt});
    row.cells.push_back(std::move(cell));
  }
}

}  // namespace

EvalReport RunExperiment(const ExperimentInput& input, const TldContext& tld_ctx) {
  for (double t : input.target_fprs) {
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "target FPRs must lie in (0, 1)");
    }
  }
  EvalReport report;
  report.model_kind = std::string(ToString(input.kind));
  report.dataset_id = input.dataset_id;
  report.generated_at = input.generated_at;
  report.seed = input.seed;
  report.target_fprs = input.target_fprs;
  for (const auto& a : input.adversarial_tests) report.adversarial_sets.push_back(a.name);

  const SchemaName schema = SchemaFor(input.kind);
  std::optional<NgramTables> tables;
  if (FeatureSchema::Get(schema).needs_ngram_tables()) {
    Dataset benign("benign-train");
    for (const auto& e : input.base_train.examples()) {
      if (e.label == Label::kBenign) benign.Add(e);
    }
    tables = BuildNgramTables(benign);
  }
  const NgramTables* tp = tables ? &*tables : nullptr;

  FeaturizeResult train = Featurize(input.base_train, schema, tp, tld_ctx);
  FeaturizeResult test = Featurize(input.base_test, schema, tp, tld_ctx);
  if (train.matrix.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no usable training rows");
  }
  if (test.matrix.empty()) throw Error(ErrorCode::kEmptyDataset, "no usable test rows");

  std::vector<FeaturizeResult> augmented;
  for (const auto& a : input.augmentations) {
    augmented.push_back(Featurize(AsMalicious(a.data), schema, tp, tld_ctx));
  }
  std::vector<FeatureMatrix> adversarial;
  for (const auto& a : input.adversarial_tests) {
    adversarial.push_back(Featurize(AsMalicious(a.data), schema, tp, tld_ctx).matrix);
  }

  auto evaluate = [&](const std::string& training_set, const FeatureMatrix& matrix,
                      std::size_t skipped) {
    EvalRow row;
    row.model_id = report.model_kind;
    row.training_set = training_set;
    row.train_rows = matrix.rows();
    row.skipped_rows = skipped;
    row.status = std::string(kCellOk);

    std::vector<AdversarialScores> adv;
    for (std::size_t j = 0; j < adversarial.size(); ++j) {
      adv.push_back({input.adversarial_tests[j].name, {}, {}});
      if (adversarial[j].empty()) adv.back().problem = "adversarial set has no usable rows";
    }
    ForestModel model;
    try {
      model = TrainModel(input.kind, matrix, input.seed);
      const auto scores = ScoreMatrix(model, test.matrix);
      row.roc = Roc(scores, test.matrix.labels());
      for (std::size_t j = 0; j < adversarial.size(); ++j) {
        if (adv[j].problem.empty()) adv[j].scores = ScoreMatrix(model, adversarial[j]);
      }
    } catch (const Error& e) {
      FailRow(row, input.target_fprs, adv, e.what());
      return row;
    }

    for (double t : input.target_fprs) {
      FprCell cell;
      cell.target_fpr = t;
      cell.partial_auc = PartialAuc(row.roc, t);
      try {
        const OperatingPoint op = ThresholdAtFpr(row.roc, t);
        cell.status = std::string(kCellOk);
        cell.threshold = op.threshold;
        cell.achieved_fpr = op.fpr;
        cell.tpr = op.tpr;
        for (const auto& a : adv) {
          Detection d{a.name, std::nullopt};
          if (a.problem.empty()) d.rate = DetectionRate(a.scores, op.threshold);
          cell.detections.push_back(std::move(d));
        }
      } catch (const Error& e) {
        cell.status = std::string(e.code() == ErrorCode::kUnachievable ? kCellUnachievable
                                                                       : kCellError);
        cell.message = e.what();
        for (const auto& a : adv) cell.detections.push_back({a.name, std::nullopt});
      }
      row.cells.push_back(std::move(cell));
    }
    return row;
  };

  report.rows.push_back(evaluate("baseline", train.matrix, train.errors.size()));
  for (std::size_t i = 0; i < augmented.size(); ++i) {
    FeatureMatrix combined = train.matrix;
    combined.Append(augmented[i].matrix);
    report.rows.push_back(evaluate("baseline+" + input.augmentations[i].name, combined,
                                   train.errors.size() + augmented[i].errors.size()));
  }
  return report;
}

}  // namespace dgalab
