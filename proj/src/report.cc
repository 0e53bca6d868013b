#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "dgalab/error.h"
#include "dgalab/eval.h"

namespace dgalab {

namespace {

using nlohmann::json;

json Opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> GetOpt(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json RocToJson(const RocCurve& roc) {
  json points = json::array();
  for (const auto& p : roc.points) {
    points.push_back({std::isfinite(p.threshold) ? json(p.threshold) : json(nullptr),
                      p.false_positives, p.true_positives});
  }
  return {{"positives", roc.positives}, {"negatives", roc.negatives}, {"points", points}};
}

RocCurve RocFromJson(const json& j) {
  RocCurve roc;
  roc.positives = j.at("positives").get<std::size_t>();
  roc.negatives = j.at("negatives").get<std::size_t>();
  for (const auto& p : j.at("points")) {
    RocPoint pt;
    pt.threshold = p.at(0).is_null() ? std::numeric_limits<double>::infinity()
                                     : p.at(0).get<double>();
    pt.false_positives = p.at(1).get<std::size_t>();
    pt.true_positives = p.at(2).get<std::size_t>();
    pt.fpr = roc.negatives ? static_cast<double>(pt.false_positives) /
                                 static_cast<double>(roc.negatives)
                           : 0.0;
    pt.tpr = roc.positives ? static_cast<double>(pt.true_positives) /
                                 static_cast<double>(roc.positives)
                           : 0.0;
    roc.points.push_back(pt);
  }
  return roc;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Num(const std::optional<double>& v) { return v ? Num(*v) : ""; }

std::string FileSafe(std::string s) {
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '.';
    if (!ok) c = '_';
  }
  return s;
}

}  // namespace

std::string ReportToJson(const EvalReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json cells = json::array();
    for (const auto& c : row.cells) {
      json det = json::array();
      for (const auto& d : c.detections) {
        det.push_back({{"set", d.adversarial_set}, {"rate", Opt(d.rate)}});
      }
      cells.push_back({{"target_fpr", c.target_fpr},
                       {"status", c.status},
                       {"message", c.message},
                       {"threshold", Opt(c.threshold)},
                       {"achieved_fpr", Opt(c.achieved_fpr)},
                       {"tpr", Opt(c.tpr)},
                       {"partial_auc", Opt(c.partial_auc)},
                       {"detections", det}});
    }
    rows.push_back({{"model_id", row.model_id},
                    {"training_set", row.training_set},
                    {"status", row.status},
                    {"message", row.message},
                    {"train_rows", row.train_rows},
                    {"skipped_rows", row.skipped_rows},
                    {"cells", cells},
                    {"roc", RocToJson(row.roc)}});
  }
  json j = {{"version", report.version},
            {"model_kind", report.model_kind},
            {"dataset_id", report.dataset_id},
            {"generated_at", report.generated_at},
            {"seed", report.seed},
            {"target_fprs", report.target_fprs},
            {"adversarial_sets", report.adversarial_sets},
            {"rows", rows}};
  return j.dump(1) + "\n";
}

EvalReport ReportFromJson(std::string_view text) {
  EvalReport report;
  try {
    const json j = json::parse(text);
    report.version = j.at("version").get<int>();
    if (report.version != kReportVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "report version " + std::to_string(report.version));
    }
    report.model_kind = j.at("model_kind").get<std::string>();
    report.dataset_id = j.at("dataset_id").get<std::string>();
    report.generated_at = j.at("generated_at").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.target_fprs = j.at("target_fprs").get<std::vector<double>>();
    report.adversarial_sets = j.at("adversarial_sets").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
      EvalRow row;
      row.model_id = r.at("model_id").get<std::string>();
      row.training_set = r.at("training_set").get<std::string>();
      row.status = r.at("status").get<std::string>();
      row.message = r.at("message").get<std::string>();
      row.train_rows = r.at("train_rows").get<std::size_t>();
      row.skipped_rows = r.at("skipped_rows").get<std::size_t>();
      for (const auto& c : r.at("cells")) {
        FprCell cell;
        cell.target_fpr = c.at("target_fpr").get<double>();
        cell.status = c.at("status").get<std::string>();
        cell.message = c.at("message").get<std::string>();
        cell.threshold = GetOpt(c, "threshold");
        cell.achieved_fpr = GetOpt(c, "achieved_fpr");
        cell.tpr = GetOpt(c, "tpr");
        cell.partial_auc = GetOpt(c, "partial_auc");
        for (const auto& d : c.at("detections")) {
          cell.detections.push_back({d.at("set").get<std::string>(), GetOpt(d, "rate")});
        }
        row.cells.push_back(std::move(cell));
      }
      row.roc = RocFromJson(r.at("roc"));
      report.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("malformed report: ") + e.what());
  }
  return report;
}

void WriteReportJson(const EvalReport& report, const std::filesystem::path& path) {
  WriteText(path, ReportToJson(report));
}

EvalReport ReadReportJson(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ReportFromJson(buf.str());
}

void WriteReportCsv(const EvalReport& report, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "model,training_set,target_fpr,status,threshold,achieved_fpr,tpr,partial_auc";
  for (const auto& s : report.adversarial_sets) os << ",detect_" << s;
  os << "\n";
  for (const auto& row : report.rows) {
    for (const auto& c : row.cells) {
      os << row.model_id << "," << row.training_set << "," << Num(c.target_fpr) << ","
         << c.status << "," << Num(c.threshold) << "," << Num(c.achieved_fpr) << ","
         << Num(c.tpr) << "," << Num(c.partial_auc);
      for (const auto& d : c.detections) os << "," << Num(d.rate);
      os << "\n";
    }
  }
  WriteText(path, os.str());
}

std::vector<std::pair<double, double>> ClipRoc(const RocCurve& curve, double max_fpr) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const RocPoint& p = curve.points[i];
    if (p.fpr <= max_fpr) {
      out.emplace_back(p.fpr, p.tpr);
      continue;
    }
    if (i > 0 && curve.points[i - 1].fpr < max_fpr) {
      const RocPoint& q = curve.points[i - 1];
      const double y = q.tpr + (p.tpr - q.tpr) * (max_fpr - q.fpr) / (p.fpr - q.fpr);
      out.emplace_back(max_fpr, y);
    }
    break;
  }
  return out;
}

void WriteRocPoints(const RocCurve& curve, const std::filesystem::path& path,
                    double max_fpr) {
  std::ostringstream os;
  os << "fpr,tpr\n";
  for (const auto& [x, y] : ClipRoc(curve, max_fpr)) os << Num(x) << "," << Num(y) << "\n";
  WriteText(path, os.str());
}

std::vector<std::filesystem::path> EmitReport(const EvalReport& report,
                                              const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  std::vector<std::filesystem::path> written{dir / "report.json", dir / "report.csv"};
  WriteReportJson(report, written[0]);
  WriteReportCsv(report, written[1]);
  for (const auto& row : report.rows) {
    if (row.roc.points.empty()) continue;
    auto p = dir / ("roc_" + FileSafe(row.model_id) + "_" + FileSafe(row.training_set) +
                    ".csv");
    WriteRocPoints(row.roc, p);
    written.push_back(p);
  }
  return written;
}

}  // namespace dgalab
