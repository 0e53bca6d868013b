#include "dgalab/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dgalab/error.h"
#include "text_util.h"

namespace dgalab {

namespace {

// Kernel contributions beyond this many bandwidths are dropped; the lost
// mass is below 1e-14.
constexpr double kKernelReach = 8.0;
constexpr std::size_t kMaxGridPoints = 20000;

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // population
};

Moments ComputeMoments(std::span<const double> v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

std::vector<double> UniformGrid(double lo, double hi, std::size_t points) {
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

bool AllEqual(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double SilvermanBandwidth(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kDegenerateData, "KDE needs at least two values");
  }
  const Moments m = ComputeMoments(values);
  if (!(m.std > 0.0)) throw Error(ErrorCode::kDegenerateData, "values have zero variance");
  return 1.06 * m.std * std::pow(static_cast<double>(values.size()), -0.2);
}

std::vector<double> KdeOnGrid(std::span<const double> values, double bandwidth,
                              std::span<const double> grid) {
  std::vector<double> density(grid.size(), 0.0);
  const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  for (double x : values) {
    auto it = std::lower_bound(grid.begin(), grid.end(), x - kKernelReach * bandwidth);
    for (; it != grid.end() && *it <= x + kKernelReach * bandwidth; ++it) {
      const double u = (*it - x) / bandwidth;
      density[static_cast<std::size_t>(it - grid.begin())] += std::exp(-0.5 * u * u);
    }
  }
  for (double& d : density) d *= norm;
  return density;
}

DensityCurve Kde(std::span<const double> values, std::size_t grid_points) {
  if (grid_points < 2) throw Error(ErrorCode::kInvalidParameters, "grid needs >= 2 points");
  DensityCurve c;
  c.bandwidth = SilvermanBandwidth(values);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  c.grid = UniformGrid(*mn - 4 * c.bandwidth, *mx + 4 * c.bandwidth, grid_points);
  c.density = KdeOnGrid(values, c.bandwidth, c.grid);
  return c;
}

double TrapezoidIntegral(std::span<const double> x, std::span<const double> y) {
  double area = 0.0;
  for (std::size_t i = 1; i < x.size() && i < y.size(); ++i) {
    area += (x[i] - x[i - 1]) * (y[i] + y[i - 1]) / 2.0;
  }
  return area;
}

double L1Distance(const DensityCurve& a, const DensityCurve& b) {
  if (a.is_point_mass() || b.is_point_mass()) {
    return a.point_mass == b.point_mass ? 0.0 : 2.0;
  }
  if (a.grid != b.grid) {
    throw Error(ErrorCode::kInvalidParameters, "curves are on different grids");
  }
  std::vector<double> diff(a.grid.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = std::abs(a.density[i] - b.density[i]);
  }
  return TrapezoidIntegral(a.grid, diff);
}

LengthStats ComputeLengthStats(const Dataset& ds) {
  if (ds.empty()) throw Error(ErrorCode::kEmptyDataset, "no domains to measure");
  std::vector<double> lengths;
  lengths.reserve(ds.size());
  for (const auto& e : ds.examples()) {
    lengths.push_back(static_cast<double>(e.domain.RenderedLength()));
  }
  const Moments m = ComputeMoments(lengths);
  return {ds.name(), m.mean, m.std, ds.size()};
}

const std::vector<KdeFeature>& AllKdeFeatures() {
  static const std::vector<KdeFeature> all{
      KdeFeature::kEntropy,       KdeFeature::kGini,
      KdeFeature::kBigramMedian,  KdeFeature::kTrigramMedian,
      KdeFeature::kSymbolRatio,   KdeFeature::kConsecConsonantRatio};
  return all;
}

std::string_view ToString(KdeFeature f) {
  switch (f) {
    case KdeFeature::kEntropy: return "Entropy";
    case KdeFeature::kGini: return "Gini";
    case KdeFeature::kBigramMedian: return "2gramMedian";
    case KdeFeature::kTrigramMedian: return "3gramMedian";
    case KdeFeature::kSymbolRatio: return "SymbolRatio";
    case KdeFeature::kConsecConsonantRatio: return "ConsecConsonantRatio";
  }
  return "?";
}

KdeFeature ParseKdeFeature(std::string_view text) {
  const std::string want = internal::Lower(std::string(text));
  for (KdeFeature f : AllKdeFeatures()) {
    if (internal::Lower(std::string(ToString(f))) == want) return f;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown KDE feature '" + std::string(text) + "'");
}

std::vector<double> FeatureValues(const Dataset& ds, KdeFeature f,
                                  const NgramTables& tables) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& e : ds.examples()) {
    const std::string& sld = e.domain.sld();
    try {
      switch (f) {
        case KdeFeature::kEntropy: out.push_back(Entropy(sld)); break;
        case KdeFeature::kGini: out.push_back(GiniIndex(sld)); break;
        case KdeFeature::kBigramMedian:
          out.push_back(NgramMedian(sld, tables.bigram, false));
          break;
        case KdeFeature::kTrigramMedian:
          out.push_back(NgramMedian(sld, tables.trigram, false));
          break;
        case KdeFeature::kSymbolRatio:
        case KdeFeature::kConsecConsonantRatio: {
          const auto& full = FeatureSchema::Get(SchemaName::kFull);
          const std::string_view name = f == KdeFeature::kSymbolRatio
                                            ? "symbol_ratio"
                                            : "consecutive_consonant_ratio";
          const auto& cols = full.columns();
          const auto col = static_cast<std::size_t>(
              std::find_if(cols.begin(), cols.end(),
                           [&](const FeatureColumn& c) { return c.name == name; }) -
              cols.begin());
          static const TldContext kNoTlds;
          const FeatureVector fv = Extract(e.domain, full, &tables, kNoTlds);
          out.push_back(fv.values[col]);
          break;
        }
      }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kStringTooShort &&
          err.code() != ErrorCode::kFeatureExtraction &&
          err.code() != ErrorCode::kEmptyString) {
        throw;
      }
    }
  }
  return out;
}

std::vector<DensityCurve> CompareFeatures(std::span<const NamedDataset> datasets,
                                          std::span<const KdeFeature> features,
                                          const NgramTables& tables,
                                          std::size_t min_grid_points) {
  std::vector<DensityCurve> out(datasets.size() * features.size());
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    std::vector<std::vector<double>> values;
    std::vector<double> bandwidths(datasets.size(), 0.0);
    double lo = 0, hi = 0, widest = 0, narrowest = 0;
    bool any_range = false, any_curve = false;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      values.push_back(FeatureValues(datasets[di].data, features[fi], tables));
      const auto& v = values.back();
      if (v.size() < 2) {
        throw Error(ErrorCode::kDegenerateData,
                    "too few " + std::string(ToString(features[fi])) + " values in " +
                        datasets[di].name);
      }
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      lo = any_range ? std::min(lo, *mn) : *mn;
      hi = any_range ? std::max(hi, *mx) : *mx;
      any_range = true;
      if (!AllEqual(v)) {
        bandwidths[di] = SilvermanBandwidth(v);
        widest = any_curve ? std::max(widest, bandwidths[di]) : bandwidths[di];
        narrowest = any_curve ? std::min(narrowest, bandwidths[di]) : bandwidths[di];
        any_curve = true;
      }
    }
    std::vector<double> grid;
    if (any_curve) {
      lo -= 4 * widest;
      hi += 4 * widest;
      const auto needed = static_cast<std::size_t>(std::ceil((hi - lo) / narrowest)) + 1;
      grid = UniformGrid(lo, hi, std::clamp(needed, min_grid_points, kMaxGridPoints));
    }
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      DensityCurve& c = out[di * features.size() + fi];
      c.feature = std::string(ToString(features[fi]));
      c.dataset = datasets[di].name;
      if (bandwidths[di] == 0.0) {
        c.point_mass = values[di].front();
        continue;
      }
      c.bandwidth = bandwidths[di];
      c.grid = grid;
      c.density = KdeOnGrid(values[di], c.bandwidth, grid);
    }
  }
  return out;
}

void WriteDensityCsv(const DensityCurve& curve, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "x,density\n";
  if (curve.is_point_mass()) {
    os << Num(*curve.point_mass) << ",inf\n";
  } else {
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
      os << Num(curve.grid[i]) << "," << Num(curve.density[i]) << "\n";
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << os.str();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<std::filesystem::path> WriteDensityCsvs(std::span<const DensityCurve> curves,
                                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  std::vector<std::filesystem::path> written;
  for (const auto& c : curves) {
    written.push_back(dir / ("kde_" + c.dataset + "_" + c.feature + ".csv"));
    WriteDensityCsv(c, written.back());
  }
  return written;
}

void WriteLengthStatsCsv(std::span<const LengthStats> stats, std::ostream& out) {
  out << "dataset,mean,std,count\n";
  for (const auto& s : stats) {
    out << s.dataset << "," << Num(s.mean) << "," << Num(s.std) << "," << s.count << "\n";
  }
}

void WriteLengthStatsCsv(std::span<const LengthStats> stats,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  WriteLengthStatsCsv(stats, out);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace dgalab
