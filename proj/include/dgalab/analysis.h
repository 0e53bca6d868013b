#ifndef DGALAB_ANALYSIS_H_
#define DGALAB_ANALYSIS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgalab/dataset.h"
#include "dgalab/eval.h"
#include "dgalab/features.h"

namespace dgalab {

struct DensityCurve {
  std::string feature;
  std::string dataset;
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  // Set instead of a curve when every value is identical.
  std::optional<double> point_mass;

  bool is_point_mass() const { return point_mass.has_value(); }
  friend bool operator==(const DensityCurve&, const DensityCurve&) = default;
};

// Silverman's rule, 1.06 * population std * n^(-1/5).
double SilvermanBandwidth(std::span<const double> values);

// Gaussian KDE on `grid_points` evenly spaced points covering
// [min - 4b, max + 4b]. Throws Error(kDegenerateData) for fewer than two
// values or zero variance.
DensityCurve Kde(std::span<const double> values, std::size_t grid_points);
// Same estimator evaluated on a caller-supplied grid.
std::vector<double> KdeOnGrid(std::span<const double> values, double bandwidth,
                              std::span<const double> grid);

double TrapezoidIntegral(std::span<const double> x, std::span<const double> y);

// L1 distance of two curves on the same grid. Against a point mass the
// distance is 2 unless both are the same point mass.
double L1Distance(const DensityCurve& a, const DensityCurve& b);

struct LengthStats {
  std::string dataset;
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

// Rendered lengths, dot included. Throws Error(kEmptyDataset).
LengthStats ComputeLengthStats(const Dataset& ds);

enum class KdeFeature {
  kEntropy,
  kGini,
  kBigramMedian,
  kTrigramMedian,
  kSymbolRatio,
  kConsecConsonantRatio
};

const std::vector<KdeFeature>& AllKdeFeatures();
std::string_view ToString(KdeFeature f);
// Accepts the display names (Entropy, 2gramMedian, ...) case-insensitively.
KdeFeature ParseKdeFeature(std::string_view text);

// Per-sld values; rows whose sld is too short for the feature are skipped.
std::vector<double> FeatureValues(const Dataset& ds, KdeFeature f,
                                  const NgramTables& tables);

// One curve per (dataset, feature), dataset-major. Curves of one feature
// share a grid spanning every dataset, spaced no wider than the smallest
// bandwidth. A dataset whose values are constant yields a point mass.
std::vector<DensityCurve> CompareFeatures(std::span<const NamedDataset> datasets,
                                          std::span<const KdeFeature> features,
                                          const NgramTables& tables,
                                          std::size_t min_grid_points = 512);

// "x,density" rows. A point mass is written as a single row with density
// "inf". Throws Error(kIo).
void WriteDensityCsv(const DensityCurve& curve, const std::filesystem::path& path);
// kde_<dataset>_<feature>.csv in `dir`; returns the files written.
std::vector<std::filesystem::path> WriteDensityCsvs(std::span<const DensityCurve> curves,
                                                    const std::filesystem::path& dir);
// "dataset,mean,std,count".
void WriteLengthStatsCsv(std::span<const LengthStats> stats, std::ostream& out);
void WriteLengthStatsCsv(std::span<const LengthStats> stats,
                         const std::filesystem::path& path);

}  // namespace dgalab

#endif  // DGALAB_ANALYSIS_H_
