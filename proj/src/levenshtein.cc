#include "dgalab/levenshtein.h"

#include <algorithm>
#include <numeric>
#include <vector>

namespace dgalab {

namespace {

std::size_t Run(std::string_view a, std::string_view b, std::size_t cutoff) {
  if (a.size() < b.size()) std::swap(a, b);
  // Length difference alone is a lower bound.
  if (a.size() - b.size() > cutoff) return cutoff + 1;

  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    std::size_t best = row[0];
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1,
                         diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
      best = std::min(best, row[j]);
    }
    if (best > cutoff) return cutoff + 1;
  }
  return std::min(row[b.size()], cutoff + 1);
}

}  // namespace

std::size_t Levenshtein(std::string_view a, std::string_view b) {
  return Run(a, b, std::max(a.size(), b.size()));
}

std::size_t BoundedLevenshtein(std::string_view a, std::string_view b,
                               std::size_t max_distance) {
  return Run(a, b, max_distance);
}

}  // namespace dgalab
