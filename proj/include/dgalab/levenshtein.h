#ifndef DGALAB_LEVENSHTEIN_H_
#define DGALAB_LEVENSHTEIN_H_

#include <cstddef>
#include <string_view>

namespace dgalab {

// Unit-cost edit distance (insert, delete, substitute).
std::size_t Levenshtein(std::string_view a, std::string_view b);

// As Levenshtein, but gives up once every cell of a DP row exceeds
// `max_distance`, returning max_distance + 1 in that case.
std::size_t BoundedLevenshtein(std::string_view a, std::string_view b,
                               std::size_t max_distance);

}  // namespace dgalab

#endif  // DGALAB_LEVENSHTEIN_H_
