// Maximum-weight bipartite matching (Kuhn-Munkres) with deterministic
// lexicographic tie-breaking.
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gpushare {

/// Weights below this are treated as missing edges.
inline constexpr double kMinEdgeWeight = 1e-6;

/// Dense rows x cols weight matrix, row-major. Entries below kMinEdgeWeight
/// mean "no edge".
struct WeightMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> w;

  WeightMatrix() = default;
  WeightMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), w(r * c, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return w[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return w[i * cols + j]; }
};

/// Optimal assignment: result[i] is the column matched to row i, or -1.
/// Among optimal matchings the one whose (row, col) list is lexicographically
/// smallest wins, with rows and columns compared by index. O(n^3) in
/// max(rows, cols). Throws ValidationError on negative or non-finite weights.
std::vector<long> max_weight_assignment(const WeightMatrix& m);

struct BipartiteGraph {
  std::vector<std::string> left;
  std::vector<std::string> right;
  std::map<std::pair<std::string, std::string>, double> weights;

  void validate() const;
};

struct Matching {
  std::vector<std::pair<std::string, std::string>> pairs;  // sorted by left id
  double total = 0.0;  // summed in pair order
};

/// Node ids are ordered by string comparison for tie-breaking, so the result
/// does not depend on the order of `left`, `right` or insertion.
Matching max_weight_matching(const BipartiteGraph& g);

}  // namespace gpushare
