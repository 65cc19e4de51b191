#include "gpushare/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gpushare/core.hpp"

namespace gpushare {

namespace {

// Square min-cost assignment on cost = -weight with row/column potentials.
// After solve(), cost(i, j) - row_pot[i] - col_pot[j] >= 0 everywhere and is
// zero on matched cells.
class Hungarian {
 public:
  Hungarian(const WeightMatrix& m, std::size_t n) : m_(m), n_(n) {
    weight_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
      for (std::size_t j = 0; j < m.cols; ++j) {
        const double w = m.at(i, j);
        if (w >= kMinEdgeWeight) weight_[i * n + j] = w;
      }
  }

  double cost(std::size_t i, std::size_t j) const { return -weight_[i * n_ + j]; }
  double weight(std::size_t i, std::size_t j) const { return weight_[i * n_ + j]; }

  void solve() {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based internally; index 0 is the virtual root column.
    std::vector<double> u(n_ + 1, 0.0), v(n_ + 1, 0.0), minv(n_ + 1);
    std::vector<std::size_t> p(n_ + 1, 0), way(n_ + 1, 0);
    std::vector<char> used(n_ + 1);
    for (std::size_t i = 1; i <= n_; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::fill(minv.begin(), minv.end(), kInf);
      std::fill(used.begin(), used.end(), 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = p[j0];
        double delta = kInf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n_; ++j) {
          if (used[j]) continue;
          const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= n_; ++j) {
          if (used[j]) {
            u[p[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (p[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        p[j0] = p[j1];
        j0 = j1;
      } while (j0 != 0);
    }
    row_pot_.assign(u.begin() + 1, u.end());
    col_pot_.assign(v.begin() + 1, v.end());
    row_col_.assign(n_, 0);
    col_row_.assign(n_, 0);
    for (std::size_t j = 1; j <= n_; ++j) {
      row_col_[p[j] - 1] = j - 1;
      col_row_[j - 1] = p[j] - 1;
    }
  }

  // Walks rows in index order and rotates the optimal matching along
  // alternating cycles of the equality subgraph so that each row takes the
  // smallest real column still compatible with optimality and with the
  // choices already fixed for earlier rows.
  void break_ties() {
    double max_w = 1.0;
    for (double w : weight_) max_w = std::max(max_w, w);
    tol_ = 1e-10 * max_w;

    enum Lock : char { free_row, locked_matched, locked_unmatched };
    std::vector<char> lock(n_, free_row);
    std::vector<char> reached(n_);
    std::vector<std::size_t> parent(n_), queue;
    queue.reserve(n_);

    for (std::size_t i = 0; i < m_.rows; ++i) {
      // Rows that can cede their column towards row i through a chain of
      // tight edges: r -> x means r may take x's current column.
      std::fill(reached.begin(), reached.end(), 0);
      queue.clear();
      queue.push_back(i);
      reached[i] = 1;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t x = queue[head];
        const std::size_t cx = row_col_[x];
        for (std::size_t r = 0; r < n_; ++r) {
          if (reached[r] || lock[r] == locked_matched || !tight(r, cx)) continue;
          if (lock[r] == locked_unmatched && is_real(r, cx)) continue;
          reached[r] = 1;
          parent[r] = x;
          queue.push_back(r);
        }
      }

      std::size_t choice = n_;
      for (std::size_t j = 0; j < m_.cols; ++j) {
        if (!is_real(i, j) || !tight(i, j)) continue;
        if (j == row_col_[i]) {
          choice = j;
          break;
        }
        const std::size_t mate = col_row_[j];
        if (reached[mate] && mate != i) {
          choice = j;
          break;
        }
      }
      if (choice == n_) {
        lock[i] = locked_unmatched;
        continue;
      }
      if (choice != row_col_[i]) rotate(i, choice, parent);
      lock[i] = locked_matched;
    }
  }

  std::vector<long> result() const {
    std::vector<long> out(m_.rows, -1);
    for (std::size_t i = 0; i < m_.rows; ++i)
      if (is_real(i, row_col_[i])) out[i] = static_cast<long>(row_col_[i]);
    return out;
  }

 private:
  bool tight(std::size_t i, std::size_t j) const {
    return cost(i, j) - row_pot_[i] - col_pot_[j] <= tol_;
  }
  bool is_real(std::size_t i, std::size_t j) const {
    return i < m_.rows && j < m_.cols && weight(i, j) >= kMinEdgeWeight;
  }

  void rotate(std::size_t i, std::size_t j, const std::vector<std::size_t>& parent) {
    std::vector<std::pair<std::size_t, std::size_t>> moves;  // (row, new column)
    for (std::size_t cur = col_row_[j]; cur != i; cur = parent[cur])
      moves.emplace_back(cur, row_col_[parent[cur]]);
    moves.emplace_back(i, j);
    for (auto [r, c] : moves) {
      row_col_[r] = c;
      col_row_[c] = r;
    }
  }

  const WeightMatrix& m_;
  std::size_t n_;
  std::vector<double> weight_;
  std::vector<double> row_pot_, col_pot_;
  std::vector<std::size_t> row_col_, col_row_;
  double tol_ = 0.0;
};

}  // namespace

std::vector<long> max_weight_assignment(const WeightMatrix& m) {
  if (m.w.size() != m.rows * m.cols) throw ValidationError("weight matrix: size mismatch");
  for (double w : m.w)
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("weight matrix: weights must be finite and >= 0");
  const std::size_t n = std::max(m.rows, m.cols);
  if (n == 0) return {};
  Hungarian h(m, n);
  h.solve();
  h.break_ties();
  return h.result();
}

void BipartiteGraph::validate() const {
  std::set<std::string> l(left.begin(), left.end()), r(right.begin(), right.end());
  if (l.size() != left.size()) throw ValidationError("bipartite graph: duplicate left node");
  if (r.size() != right.size()) throw ValidationError("bipartite graph: duplicate right node");
  for (const auto& [key, w] : weights) {
    if (!l.count(key.first)) throw ValidationError("bipartite graph: unknown left node '" + key.first + "'");
    if (!r.count(key.second))
      throw ValidationError("bipartite graph: unknown right node '" + key.second + "'");
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("bipartite graph: weight of (" + key.first + ", " + key.second +
                            ") must be finite and >= 0");
  }
}

Matching max_weight_matching(const BipartiteGraph& g) {
  g.validate();
  std::vector<std::string> left = g.left, right = g.right;
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());

  WeightMatrix m(left.size(), right.size());
  for (const auto& [key, w] : g.weights) {
    const auto i = std::lower_bound(left.begin(), left.end(), key.first) - left.begin();
    const auto j = std::lower_bound(right.begin(), right.end(), key.second) - right.begin();
    m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = w;
  }

  Matching out;
  const auto cols = max_weight_assignment(m);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] < 0) continue;
    const auto j = static_cast<std::size_t>(cols[i]);
    out.pairs.emplace_back(left[i], right[j]);
    out.total += m.at(i, j);
  }
  return out;
}

}  // namespace gpushare
