#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace foodmatch {

struct FoodGraph;

/// Row/column indices of a min-weight matching over a dense cost matrix.
template <typename Scalar>
struct IndexMatching {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;  // (row, col), ascending row
  Scalar total_cost{};
  std::vector<Eigen::Index> unmatched_rows;
  std::vector<Eigen::Index> unmatched_cols;
};

namespace detail {

/// Shortest-augmenting-path Kuhn-Munkres with potentials for rows <= cols.
/// assignment[r] is the column matched to row r.
template <typename Derived>
std::vector<Eigen::Index> hungarian_rows_le_cols(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  const Scalar inf = std::numeric_limits<Scalar>::has_infinity ? std::numeric_limits<Scalar>::infinity()
                                                               : std::numeric_limits<Scalar>::max();
  // 1-based arrays; column 0 is the virtual root.
  std::vector<Scalar> u(static_cast<std::size_t>(n + 1), Scalar(0));
  std::vector<Scalar> v(static_cast<std::size_t>(m + 1), Scalar(0));
  std::vector<Eigen::Index> p(static_cast<std::size_t>(m + 1), 0);
  std::vector<Eigen::Index> way(static_cast<std::size_t>(m + 1), 0);
  std::vector<Scalar> minv(static_cast<std::size_t>(m + 1));
  std::vector<char> used(static_cast<std::size_t>(m + 1));

  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Eigen::Index i0 = p[static_cast<std::size_t>(j0)];
      Scalar delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= m; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) continue;
        Scalar cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
        if (cur < minv[sj]) {
          minv[sj] = cur;
          way[sj] = j0;
        }
        if (minv[sj] < delta) {
          delta = minv[sj];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= m; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) {
          u[static_cast<std::size_t>(p[sj])] += delta;
          v[sj] -= delta;
        } else {
          minv[sj] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n), -1);
  for (Eigen::Index j = 1; j <= m; ++j) {
    if (p[static_cast<std::size_t>(j)] != 0) {
      assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    }
  }
  return assignment;
}

}  // namespace detail

/// Minimum-weight matching of size min(rows, cols) over a dense matrix of
/// finite weights. Rectangular inputs are solved on the short side, which
/// is equivalent to padding with constant dummy rows/columns. Deterministic.
template <typename Derived>
IndexMatching<typename Derived::Scalar> min_weight_matching(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  IndexMatching<Scalar> result;
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  if (!cost.derived().allFinite()) throw std::invalid_argument("matching weights must be finite");

  std::vector<char> row_used(static_cast<std::size_t>(rows), 0);
  std::vector<char> col_used(static_cast<std::size_t>(cols), 0);
  if (rows > 0 && cols > 0) {
    if (rows <= cols) {
      auto assignment = detail::hungarian_rows_le_cols(cost);
      for (Eigen::Index r = 0; r < rows; ++r) {
        result.pairs.emplace_back(r, assignment[static_cast<std::size_t>(r)]);
      }
    } else {
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> transposed = cost.transpose();
      auto assignment = detail::hungarian_rows_le_cols(transposed);
      for (Eigen::Index c = 0; c < cols; ++c) {
        result.pairs.emplace_back(assignment[static_cast<std::size_t>(c)], c);
      }
      std::sort(result.pairs.begin(), result.pairs.end());
    }
  }
  for (const auto& [r, c] : result.pairs) {
    result.total_cost += cost(r, c);
    row_used[static_cast<std::size_t>(r)] = 1;
    col_used[static_cast<std::size_t>(c)] = 1;
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!row_used[static_cast<std::size_t>(r)]) result.unmatched_rows.push_back(r);
  }
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (!col_used[static_cast<std::size_t>(c)]) result.unmatched_cols.push_back(c);
  }
  return result;
}

/// Minimum-weight matching for matrices whose cells are either real edges
/// (< omega) or exactly omega. Only real edges are searched, with each row
/// free to settle for omega instead, so the work grows with the number of
/// real edges rather than rows x cols. Returns the same optimum as the dense
/// solver: min(rows, cols) pairs, omega pairs filled in from the leftover
/// rows and columns in ascending order.
IndexMatching<double> min_weight_matching_sparse(const Eigen::MatrixXd& cost, double omega);

/// Batch/vehicle view of a FoodGraph matching.
struct MatchResult {
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;  // (batch id, vehicle id)
  double total_cost = 0.0;
  std::vector<std::int32_t> unmatched_batches;
};

/// Sparse Kuhn-Munkres over the FoodGraph weights, Ω cells being missing
/// edges. Empty graph gives an empty result.
MatchResult min_weight_matching(const FoodGraph& graph);

}  // namespace foodmatch
