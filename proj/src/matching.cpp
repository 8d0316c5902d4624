#include "foodmatch/matching.hpp"

#include <queue>

#include "foodmatch/foodgraph.hpp"

namespace foodmatch {

IndexMatching<double> min_weight_matching_sparse(const Eigen::MatrixXd& cost, double omega) {
  if (!cost.allFinite()) throw std::invalid_argument("matching weights must be finite");
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  const auto n_rows = static_cast<std::size_t>(rows);
  const auto n_cols = static_cast<std::size_t>(cols);

  // Row-wise adjacency of the real edges.
  std::vector<std::size_t> offset(n_rows + 1, 0);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (cost(r, c) < omega) ++offset[static_cast<std::size_t>(r) + 1];
    }
  }
  for (std::size_t r = 0; r < n_rows; ++r) offset[r + 1] += offset[r];
  std::vector<std::size_t> adj_col(offset.back());
  std::vector<double> adj_weight(offset.back());
  {
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (cost(r, c) < omega) {
          std::size_t& at = fill[static_cast<std::size_t>(r)];
          adj_col[at] = static_cast<std::size_t>(c);
          adj_weight[at] = cost(r, c);
          ++at;
        }
      }
    }
  }

  // Column n_cols + r is row r's private omega option.
  const std::size_t total_cols = n_cols + n_rows;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n_rows, 0.0), v(total_cols, 0.0), dist(total_cols, inf);
  std::vector<std::size_t> col_match(total_cols, kNone), row_match(n_rows, kNone), pred(total_cols, kNone);
  std::vector<char> done(total_cols, 0);
  std::vector<std::size_t> touched, finalized;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;

  auto for_each_edge = [&](std::size_t r, auto&& f) {
    for (std::size_t k = offset[r]; k < offset[r + 1]; ++k) f(adj_col[k], adj_weight[k]);
    f(n_cols + r, omega);
  };
  auto relax = [&](std::size_t r, double base) {
    for_each_edge(r, [&](std::size_t c, double w) {
      if (done[c]) return;
      const double nd = base + w - u[r] - v[c];
      if (nd < dist[c]) {
        if (dist[c] == inf) touched.push_back(c);
        dist[c] = nd;
        pred[c] = r;
        heap.emplace(nd, c);
      }
    });
  };

  for (std::size_t r0 = 0; r0 < n_rows; ++r0) {
    double lowest = inf;
    for_each_edge(r0, [&](std::size_t c, double w) { lowest = std::min(lowest, w - v[c]); });
    u[r0] = lowest;
    relax(r0, 0.0);

    std::size_t free_col = kNone;
    double reach = 0.0;
    while (!heap.empty()) {
      auto [d, c] = heap.top();
      heap.pop();
      if (done[c] || d > dist[c]) continue;
      done[c] = 1;
      finalized.push_back(c);
      if (col_match[c] == kNone) {
        free_col = c;
        reach = d;
        break;
      }
      relax(col_match[c], d);
    }

    for (std::size_t c : finalized) {
      const double delta = reach - dist[c];
      v[c] -= delta;
      if (col_match[c] != kNone) u[col_match[c]] += delta;
    }
    u[r0] += reach;

    for (std::size_t c = free_col;;) {
      const std::size_t r = pred[c];
      const std::size_t previous = row_match[r];
      col_match[c] = r;
      row_match[r] = c;
      if (r == r0) break;
      c = previous;
    }

    for (std::size_t c : touched) {
      dist[c] = inf;
      done[c] = 0;
      pred[c] = kNone;
    }
    touched.clear();
    finalized.clear();
    heap = {};
  }

  IndexMatching<double> result;
  std::vector<char> col_used(n_cols, 0);
  std::vector<std::size_t> settled;
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (row_match[r] < n_cols) {
      col_used[row_match[r]] = 1;
      result.pairs.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(row_match[r]));
    } else {
      settled.push_back(r);
    }
  }
  // Pair leftover rows with leftover columns at omega, lowest indices first.
  std::size_t extra = std::min(n_rows, n_cols) - result.pairs.size();
  std::size_t next_col = 0;
  for (std::size_t r : settled) {
    if (extra == 0) break;
    while (col_used[next_col]) ++next_col;
    col_used[next_col] = 1;
    result.pairs.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(next_col));
    --extra;
  }
  std::sort(result.pairs.begin(), result.pairs.end());

  std::vector<char> row_used(n_rows, 0);
  for (const auto& [r, c] : result.pairs) {
    result.total_cost += cost(r, c);
    row_used[static_cast<std::size_t>(r)] = 1;
  }
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!row_used[r]) result.unmatched_rows.push_back(static_cast<Eigen::Index>(r));
  }
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (!col_used[c]) result.unmatched_cols.push_back(static_cast<Eigen::Index>(c));
  }
  return result;
}

MatchResult min_weight_matching(const FoodGraph& graph) {
  MatchResult result;
  auto indices = min_weight_matching_sparse(graph.weights, graph.omega);
  result.total_cost = indices.total_cost;
  for (const auto& [row, col] : indices.pairs) {
    result.pairs.emplace_back(graph.batches[static_cast<std::size_t>(row)].id,
                              graph.vehicles[static_cast<std::size_t>(col)].id);
  }
  for (Eigen::Index row : indices.unmatched_rows) {
    result.unmatched_batches.push_back(graph.batches[static_cast<std::size_t>(row)].id);
  }
  return result;
}

}  // namespace foodmatch
