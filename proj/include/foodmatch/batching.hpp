#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "foodmatch/costmodel.hpp"

namespace foodmatch {

using BatchId = std::int32_t;

/// Orders delivered together under one plan. `cost` is Cost(v_i, π_i) for a
/// vehicle that starts at the plan's first stop.
struct Batch {
  BatchId id = 0;
  std::vector<Order> orders;
  RoutePlan plan;
  double cost = 0.0;
  NodeId first_pickup = 0;

  int item_count() const;
};

/// Costs an order set on a simulated vehicle placed at the set's first stop.
using BatchCostFn = std::function<CostedPlan(std::span<const Order>)>;

/// The production cost function: cheapest plan with free start and
/// time(A(o)) = 0, evaluated at clock `t`.
BatchCostFn simulated_vehicle_cost(ShortestPaths& sp, double t);

/// Result of evaluating a potential merge.
struct MergeCandidate {
  double weight = 0.0;      // w_{i,j}, clamped at 0
  double raw_weight = 0.0;  // before clamping; negative only by round-off
  CostedPlan merged;
};

/// w_{i,j} = Cost(π_i ∪ π_j) - Cost(π_i) - Cost(π_j); nullopt when the merge
/// would break MaxO/MaxI or has no feasible plan.
std::optional<MergeCandidate> pair_weight(const Batch& a, const Batch& b, const Capacity& capacity,
                                          const BatchCostFn& cost_fn);

std::optional<MergeCandidate> pair_weight(ShortestPaths& sp, const Batch& a, const Batch& b,
                                          double t, const Capacity& capacity = {});

/// Batch-level graph used by the clustering loop. Edges are undirected and
/// stored symmetrically.
class OrderGraph {
 public:
  struct EdgeEntry {
    BatchId a = 0;
    BatchId b = 0;
    double weight = 0.0;
  };

  const std::map<BatchId, Batch>& batches() const { return batches_; }
  std::size_t size() const { return batches_.size(); }
  std::size_t edge_count() const;
  /// Every edge once, a < b, in (a, b) order.
  std::vector<EdgeEntry> edges() const;
  std::optional<double> weight(BatchId a, BatchId b) const;

  /// Running Σ Cost(π), maintained incrementally across merges.
  double total_cost() const { return total_cost_; }
  /// Σ Cost(π) / |Π|.
  double avg_cost() const;

 private:
  friend class BatchClusterer;
  std::map<BatchId, Batch> batches_;
  std::map<BatchId, std::map<BatchId, double>> adjacency_;
  double total_cost_ = 0.0;
};

/// One singleton batch per order, an edge for every feasible pair.
OrderGraph build_order_graph(std::span<const Order> orders, const Capacity& capacity,
                             const BatchCostFn& cost_fn);
OrderGraph build_order_graph(ShortestPaths& sp, std::span<const Order> orders, double t,
                             const Capacity& capacity = {});

double avg_cost(const OrderGraph& graph);

struct ClusterDiagnostics {
  std::vector<double> avg_cost_trace;  // AvgCost before the first merge and after each merge
  std::vector<std::pair<BatchId, BatchId>> merges;
  std::size_t capacity_skips = 0;
  double final_total_cost = 0.0;
};

struct ClusterResult {
  std::vector<Batch> batches;  // ordered by batch id
  ClusterDiagnostics diagnostics;
};

/// Iterative agglomerative batching: merge the endpoints of the
/// minimum-weight edge (ties: lowest id pair) as long as AvgCost stays <= eta
/// after the merge. Singletons keep their
/// order id as batch id; merged batches get fresh ids above every order id.
ClusterResult cluster(std::span<const Order> orders, double eta, const Capacity& capacity,
                      const BatchCostFn& cost_fn);
ClusterResult cluster(ShortestPaths& sp, std::span<const Order> orders, double eta, double t,
                      const Capacity& capacity = {});

}  // namespace foodmatch
