#include "foodmatch/batching.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>

namespace foodmatch {

int Batch::item_count() const {
  int items = 0;
  for (const Order& o : orders) items += o.items;
  return items;
}

BatchCostFn simulated_vehicle_cost(ShortestPaths& sp, double t) {
  return [&sp, t](std::span<const Order> orders) {
    return cheapest_plan(sp, {std::nullopt, {}, orders, t, true});
  };
}

namespace {

std::vector<Order> merged_orders(const Batch& a, const Batch& b) {
  std::vector<Order> all(a.orders);
  all.insert(all.end(), b.orders.begin(), b.orders.end());
  std::sort(all.begin(), all.end(), [](const Order& x, const Order& y) { return x.id < y.id; });
  return all;
}

bool mergeable(const Batch& a, const Batch& b, const Capacity& capacity) {
  return a.orders.size() + b.orders.size() <= static_cast<std::size_t>(capacity.max_orders) &&
         a.item_count() + b.item_count() <= capacity.max_items;
}

}  // namespace

std::optional<MergeCandidate> pair_weight(const Batch& a, const Batch& b, const Capacity& capacity,
                                          const BatchCostFn& cost_fn) {
  if (!mergeable(a, b, capacity)) return std::nullopt;
  std::vector<Order> orders = merged_orders(a, b);
  CostedPlan merged = cost_fn(orders);
  if (!merged.feasible()) return std::nullopt;
  double raw = merged.cost - (a.cost + b.cost);
  // Subsequence argument: raw >= 0 up to floating-point round-off.
  return MergeCandidate{std::max(0.0, raw), raw, std::move(merged)};
}

std::optional<MergeCandidate> pair_weight(ShortestPaths& sp, const Batch& a, const Batch& b,
                                          double t, const Capacity& capacity) {
  return pair_weight(a, b, capacity, simulated_vehicle_cost(sp, t));
}

std::size_t OrderGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [id, nbrs] : adjacency_) n += nbrs.size();
  return n / 2;
}

std::vector<OrderGraph::EdgeEntry> OrderGraph::edges() const {
  std::vector<EdgeEntry> out;
  for (const auto& [a, nbrs] : adjacency_) {
    for (const auto& [b, w] : nbrs) {
      if (a < b) out.push_back({a, b, w});
    }
  }
  return out;
}

std::optional<double> OrderGraph::weight(BatchId a, BatchId b) const {
  auto it = adjacency_.find(a);
  if (it == adjacency_.end()) return std::nullopt;
  auto jt = it->second.find(b);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

double OrderGraph::avg_cost() const {
  if (batches_.empty()) throw std::logic_error("AvgCost of an empty order graph");
  return total_cost_ / static_cast<double>(batches_.size());
}

double avg_cost(const OrderGraph& graph) { return graph.avg_cost(); }

class BatchClusterer {
 public:
  BatchClusterer(const Capacity& capacity, const BatchCostFn& cost_fn)
      : capacity_(capacity), cost_fn_(cost_fn) {}

  OrderGraph build(std::span<const Order> orders) {
    OrderGraph graph;
    for (const Order& o : orders) {
      validate(o);
      next_id_ = std::max(next_id_, o.id + 1);
      CostedPlan own = cost_fn_(std::span<const Order>(&o, 1));
      if (!own.feasible()) {
        throw std::invalid_argument("order " + std::to_string(o.id) +
                                    ": customer unreachable from restaurant");
      }
      Batch b{o.id, {o}, std::move(own.plan), own.cost, o.restaurant};
      if (!graph.batches_.emplace(o.id, std::move(b)).second) {
        throw std::invalid_argument("duplicate order id " + std::to_string(o.id));
      }
      graph.adjacency_[o.id];
      graph.total_cost_ += own.cost;
    }
    for (auto it = graph.batches_.begin(); it != graph.batches_.end(); ++it) {
      for (auto jt = std::next(it); jt != graph.batches_.end(); ++jt) {
        connect(graph, it->second, jt->second);
      }
    }
    return graph;
  }

  ClusterResult run(std::span<const Order> orders, double eta) {
    if (eta < 0.0) throw std::invalid_argument("eta must be >= 0");
    ClusterResult result;
    if (orders.empty()) return result;
    OrderGraph graph = build(orders);
    ClusterDiagnostics& diag = result.diagnostics;
    diag.avg_cost_trace.push_back(graph.avg_cost());

    while (true) {
      if (graph.avg_cost() > eta) break;
      auto next = pop_min(graph);
      if (!next) break;
      auto [w, a, b] = *next;
      const Batch& ba = graph.batches_.at(a);
      const Batch& bb = graph.batches_.at(b);
      if (!mergeable(ba, bb, capacity_)) {
        ++diag.capacity_skips;
        continue;
      }
      // A merge that would lift AvgCost past η is not taken.
      double after = (graph.total_cost_ + w) / static_cast<double>(graph.batches_.size() - 1);
      if (after > eta) break;
      merge(graph, a, b);
      diag.merges.emplace_back(a, b);
      diag.avg_cost_trace.push_back(graph.avg_cost());
    }

    diag.final_total_cost = graph.total_cost_;
    for (auto& [id, batch] : graph.batches_) result.batches.push_back(std::move(batch));
    return result;
  }

 private:
  using QueueEntry = std::tuple<double, BatchId, BatchId>;

  void connect(OrderGraph& graph, const Batch& a, const Batch& b) {
    auto candidate = pair_weight(a, b, capacity_, cost_fn_);
    if (!candidate) return;
    graph.adjacency_[a.id][b.id] = candidate->weight;
    graph.adjacency_[b.id][a.id] = candidate->weight;
    queue_.emplace(candidate->weight, std::min(a.id, b.id), std::max(a.id, b.id));
  }

  std::optional<QueueEntry> pop_min(const OrderGraph& graph) {
    while (!queue_.empty()) {
      QueueEntry top = queue_.top();
      queue_.pop();
      auto [w, a, b] = top;
      // Lazy deletion: entries touching merged-away batches are stale.
      if (graph.batches_.count(a) && graph.batches_.count(b)) return top;
    }
    return std::nullopt;
  }

  void merge(OrderGraph& graph, BatchId a, BatchId b) {
    const double w = graph.adjacency_.at(a).at(b);
    Batch& ba = graph.batches_.at(a);
    Batch& bb = graph.batches_.at(b);

    Batch merged;
    merged.id = next_id_++;
    merged.orders = merged_orders(ba, bb);
    // Same inputs as when the edge was weighed, so the same plan comes back.
    CostedPlan plan = cost_fn_(merged.orders);
    merged.cost = ba.cost + bb.cost + w;
    merged.plan = std::move(plan.plan);
    merged.first_pickup = merged.plan.stops.front().node;
    graph.total_cost_ += w;

    for (BatchId gone : {a, b}) {
      for (const auto& [nbr, weight] : graph.adjacency_.at(gone)) {
        graph.adjacency_.at(nbr).erase(gone);
      }
      graph.adjacency_.erase(gone);
      graph.batches_.erase(gone);
    }

    BatchId id = merged.id;
    graph.adjacency_[id];
    auto [it, inserted] = graph.batches_.emplace(id, std::move(merged));
    for (auto& [other_id, other] : graph.batches_) {
      if (other_id != id) connect(graph, other, it->second);
    }
  }

  Capacity capacity_;
  const BatchCostFn& cost_fn_;
  BatchId next_id_ = 0;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue_;
};

OrderGraph build_order_graph(std::span<const Order> orders, const Capacity& capacity,
                             const BatchCostFn& cost_fn) {
  BatchClusterer clusterer(capacity, cost_fn);
  return clusterer.build(orders);
}

OrderGraph build_order_graph(ShortestPaths& sp, std::span<const Order> orders, double t,
                             const Capacity& capacity) {
  return build_order_graph(orders, capacity, simulated_vehicle_cost(sp, t));
}

ClusterResult cluster(std::span<const Order> orders, double eta, const Capacity& capacity,
                      const BatchCostFn& cost_fn) {
  BatchClusterer clusterer(capacity, cost_fn);
  return clusterer.run(orders, eta);
}

ClusterResult cluster(ShortestPaths& sp, std::span<const Order> orders, double eta, double t,
                      const Capacity& capacity) {
  return cluster(orders, eta, capacity, simulated_vehicle_cost(sp, t));
}

}  // namespace foodmatch
