#include "foodmatch/foodgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>

namespace foodmatch {

std::size_t sparsification_degree(double k_factor, std::size_t order_count,
                                  std::size_t vehicle_count, std::size_t batch_count) {
  if (batch_count == 0) return 0;
  double raw = vehicle_count == 0 ? static_cast<double>(batch_count)
                                  : std::round(k_factor * static_cast<double>(order_count) /
                                               static_cast<double>(vehicle_count));
  if (!(raw >= 1.0)) raw = 1.0;
  return std::min(batch_count, static_cast<std::size_t>(std::min(raw, 1e18)));
}

namespace {

FoodGraph empty_graph(std::vector<Batch> batches, std::vector<Vehicle> vehicles,
                      const DispatchParams& params) {
  FoodGraph g;
  g.omega = params.omega;
  g.weights = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(batches.size()),
                                        static_cast<Eigen::Index>(vehicles.size()), params.omega);
  g.degree.assign(vehicles.size(), 0);
  g.batches = std::move(batches);
  g.vehicles = std::move(vehicles);
  return g;
}

void evaluate_cell(ShortestPaths& sp, FoodGraph& g, std::size_t b, std::size_t v, double base,
                   double t, const DispatchParams& params) {
  const Batch& batch = g.batches[b];
  g.weights(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(v)) =
      marginal_cost(sp, batch.orders, batch.first_pickup, g.vehicles[v], t, params, base);
  ++g.marginal_cost_evaluations;
  ++g.real_edge_count;
  ++g.degree[v];
}

/// Angular term of the vehicle-sensitive weight for one vehicle. The heading
/// bearing is computed once; per-node terms are memoised in `cache`, which
/// is shared across vehicles and invalidated by bumping `stamp`.
class AngularField {
 public:
  AngularField(const RoadNetwork& net, const VehicleHeading& heading, std::vector<double>& cache,
               std::vector<std::uint32_t>& valid, std::uint32_t stamp)
      : net_(net), loc_(net.node(heading.location).position), cache_(cache), valid_(valid),
        stamp_(stamp) {
    if (heading.dest) {
      GeoPoint dest = net.node(*heading.dest).position;
      if (dest != loc_) {
        heading_ = bearing(loc_, dest).radians();
        moving_ = true;
      }
    }
  }

  double at(NodeId u) {
    if (!moving_) return 0.0;
    auto su = static_cast<std::size_t>(u);
    if (valid_[su] == stamp_) return cache_[su];
    GeoPoint p = net_.node(u).position;
    double value = 0.0;
    if (p != loc_) {
      double diff = heading_ - bearing(loc_, p).radians();
      value = std::clamp((1.0 - std::cos(diff)) / 2.0, 0.0, 1.0);
    }
    valid_[su] = stamp_;
    cache_[su] = value;
    return value;
  }

 private:
  const RoadNetwork& net_;
  GeoPoint loc_;
  bool moving_ = false;
  double heading_ = 0.0;
  std::vector<double>& cache_;
  std::vector<std::uint32_t>& valid_;
  std::uint32_t stamp_;
};

}  // namespace

FoodGraph build_full(ShortestPaths& sp, std::vector<Batch> batches, std::vector<Vehicle> vehicles,
                     double t, const DispatchParams& params) {
  FoodGraph g = empty_graph(std::move(batches), std::move(vehicles), params);
  for (std::size_t v = 0; v < g.vehicles.size(); ++v) {
    const double base = vehicle_cost(sp, g.vehicles[v], t);
    for (std::size_t b = 0; b < g.batches.size(); ++b) evaluate_cell(sp, g, b, v, base, t, params);
  }
  return g;
}

FoodGraph build_sparsified(ShortestPaths& sp, std::vector<Batch> batches,
                           std::vector<Vehicle> vehicles, std::size_t k, double t, double gamma,
                           const DispatchParams& params) {
  if (k < 1) throw std::invalid_argument("sparsification degree k must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  FoodGraph g = empty_graph(std::move(batches), std::move(vehicles), params);
  const RoadNetwork& net = sp.network();
  const int slot = time_slot(t);
  const double max_weight = net.max_edge_weight(slot);

  // Batches grouped by first pickup node, each group in ascending batch id.
  std::map<NodeId, std::vector<std::size_t>> starting_at;
  for (std::size_t b = 0; b < g.batches.size(); ++b) starting_at[g.batches[b].first_pickup].push_back(b);
  for (auto& [node, list] : starting_at) {
    std::sort(list.begin(), list.end(),
              [&](std::size_t x, std::size_t y) { return g.batches[x].id < g.batches[y].id; });
  }

  using Entry = std::pair<double, NodeId>;
  std::vector<std::uint32_t> visited(net.node_count(), 0);
  std::vector<std::uint32_t> seen(net.node_count(), 0);
  std::vector<double> best(net.node_count(), kUnreachable);
  std::vector<double> angular_cache(net.node_count(), 0.0);
  std::vector<std::uint32_t> angular_valid(net.node_count(), 0);
  std::uint32_t stamp = 0;

  for (std::size_t v = 0; v < g.vehicles.size(); ++v) {
    const Vehicle& vehicle = g.vehicles[v];
    ++stamp;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    AngularField angular(net, {vehicle.location, vehicle.dest}, angular_cache, angular_valid, stamp);
    std::optional<double> base;

    queue.push({0.0, vehicle.location});
    seen[static_cast<std::size_t>(vehicle.location)] = stamp;
    best[static_cast<std::size_t>(vehicle.location)] = 0.0;

    while (!queue.empty() && g.degree[v] < k) {
      auto [dist, u] = queue.top();
      queue.pop();
      auto su = static_cast<std::size_t>(u);
      if (visited[su] == stamp) continue;
      visited[su] = stamp;

      if (auto it = starting_at.find(u); it != starting_at.end()) {
        if (!base) base = vehicle_cost(sp, vehicle, t);
        for (std::size_t b : it->second) {
          if (g.degree[v] >= k) break;
          evaluate_cell(sp, g, b, v, *base, t, params);
        }
      }

      for (EdgeId e : net.out_edges(u)) {
        const Edge& edge = net.edge(e);
        auto sw = static_cast<std::size_t>(edge.to);
        if (visited[sw] == stamp) continue;
        double alpha = (1.0 - gamma) * angular.at(edge.to) +
                       gamma * edge.weights.at_slot(slot) / max_weight;
        double nd = dist + alpha;
        if (seen[sw] != stamp || nd < best[sw]) {
          seen[sw] = stamp;
          best[sw] = nd;
          queue.push({nd, edge.to});
        }
      }
    }
  }
  return g;
}

}  // namespace foodmatch
