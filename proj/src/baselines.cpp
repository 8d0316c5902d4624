#include "foodmatch/baselines.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "foodmatch/foodgraph.hpp"
#include "foodmatch/matching.hpp"

namespace foodmatch {

namespace {

std::vector<std::size_t> sorted_by_id(std::size_t n, auto id_of) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return id_of(a) < id_of(b); });
  return idx;
}

}  // namespace

AssignmentOutcome greedy_assign(ShortestPaths& sp, std::span<const Order> orders,
                                std::span<const Vehicle> vehicles, double t,
                                const DispatchParams& params) {
  AssignmentOutcome outcome;
  outcome.assignment_time = t;
  // Rows and columns in id order so a strict < scan breaks ties correctly.
  auto row = sorted_by_id(orders.size(), [&](std::size_t i) { return orders[i].id; });
  auto col = sorted_by_id(vehicles.size(), [&](std::size_t j) { return vehicles[j].id; });
  std::vector<Vehicle> fleet;
  fleet.reserve(vehicles.size());
  for (std::size_t j : col) fleet.push_back(vehicles[j]);

  const std::size_t n = orders.size();
  const std::size_t m = fleet.size();
  std::vector<double> cost(n * m, params.omega);
  auto fill_column = [&](std::size_t j, const std::vector<char>& done) {
    const double base = vehicle_cost(sp, fleet[j], t);
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      const Order& o = orders[row[i]];
      cost[i * m + j] = marginal_cost(sp, std::span<const Order>(&o, 1), o.restaurant, fleet[j], t,
                                      params, base);
    }
  };

  std::vector<char> done(n, 0);
  std::vector<std::optional<std::pair<VehicleId, double>>> chosen(n);
  for (std::size_t j = 0; j < m; ++j) fill_column(j, done);

  while (true) {
    double best = params.omega;
    std::size_t bi = n, bj = m;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (cost[i * m + j] < best) {
          best = cost[i * m + j];
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n) break;
    done[bi] = 1;
    chosen[bi] = std::make_pair(fleet[bj].id, best);
    fleet[bj].committed.push_back(orders[row[bi]]);
    fill_column(bj, done);
  }

  for (std::size_t i = 0; i < n; ++i) {
    Assignment a{orders[row[i]].id, std::nullopt, 0.0};
    if (chosen[i]) {
      a.vehicle = chosen[i]->first;
      a.cost = chosen[i]->second;
    }
    outcome.orders.push_back(a);
  }
  return outcome;
}

AssignmentOutcome vanilla_km_assign(ShortestPaths& sp, std::span<const Order> orders,
                                    std::span<const Vehicle> vehicles, double t,
                                    const DispatchParams& params) {
  AssignmentOutcome outcome;
  outcome.assignment_time = t;
  std::vector<Batch> singletons;
  singletons.reserve(orders.size());
  for (std::size_t i : sorted_by_id(orders.size(), [&](std::size_t i) { return orders[i].id; })) {
    const Order& o = orders[i];
    singletons.push_back({o.id, {o}, {}, 0.0, o.restaurant});
  }
  std::vector<Vehicle> fleet(vehicles.begin(), vehicles.end());
  FoodGraph graph = build_full(sp, std::move(singletons), std::move(fleet), t, params);
  auto matching = min_weight_matching(graph.weights);

  std::vector<std::optional<std::pair<VehicleId, double>>> chosen(graph.batches.size());
  for (const auto& [r, c] : matching.pairs) {
    double w = graph.weights(r, c);
    if (w >= params.omega) continue;
    chosen[static_cast<std::size_t>(r)] = std::make_pair(graph.vehicles[static_cast<std::size_t>(c)].id, w);
  }
  for (std::size_t r = 0; r < graph.batches.size(); ++r) {
    Assignment a{graph.batches[r].id, std::nullopt, 0.0};
    if (chosen[r]) {
      a.vehicle = chosen[r]->first;
      a.cost = chosen[r]->second;
    }
    outcome.orders.push_back(a);
  }
  return outcome;
}

}  // namespace foodmatch
