#include "oracles.hpp"

#include <algorithm>
#include <numeric>

namespace foodmatch::oracle {

double brute_force_matching(const Eigen::MatrixXd& cost) {
  const bool wide = cost.rows() <= cost.cols();
  const Eigen::MatrixXd m = wide ? cost : Eigen::MatrixXd(cost.transpose());
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  if (rows == 0) return 0.0;
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = kUnreachable;
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      total += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(perm[r]));
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<std::vector<double>> floyd_warshall(const RoadNetwork& net, int slot) {
  const std::size_t n = net.node_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kUnreachable));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const Edge& e : net.edges()) {
    auto& cell = d[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)];
    cell = std::min(cell, e.weights.at_slot(slot));
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] == kUnreachable) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

double bellman_ford(const RoadNetwork& net, NodeId from, NodeId to, int slot) {
  std::vector<double> d(net.node_count(), kUnreachable);
  d[static_cast<std::size_t>(from)] = 0.0;
  for (std::size_t round = 0; round + 1 < net.node_count(); ++round) {
    bool changed = false;
    for (const Edge& e : net.edges()) {
      double via = d[static_cast<std::size_t>(e.from)] + e.weights.at_slot(slot);
      if (via < d[static_cast<std::size_t>(e.to)]) {
        d[static_cast<std::size_t>(e.to)] = via;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d[static_cast<std::size_t>(to)];
}

namespace {

struct OracleStop {
  NodeId node;
  std::size_t order;
  bool pickup;
};

std::vector<OracleStop> stops_of(std::span<const Order> carried, std::span<const Order> new_orders) {
  std::vector<OracleStop> stops;
  std::size_t i = 0;
  for (const Order& o : carried) stops.push_back({o.customer, i++, false});
  for (const Order& o : new_orders) {
    stops.push_back({o.restaurant, i, true});
    stops.push_back({o.customer, i++, false});
  }
  return stops;
}

template <typename Visit>
void for_each_valid_sequence(const std::vector<OracleStop>& stops, std::size_t orders, Visit visit) {
  std::vector<std::size_t> perm(stops.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    std::vector<char> picked(orders, 0);
    std::vector<char> needs_pickup(orders, 0);
    for (const auto& s : stops) {
      if (s.pickup) needs_pickup[s.order] = 1;
    }
    bool ok = true;
    for (std::size_t idx : perm) {
      const OracleStop& s = stops[idx];
      if (s.pickup) {
        picked[s.order] = 1;
      } else if (needs_pickup[s.order] && !picked[s.order]) {
        ok = false;
        break;
      }
    }
    if (ok) visit(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace

double enumerate_route_length(const std::vector<std::vector<double>>& dist, NodeId start,
                              std::span<const Order> carried, std::span<const Order> new_orders) {
  auto stops = stops_of(carried, new_orders);
  if (stops.empty()) return 0.0;
  double best = kUnreachable;
  for_each_valid_sequence(stops, carried.size() + new_orders.size(), [&](const auto& perm) {
    double length = 0.0;
    NodeId at = start;
    for (std::size_t idx : perm) {
      length += dist[static_cast<std::size_t>(at)][static_cast<std::size_t>(stops[idx].node)];
      at = stops[idx].node;
    }
    best = std::min(best, length);
  });
  return best;
}

double enumerate_plan_cost(const std::vector<std::vector<double>>& dist, std::optional<NodeId> start,
                           std::span<const Order> carried, std::span<const Order> new_orders,
                           double now, bool zero_assignment_time) {
  auto stops = stops_of(carried, new_orders);
  if (stops.empty()) return 0.0;
  std::vector<const Order*> all;
  for (const Order& o : carried) all.push_back(&o);
  for (const Order& o : new_orders) all.push_back(&o);
  auto sdt = [&](const Order& o) {
    return o.prep_time + dist[static_cast<std::size_t>(o.restaurant)][static_cast<std::size_t>(o.customer)];
  };
  double best = kUnreachable;
  for_each_valid_sequence(stops, all.size(), [&](const auto& perm) {
    double clock = 0.0;
    std::optional<NodeId> at = start;
    double cost = 0.0;
    for (std::size_t idx : perm) {
      const OracleStop& s = stops[idx];
      if (at) clock += dist[static_cast<std::size_t>(*at)][static_cast<std::size_t>(s.node)];
      at = s.node;
      const Order& o = *all[s.order];
      const bool is_carried = s.order < carried.size();
      const double elapsed =
          (zero_assignment_time && !is_carried) ? 0.0 : std::max(0.0, now - o.request_time);
      if (s.pickup) {
        // Wait for the food before moving on.
        if (clock < o.prep_time - elapsed) clock = o.prep_time - elapsed;
      } else {
        cost += elapsed + clock - sdt(o);
      }
    }
    best = std::min(best, cost);
  });
  return best;
}

WorkedExample worked_example() {
  // u1..u9 become node ids 0..8; positions only need to be distinct.
  std::vector<Node> nodes;
  const double pos[9][2] = {{0.0, 0.0}, {0.0, 1.0}, {0.0, 2.0}, {-1.0, 1.0}, {-2.0, 2.0},
                            {-2.0, 1.0}, {1.0, 2.0}, {1.0, 3.0}, {-3.0, 1.0}};
  for (NodeId i = 0; i < 9; ++i) {
    nodes.push_back({i, {0.2265 + pos[i][0] * 1e-4, 1.3542 + pos[i][1] * 1e-4}});
  }
  const int links[8][3] = {{1, 2, 8}, {2, 3, 5}, {3, 7, 8}, {7, 8, 5},
                           {4, 2, 6}, {4, 6, 4}, {6, 9, 7}, {5, 6, 6}};
  std::vector<Edge> edges;
  for (const auto& l : links) {
    auto profile = EdgeWeightProfile::constant(l[2]);
    edges.push_back({static_cast<EdgeId>(edges.size()), l[0] - 1, l[1] - 1, profile});
    edges.push_back({static_cast<EdgeId>(edges.size()), l[1] - 1, l[0] - 1, profile});
  }
  WorkedExample ex{RoadNetwork(std::move(nodes), std::move(edges)), {}, {}};
  ex.orders = {{1, 1, 6, 0.0, 1, 5.0}, {2, 5, 8, 0.0, 1, 5.0}, {3, 2, 7, 0.0, 1, 10.0}};
  ex.vehicles = {{1, 0, std::nullopt, {}, {}}, {2, 3, std::nullopt, {}, {}}, {3, 4, std::nullopt, {}, {}}};
  return ex;
}

RoadNetwork random_network(std::mt19937_64& rng, std::size_t n, std::size_t extra_edges,
                           int max_weight) {
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  std::uniform_int_distribution<int> weight(1, max_weight);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({static_cast<NodeId>(i), {0.2265 + jitter(rng), 1.3542 + jitter(rng)}});
  }
  auto profile = [&] {
    std::array<double, kSlotsPerDay> w{};
    for (double& x : w) x = weight(rng);
    return EdgeWeightProfile(w);
  };
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    auto p = static_cast<NodeId>(parent(rng));
    edges.push_back({static_cast<EdgeId>(edges.size()), static_cast<NodeId>(i), p, profile()});
    edges.push_back({static_cast<EdgeId>(edges.size()), p, static_cast<NodeId>(i), profile()});
  }
  std::uniform_int_distribution<NodeId> any(0, static_cast<NodeId>(n) - 1);
  for (std::size_t k = 0; k < extra_edges; ++k) {
    NodeId a = any(rng), b = any(rng);
    if (a == b) continue;
    edges.push_back({static_cast<EdgeId>(edges.size()), a, b, profile()});
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

}  // namespace foodmatch::oracle
