#include "foodmatch/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>

namespace foodmatch {

namespace {

constexpr double kCenterLat = 12.97;
constexpr double kCenterLon = 77.59;
constexpr double kKmPerDegree = 111.195;

struct PlanePoint {
  double x = 0.0;  // km east
  double y = 0.0;  // km north
};

GeoPoint to_geo(PlanePoint p) {
  const double lat = kCenterLat + p.y / kKmPerDegree;
  const double lon = kCenterLon + p.x / (kKmPerDegree * std::cos(kCenterLat * std::numbers::pi / 180.0));
  return {lat * std::numbers::pi / 180.0, lon * std::numbers::pi / 180.0};
}

double plane_km(PlanePoint a, PlanePoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

using Link = std::pair<std::size_t, std::size_t>;

std::vector<PlanePoint> grid_points(std::size_t n, double pitch, std::vector<Link>& links) {
  const auto rows = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t cols = (n + rows - 1) / rows;
  std::vector<PlanePoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {static_cast<double>(i % cols) * pitch, static_cast<double>(i / cols) * pitch};
    if (i % cols + 1 < cols && i + 1 < n) links.emplace_back(i, i + 1);
    if (i + cols < n) links.emplace_back(i, i + cols);
  }
  return pts;
}

std::vector<PlanePoint> geometric_points(std::size_t n, double spacing, std::mt19937_64& rng,
                                         std::vector<Link>& links) {
  const double side = spacing * std::sqrt(static_cast<double>(n));
  std::uniform_real_distribution<double> coord(0.0, side);
  std::vector<PlanePoint> pts(n);
  for (auto& p : pts) p = {coord(rng), coord(rng)};

  // Each point links to its three nearest neighbours.
  constexpr std::size_t kNeighbours = 3;
  std::vector<Link> raw;
  std::vector<std::pair<double, std::size_t>> near;
  for (std::size_t i = 0; i < n; ++i) {
    near.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = plane_km(pts[i], pts[j]);
      if (near.size() < kNeighbours) {
        near.emplace_back(d, j);
        std::push_heap(near.begin(), near.end());
      } else if (d < near.front().first) {
        std::pop_heap(near.begin(), near.end());
        near.back() = {d, j};
        std::push_heap(near.begin(), near.end());
      }
    }
    for (const auto& [d, j] : near) raw.emplace_back(std::min(i, j), std::max(i, j));
  }

  // Stitch stray components onto the component of node 0.
  DisjointSets sets(n);
  for (const auto& [a, b] : raw) sets.unite(a, b);
  for (std::size_t i = 0; i < n; ++i) {
    if (sets.find(i) == sets.find(0)) continue;
    const std::size_t comp = sets.find(i);
    std::size_t best_a = i, best_b = 0;
    double best = kUnreachable;
    for (std::size_t a = 0; a < n; ++a) {
      if (sets.find(a) != comp) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (sets.find(b) == comp) continue;
        double d = plane_km(pts[a], pts[b]);
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    raw.emplace_back(std::min(best_a, best_b), std::max(best_a, best_b));
    sets.unite(best_a, best_b);
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  links.insert(links.end(), raw.begin(), raw.end());
  return pts;
}

RoadNetwork build_network(const WorkloadSpec& spec, std::mt19937_64& rng) {
  std::vector<Link> links;
  std::vector<PlanePoint> pts = spec.topology == Topology::grid
                                    ? grid_points(spec.node_count, spec.spacing_km, links)
                                    : geometric_points(spec.node_count, spec.spacing_km, rng, links);
  std::vector<Node> nodes;
  nodes.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) nodes.push_back({static_cast<NodeId>(i), to_geo(pts[i])});

  const auto congestion = congestion_profile();
  std::uniform_real_distribution<double> jitter(0.85, 1.25);
  std::vector<Edge> edges;
  edges.reserve(2 * links.size());
  for (const auto& [a, b] : links) {
    const double km = std::max(0.01, plane_km(pts[a], pts[b]));
    const double base = km / spec.free_flow_kmh * 3600.0 * jitter(rng);
    std::array<double, kSlotsPerDay> w{};
    for (int s = 0; s < kSlotsPerDay; ++s) {
      w[static_cast<std::size_t>(s)] = std::round(base * congestion[static_cast<std::size_t>(s)] * 10.0) / 10.0;
    }
    EdgeWeightProfile profile(w);
    auto na = static_cast<NodeId>(a);
    auto nb = static_cast<NodeId>(b);
    edges.push_back({static_cast<EdgeId>(edges.size()), na, nb, profile});
    edges.push_back({static_cast<EdgeId>(edges.size()), nb, na, profile});
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

/// Nodes reachable from `source` within `radius` seconds in every slot,
/// found with one Dijkstra over the slowest slot weight of each edge.
std::vector<NodeId> reachable_within(const RoadNetwork& net, NodeId source, double radius) {
  std::vector<double> dist(net.node_count(), kUnreachable);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(source)] = 0.0;
  queue.push({0.0, source});
  std::vector<NodeId> out;
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u != source) out.push_back(u);
    for (EdgeId e : net.out_edges(u)) {
      const Edge& edge = net.edge(e);
      const auto& slots = edge.weights.slots();
      double nd = d + *std::max_element(slots.begin(), slots.end());
      if (nd >= radius) continue;
      auto sv = static_cast<std::size_t>(edge.to);
      if (nd < dist[sv]) {
        dist[sv] = nd;
        queue.push({nd, edge.to});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool peak_slot(int s) { return (s >= 12 && s <= 14) || (s >= 19 && s <= 21); }

}  // namespace

std::array<double, kSlotsPerDay> peak_rate_profile(double orders_per_hour) {
  std::array<double, kSlotsPerDay> shape{};
  for (int s = 0; s < kSlotsPerDay; ++s) {
    const double h = s + 0.5;
    double w = 0.15 + 1.0 * std::exp(-(h - 13.5) * (h - 13.5) / (2.0 * 1.2 * 1.2)) +
               1.3 * std::exp(-(h - 20.5) * (h - 20.5) / (2.0 * 1.5 * 1.5));
    if (s >= 1 && s <= 6) w = 0.03;
    shape[static_cast<std::size_t>(s)] = w;
  }
  const double mean = std::accumulate(shape.begin(), shape.end(), 0.0) / kSlotsPerDay;
  for (double& w : shape) w *= orders_per_hour / mean;
  return shape;
}

std::array<double, kSlotsPerDay> congestion_profile() {
  std::array<double, kSlotsPerDay> c{};
  for (int s = 0; s < kSlotsPerDay; ++s) {
    double f = 1.1;
    if (s <= 5) f = 0.9;
    if (s >= 8 && s <= 10) f = 1.5;
    if (s >= 12 && s <= 14) f = 1.3;
    if (s >= 18 && s <= 21) f = 1.6;
    c[static_cast<std::size_t>(s)] = f;
  }
  return c;
}

void WorkloadSpec::validate() const {
  if (node_count < 4) throw std::invalid_argument("workload needs at least 4 nodes");
  if (!(restaurant_fraction > 0.0 && restaurant_fraction <= 1.0)) {
    throw std::invalid_argument("restaurant_fraction must lie in (0, 1]");
  }
  for (double r : order_rate_per_slot) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("order rates must be finite and >= 0");
  }
  if (!(prep_mu_min >= 0.0 && prep_mu_min <= prep_mu_max)) throw std::invalid_argument("bad prep mu range");
  if (!(prep_sigma_min >= 0.0 && prep_sigma_min <= prep_sigma_max)) {
    throw std::invalid_argument("bad prep sigma range");
  }
  if (!(spacing_km > 0.0) || !(free_flow_kmh > 0.0) || !(customer_radius > 0.0)) {
    throw std::invalid_argument("spacing, speed and customer radius must be > 0");
  }
}

Workload generate(const WorkloadSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  RoadNetwork net = build_network(spec, rng);

  // Restaurants: a random subset of nodes, dropping any with no customer in range.
  std::vector<NodeId> all(net.node_count());
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  const auto wanted = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::round(spec.restaurant_fraction * static_cast<double>(net.node_count()))));
  std::vector<NodeId> restaurants(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(wanted));
  std::sort(restaurants.begin(), restaurants.end());
  std::vector<std::vector<NodeId>> customers;
  std::vector<NodeId> usable;
  for (NodeId r : restaurants) {
    auto near = reachable_within(net, r, spec.customer_radius);
    if (near.empty()) continue;
    usable.push_back(r);
    customers.push_back(std::move(near));
  }
  if (usable.empty()) throw std::invalid_argument("no restaurant has a customer within the radius");

  RestaurantModel model;
  std::uniform_real_distribution<double> mu_dist(spec.prep_mu_min, spec.prep_mu_max);
  std::uniform_real_distribution<double> sigma_dist(spec.prep_sigma_min, spec.prep_sigma_max);
  for (NodeId r : usable) {
    const double mu = mu_dist(rng);
    const double sigma = sigma_dist(rng);
    for (int s = 0; s < kSlotsPerDay; ++s) {
      const double busy = peak_slot(s) ? 1.25 : 1.0;
      model.set(r, s, {std::round(mu * busy * 10.0) / 10.0, std::round(sigma * 10.0) / 10.0});
    }
  }

  // Per-slot counts: multinomial over slots via sequential binomials.
  const double total_rate =
      std::accumulate(spec.order_rate_per_slot.begin(), spec.order_rate_per_slot.end(), 0.0);
  auto remaining = static_cast<long long>(std::llround(total_rate));
  double remaining_rate = total_rate;
  std::vector<double> times;
  for (int s = 0; s < kSlotsPerDay && remaining > 0; ++s) {
    const double rate = spec.order_rate_per_slot[static_cast<std::size_t>(s)];
    long long count = remaining;
    if (s + 1 < kSlotsPerDay && remaining_rate > 0.0) {
      std::binomial_distribution<long long> pick(remaining, std::clamp(rate / remaining_rate, 0.0, 1.0));
      count = pick(rng);
    }
    remaining -= count;
    remaining_rate -= rate;
    std::uniform_int_distribution<int> second(0, static_cast<int>(kSecondsPerSlot) - 1);
    for (long long i = 0; i < count; ++i) times.push_back(s * kSecondsPerSlot + second(rng));
  }
  std::sort(times.begin(), times.end());

  std::vector<OrderRequest> orders;
  orders.reserve(times.size());
  std::uniform_int_distribution<std::size_t> pick_restaurant(0, usable.size() - 1);
  std::uniform_int_distribution<int> pick_items(1, 3);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::size_t r = pick_restaurant(rng);
    const auto& near = customers[r];
    std::uniform_int_distribution<std::size_t> pick_customer(0, near.size() - 1);
    orders.push_back({static_cast<OrderId>(i), times[i], usable[r], near[pick_customer(rng)],
                      pick_items(rng), std::nullopt});
  }

  std::vector<VehicleArrival> vehicles;
  std::uniform_int_distribution<NodeId> pick_node(0, static_cast<NodeId>(net.node_count()) - 1);
  for (std::size_t i = 0; i < spec.vehicle_count; ++i) {
    vehicles.push_back({static_cast<VehicleId>(i), 0.0, pick_node(rng)});
  }

  return Workload{std::move(net), std::move(usable), std::move(orders), std::move(vehicles),
                  std::move(model)};
}

void write_workload(const Workload& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  auto net = open("network.txt");
  write_network(net, w.network);
  auto orders = open("orders.txt");
  write_orders(orders, w.orders);
  auto vehicles = open("vehicles.txt");
  write_vehicles(vehicles, w.vehicles);
  auto model = open("restaurants.txt");
  write_restaurant_model(model, w.restaurant_model);
}

}  // namespace foodmatch
