#include "foodmatch/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

#include "foodmatch/text_io.hpp"

namespace foodmatch {

int time_slot(double t) {
  double day = std::fmod(t, kSecondsPerDay);
  if (day < 0) day += kSecondsPerDay;
  int slot = static_cast<int>(day / kSecondsPerSlot);
  return std::clamp(slot, 0, kSlotsPerDay - 1);
}

const char* to_string(NetworkErrc code) {
  switch (code) {
    case NetworkErrc::parse_failure: return "parse_failure";
    case NetworkErrc::dangling_endpoint: return "dangling_endpoint";
    case NetworkErrc::non_positive_weight: return "non_positive_weight";
    case NetworkErrc::disconnected: return "disconnected";
    case NetworkErrc::unknown_node: return "unknown_node";
    case NetworkErrc::unknown_edge: return "unknown_edge";
  }
  return "unknown";
}

EdgeWeightProfile::EdgeWeightProfile(const std::array<double, kSlotsPerDay>& slot_seconds)
    : slot_seconds_(slot_seconds) {
  for (double w : slot_seconds_) {
    if (!std::isfinite(w) || w <= 0.0) {
      throw NetworkError(NetworkErrc::non_positive_weight,
                         "edge weight must be finite and positive, got " + format_number(w));
    }
  }
}

EdgeWeightProfile EdgeWeightProfile::constant(double seconds) {
  std::array<double, kSlotsPerDay> slots;
  slots.fill(seconds);
  return EdgeWeightProfile(slots);
}

namespace {

void build_csr(std::size_t n, const std::vector<Edge>& edges, bool outgoing,
               std::vector<std::size_t>& offset, std::vector<EdgeId>& index) {
  offset.assign(n + 1, 0);
  for (const Edge& e : edges) ++offset[static_cast<std::size_t>(outgoing ? e.from : e.to) + 1];
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  index.assign(edges.size(), 0);
  std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
  for (const Edge& e : edges) {
    index[cursor[static_cast<std::size_t>(outgoing ? e.from : e.to)]++] = e.id;
  }
}

}  // namespace

RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i)) {
      throw NetworkError(NetworkErrc::parse_failure,
                         "node ids must be unique and cover 0.." + std::to_string(nodes_.size() - 1));
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.id != static_cast<EdgeId>(i)) {
      throw NetworkError(NetworkErrc::parse_failure,
                         "edge ids must be unique and cover 0.." + std::to_string(edges_.size() - 1));
    }
    if (!valid_node(e.from) || !valid_node(e.to)) {
      throw NetworkError(NetworkErrc::dangling_endpoint,
                         "edge " + std::to_string(e.id) + " references unknown node " +
                             std::to_string(valid_node(e.from) ? e.to : e.from));
    }
  }

  build_csr(nodes_.size(), edges_, true, out_offset_, out_index_);
  build_csr(nodes_.size(), edges_, false, in_offset_, in_index_);

  if (nodes_.empty()) throw NetworkError(NetworkErrc::disconnected, "network has no nodes");
  // Weak connectivity: BFS ignoring direction.
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    auto visit = [&](NodeId w) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    };
    for (EdgeId e : out_edges(u)) visit(edge(e).to);
    for (EdgeId e : in_edges(u)) visit(edge(e).from);
  }
  if (reached != nodes_.size()) {
    throw NetworkError(NetworkErrc::disconnected,
                       "network is not weakly connected (" + std::to_string(reached) + " of " +
                           std::to_string(nodes_.size()) + " nodes reachable)");
  }

  max_weight_.fill(0.0);
  length_km_.reserve(edges_.size());
  for (const Edge& e : edges_) {
    for (int s = 0; s < kSlotsPerDay; ++s) {
      max_weight_[static_cast<std::size_t>(s)] =
          std::max(max_weight_[static_cast<std::size_t>(s)], e.weights.at_slot(s));
    }
    length_km_.push_back(haversine_km(node(e.from).position, node(e.to).position));
  }
}

const Node& RoadNetwork::node(NodeId id) const {
  if (!valid_node(id)) {
    throw NetworkError(NetworkErrc::unknown_node, "unknown node " + std::to_string(id));
  }
  return nodes_[static_cast<std::size_t>(id)];
}

const Edge& RoadNetwork::edge(EdgeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= edges_.size()) {
    throw NetworkError(NetworkErrc::unknown_edge, "unknown edge " + std::to_string(id));
  }
  return edges_[static_cast<std::size_t>(id)];
}

std::span<const EdgeId> RoadNetwork::out_edges(NodeId u) const {
  auto i = static_cast<std::size_t>(u);
  return {out_index_.data() + out_offset_[i], out_offset_[i + 1] - out_offset_[i]};
}

std::span<const EdgeId> RoadNetwork::in_edges(NodeId v) const {
  auto i = static_cast<std::size_t>(v);
  return {in_index_.data() + in_offset_[i], in_offset_[i + 1] - in_offset_[i]};
}

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void parse_error(std::size_t line_no, const std::string& msg) {
  throw NetworkError(NetworkErrc::parse_failure, "line " + std::to_string(line_no) + ": " + msg);
}

std::size_t read_header(LineReader& reader, const std::string& keyword) {
  std::vector<std::string_view> fields;
  if (!reader.next(fields)) parse_error(reader.line_number(), "missing '" + keyword + "' header");
  if (fields.size() != 2 || fields[0] != keyword) {
    parse_error(reader.line_number(), "expected '" + keyword + " <count>'");
  }
  auto count = parse_integer<long long>(fields[1]);
  if (!count || *count < 0) parse_error(reader.line_number(), "bad count");
  return static_cast<std::size_t>(*count);
}

}  // namespace

RoadNetwork parse_network(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> fields;

  std::size_t node_count = read_header(reader, "nodes");
  std::vector<Node> nodes;
  nodes.reserve(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    if (!reader.next(fields)) parse_error(reader.line_number(), "truncated node list");
    if (fields.size() != 3) parse_error(reader.line_number(), "expected 'id lat lon'");
    auto id = parse_integer<NodeId>(fields[0]);
    auto lat = parse_double(fields[1]);
    auto lon = parse_double(fields[2]);
    if (!id || !lat || !lon) parse_error(reader.line_number(), "malformed node record");
    nodes.push_back({*id, {*lat * kDegToRad, *lon * kDegToRad}});
  }

  std::size_t edge_count = read_header(reader, "edges");
  std::vector<Edge> edges;
  edges.reserve(edge_count);
  for (std::size_t i = 0; i < edge_count; ++i) {
    if (!reader.next(fields)) parse_error(reader.line_number(), "truncated edge list");
    if (fields.size() != 3 + kSlotsPerDay) {
      parse_error(reader.line_number(), "expected 'id from to' and 24 slot weights");
    }
    auto id = parse_integer<EdgeId>(fields[0]);
    auto from = parse_integer<NodeId>(fields[1]);
    auto to = parse_integer<NodeId>(fields[2]);
    if (!id || !from || !to) parse_error(reader.line_number(), "malformed edge record");
    std::array<double, kSlotsPerDay> w{};
    for (int s = 0; s < kSlotsPerDay; ++s) {
      auto v = parse_double(fields[static_cast<std::size_t>(3 + s)]);
      if (!v) parse_error(reader.line_number(), "malformed edge weight");
      w[static_cast<std::size_t>(s)] = *v;
    }
    edges.push_back({*id, *from, *to, EdgeWeightProfile(w)});
  }
  if (reader.next(fields)) parse_error(reader.line_number(), "trailing content after edge list");
  return RoadNetwork(std::move(nodes), std::move(edges));
}

RoadNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError(NetworkErrc::parse_failure, "cannot open " + path.string());
  return parse_network(in);
}

void write_network(std::ostream& out, const RoadNetwork& net) {
  out << "nodes " << net.node_count() << '\n';
  for (const Node& n : net.nodes()) {
    out << n.id << ' ' << format_number(n.position.lat / kDegToRad) << ' '
        << format_number(n.position.lon / kDegToRad) << '\n';
  }
  out << "edges " << net.edge_count() << '\n';
  for (const Edge& e : net.edges()) {
    out << e.id << ' ' << e.from << ' ' << e.to;
    for (double w : e.weights.slots()) out << ' ' << format_number(w);
    out << '\n';
  }
}

double edge_weight(const RoadNetwork& net, EdgeId e, double t) {
  return net.edge(e).weights.at_slot(time_slot(t));
}

namespace {

using QueueItem = std::pair<double, NodeId>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

}  // namespace

double shortest_path_time(const RoadNetwork& net, NodeId from, NodeId to, double t) {
  net.node(from);
  net.node(to);
  if (from == to) return 0.0;
  const int slot = time_slot(t);
  std::vector<double> dist(net.node_count(), kUnreachable);
  MinQueue queue;
  dist[static_cast<std::size_t>(from)] = 0.0;
  queue.push({0.0, from});
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == to) return d;
    for (EdgeId e : net.out_edges(u)) {
      const Edge& edge = net.edge(e);
      double nd = d + edge.weights.at_slot(slot);
      if (nd < dist[static_cast<std::size_t>(edge.to)]) {
        dist[static_cast<std::size_t>(edge.to)] = nd;
        queue.push({nd, edge.to});
      }
    }
  }
  return kUnreachable;
}

double haversine_km(GeoPoint a, GeoPoint b) {
  double dlat = b.lat - a.lat;
  double dlon = b.lon - a.lon;
  double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(a.lat) * std::cos(b.lat) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

DistanceRow compute_distance_row(const RoadNetwork& net, NodeId target, int slot) {
  net.node(target);
  DistanceRow row;
  row.target = target;
  row.slot = slot;
  row.seconds.assign(net.node_count(), kUnreachable);
  row.next_edge.assign(net.node_count(), -1);
  MinQueue queue;
  row.seconds[static_cast<std::size_t>(target)] = 0.0;
  queue.push({0.0, target});
  while (!queue.empty()) {
    auto [d, x] = queue.top();
    queue.pop();
    if (d > row.seconds[static_cast<std::size_t>(x)]) continue;
    for (EdgeId e : net.in_edges(x)) {
      const Edge& edge = net.edge(e);
      auto u = static_cast<std::size_t>(edge.from);
      double nd = d + edge.weights.at_slot(slot);
      if (nd < row.seconds[u]) {
        row.seconds[u] = nd;
        row.next_edge[u] = e;
        queue.push({nd, edge.from});
      }
    }
  }
  return row;
}

ShortestPaths::ShortestPaths(const RoadNetwork& net, std::size_t memory_budget_bytes) : net_(&net) {
  std::size_t row_bytes = net.node_count() * (sizeof(double) + sizeof(EdgeId)) + sizeof(DistanceRow);
  capacity_ = std::max<std::size_t>(16, memory_budget_bytes / row_bytes);
}

const ShortestPaths::Entry* ShortestPaths::find_locked(Key key) {
  auto it = rows_.find(key);
  if (it == rows_.end()) return nullptr;
  it->second.last_use = ++tick_;
  ++hits_;
  return &it->second;
}

std::shared_ptr<const DistanceRow> ShortestPaths::row_to(NodeId target, int slot) {
  const Key key = static_cast<Key>(target) * kSlotsPerDay + slot;
  {
    std::lock_guard lock(mutex_);
    if (const Entry* e = find_locked(key)) return e->row;
    ++misses_;
  }
  auto row = std::make_shared<const DistanceRow>(compute_distance_row(*net_, target, slot));
  std::lock_guard lock(mutex_);
  if (auto it = rows_.find(key); it != rows_.end()) return it->second.row;
  rows_.emplace(key, Entry{row, ++tick_});
  if (rows_.size() > capacity_) {
    // Evict the least recently used row. Misses already pay for a Dijkstra
    // run, which dwarfs this scan.
    auto victim = rows_.begin();
    for (auto it = rows_.begin(); it != rows_.end(); ++it) {
      if (it->second.last_use < victim->second.last_use) victim = it;
    }
    rows_.erase(victim);
  }
  return row;
}

double ShortestPaths::time_in_slot(NodeId from, NodeId to, int slot) {
  net_->node(from);
  if (from == to) return 0.0;
  {
    std::lock_guard lock(mutex_);
    if (const Entry* e = find_locked(static_cast<Key>(to) * kSlotsPerDay + slot)) {
      return e->row->seconds[static_cast<std::size_t>(from)];
    }
  }
  return row_to(to, slot)->seconds[static_cast<std::size_t>(from)];
}

std::vector<EdgeId> ShortestPaths::path(NodeId from, NodeId to, double t) {
  net_->node(from);
  std::vector<EdgeId> edges;
  if (from == to) return edges;
  auto row = row_to(to, time_slot(t));
  if (!std::isfinite(row->seconds[static_cast<std::size_t>(from)])) return edges;
  for (NodeId u = from; u != to;) {
    EdgeId e = row->next_edge[static_cast<std::size_t>(u)];
    edges.push_back(e);
    u = net_->edge(e).to;
  }
  return edges;
}

std::size_t ShortestPaths::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t ShortestPaths::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

Bearing::Bearing(double radians) : radians_(radians) {
  if (!(radians >= 0.0 && radians < 2.0 * std::numbers::pi)) {
    throw std::out_of_range("bearing must lie in [0, 2pi)");
  }
}

Bearing bearing(GeoPoint s, GeoPoint d) {
  if (s == d) throw GeometryError("bearing between identical points is undefined");
  double dlon = d.lon - s.lon;
  double x = std::cos(d.lat) * std::sin(dlon);
  double y = std::cos(s.lat) * std::sin(d.lat) - std::sin(s.lat) * std::cos(d.lat) * std::cos(dlon);
  double theta = std::atan2(x, y);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  // atan2 of a tiny negative value can round up to exactly 2π.
  if (theta >= 2.0 * std::numbers::pi) theta = 0.0;
  return Bearing(theta);
}

double angular_distance(GeoPoint loc, GeoPoint dest, GeoPoint u) {
  double diff = bearing(loc, dest).radians() - bearing(loc, u).radians();
  return std::clamp((1.0 - std::cos(diff)) / 2.0, 0.0, 1.0);
}

double vehicle_sensitive_weight(const RoadNetwork& net, const VehicleHeading& vehicle, EdgeId e,
                                double t, double gamma) {
  const Edge& edge = net.edge(e);
  const int slot = time_slot(t);
  double travel = edge.weights.at_slot(slot) / net.max_edge_weight(slot);
  double angular = 0.0;
  if (vehicle.dest && gamma < 1.0) {
    GeoPoint loc = net.node(vehicle.location).position;
    GeoPoint dest = net.node(*vehicle.dest).position;
    GeoPoint head = net.node(edge.to).position;
    if (loc != dest && loc != head) angular = angular_distance(loc, dest, head);
  }
  return (1.0 - gamma) * angular + gamma * travel;
}

}  // namespace foodmatch
