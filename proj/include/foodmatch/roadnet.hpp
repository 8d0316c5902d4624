#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace foodmatch {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

inline constexpr int kSlotsPerDay = 24;
inline constexpr double kSecondsPerSlot = 3600.0;
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline constexpr double kEarthRadiusKm = 6371.0088;

/// Hour-of-day slot of a simulated clock value. Clocks past midnight wrap
/// onto the next day, so a multi-day simulation reuses the same profile.
int time_slot(double t);

enum class NetworkErrc {
  parse_failure,
  dangling_endpoint,
  non_positive_weight,
  disconnected,
  unknown_node,
  unknown_edge,
};

const char* to_string(NetworkErrc code);

class NetworkError : public std::runtime_error {
 public:
  NetworkError(NetworkErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  NetworkErrc code() const noexcept { return code_; }

 private:
  NetworkErrc code_;
};

/// Raised when a bearing is requested between two identical points.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Latitude/longitude pair in radians.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Traversal time (seconds) of one road segment for each hour of the day.
class EdgeWeightProfile {
 public:
  EdgeWeightProfile() { slot_seconds_.fill(1.0); }
  /// Throws NetworkError(non_positive_weight) unless every value is finite and > 0.
  explicit EdgeWeightProfile(const std::array<double, kSlotsPerDay>& slot_seconds);

  static EdgeWeightProfile constant(double seconds);

  double at_slot(int slot) const { return slot_seconds_[static_cast<std::size_t>(slot)]; }
  const std::array<double, kSlotsPerDay>& slots() const { return slot_seconds_; }

 private:
  std::array<double, kSlotsPerDay> slot_seconds_;
};

struct Node {
  NodeId id = 0;
  GeoPoint position;
};

struct Edge {
  EdgeId id = 0;
  NodeId from = 0;
  NodeId to = 0;
  EdgeWeightProfile weights;
};

/// Directed road graph with hour-slotted traversal times. Immutable once
/// constructed; safe to share between threads.
class RoadNetwork {
 public:
  /// Validates ids, endpoints and weak connectivity. Node i must carry id i
  /// after sorting; same for edges.
  RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Node& node(NodeId id) const;
  const Edge& edge(EdgeId id) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const EdgeId> out_edges(NodeId u) const;
  std::span<const EdgeId> in_edges(NodeId v) const;

  /// Largest traversal time over all edges in `slot`.
  double max_edge_weight(int slot) const { return max_weight_[static_cast<std::size_t>(slot)]; }

  /// Great-circle length of an edge in kilometres.
  double edge_length_km(EdgeId id) const { return length_km_[static_cast<std::size_t>(id)]; }

  bool valid_node(NodeId id) const { return id >= 0 && static_cast<std::size_t>(id) < nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offset_, in_offset_;
  std::vector<EdgeId> out_index_, in_index_;
  std::array<double, kSlotsPerDay> max_weight_{};
  std::vector<double> length_km_;
};

RoadNetwork parse_network(std::istream& in);
RoadNetwork load_network(const std::filesystem::path& path);
void write_network(std::ostream& out, const RoadNetwork& net);

/// Traversal time of `e` at clock `t`; throws NetworkError(unknown_edge).
double edge_weight(const RoadNetwork& net, EdgeId e, double t);

/// Single-query Dijkstra over weights frozen at slot(t). Returns
/// kUnreachable when no path exists. Throws NetworkError(unknown_node).
double shortest_path_time(const RoadNetwork& net, NodeId from, NodeId to, double t);

double haversine_km(GeoPoint a, GeoPoint b);

/// Reverse shortest-path tree rooted at `target`: seconds[u] = SP(u, target)
/// and next_edge[u] is the first edge of one quickest u -> target path.
struct DistanceRow {
  NodeId target = 0;
  int slot = 0;
  std::vector<double> seconds;
  std::vector<EdgeId> next_edge;
};

DistanceRow compute_distance_row(const RoadNetwork& net, NodeId target, int slot);

/// Memoised time-dependent shortest paths. Rows are cached per (target,
/// slot) in an LRU bounded by a byte budget. Internally synchronised: any
/// number of threads may query concurrently and observe the values a
/// sequential caller would.
class ShortestPaths {
 public:
  explicit ShortestPaths(const RoadNetwork& net, std::size_t memory_budget_bytes = 256u << 20);

  const RoadNetwork& network() const { return *net_; }

  double time(NodeId from, NodeId to, double t) { return time_in_slot(from, to, time_slot(t)); }
  double time_in_slot(NodeId from, NodeId to, int slot);

  std::shared_ptr<const DistanceRow> row_to(NodeId target, int slot);

  /// Edge sequence of a quickest path; empty when from == to or unreachable.
  std::vector<EdgeId> path(NodeId from, NodeId to, double t);

  std::size_t capacity() const { return capacity_; }
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Key = std::int64_t;
  struct Entry {
    std::shared_ptr<const DistanceRow> row;
    std::uint64_t last_use = 0;
  };

  // Caller holds mutex_.
  const Entry* find_locked(Key key);

  const RoadNetwork* net_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::uint64_t tick_ = 0;
  std::unordered_map<Key, Entry> rows_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// Direction of travel from `from` to `to`, in [0, 2π).
class Bearing {
 public:
  explicit Bearing(double radians);
  double radians() const { return radians_; }

 private:
  double radians_;
};

/// Initial great-circle bearing. Throws GeometryError if s == d.
Bearing bearing(GeoPoint s, GeoPoint d);

/// (1 - cos(θ(loc,dest) - θ(loc,u))) / 2: 0 when u lies on the heading,
/// 1 when it is diametrically behind. Throws GeometryError when `loc`
/// coincides with `dest` or `u`.
double angular_distance(GeoPoint loc, GeoPoint dest, GeoPoint u);

/// What the search needs to know about a vehicle: where it is and, when it
/// is moving, the next stop it is heading for.
struct VehicleHeading {
  NodeId location = 0;
  std::optional<NodeId> dest;
};

/// (1-γ)·adist(v, head(e)) + γ·β(e,t)/max β(·,t). The angular term is 0 for
/// idle vehicles and whenever the bearing is undefined (coincident points).
double vehicle_sensitive_weight(const RoadNetwork& net, const VehicleHeading& vehicle, EdgeId e,
                                double t, double gamma);

}  // namespace foodmatch
