#include "foodmatch/roadnet.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"

namespace foodmatch {
namespace {

constexpr double kPi = std::numbers::pi;

std::string weights_line(double w) {
  std::string s;
  for (int i = 0; i < kSlotsPerDay; ++i) s += ' ' + std::to_string(w);
  return s;
}

std::string cycle_file(double w = 10.0) {
  return "nodes 3\n0 12.97 77.59\n1 12.98 77.59\n2 12.98 77.60\nedges 3\n"
         "0 0 1" + weights_line(w) + "\n1 1 2" + weights_line(w) + "\n2 2 0" + weights_line(w) + "\n";
}

NetworkErrc parse_error_code(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_network(in);
  } catch (const NetworkError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a NetworkError";
  return NetworkErrc::parse_failure;
}

// Three nodes: A->B directly (5) and A->C->B (2 + 2).
RoadNetwork triangle() {
  std::vector<Node> nodes{{0, {0.0, 0.0}}, {1, {0.001, 0.0}}, {2, {0.0, 0.001}}};
  std::vector<Edge> edges{{0, 0, 1, EdgeWeightProfile::constant(5.0)},
                          {1, 0, 2, EdgeWeightProfile::constant(2.0)},
                          {2, 2, 1, EdgeWeightProfile::constant(2.0)}};
  return RoadNetwork(std::move(nodes), std::move(edges));
}

TEST(NetworkFile, LoadsThreeNodeCycle) {
  std::istringstream in(cycle_file());
  RoadNetwork net = parse_network(in);
  EXPECT_EQ(net.node_count(), 3u);
  EXPECT_EQ(net.edge_count(), 3u);
  EXPECT_NEAR(net.node(0).position.lat, 12.97 * kPi / 180.0, 1e-12);
}

TEST(NetworkFile, RejectsDanglingEndpoint) {
  std::string text = "nodes 2\n0 0 0\n1 0 0.01\nedges 1\n0 0 99" + weights_line(3) + "\n";
  EXPECT_EQ(parse_error_code(text), NetworkErrc::dangling_endpoint);
}

TEST(NetworkFile, RejectsZeroWeight) {
  EXPECT_EQ(parse_error_code(cycle_file(0.0)), NetworkErrc::non_positive_weight);
}

TEST(NetworkFile, RejectsDisconnectedGraph) {
  std::string text = "nodes 3\n0 0 0\n1 0 0.01\n2 0.01 0\nedges 1\n0 0 1" + weights_line(3) + "\n";
  EXPECT_EQ(parse_error_code(text), NetworkErrc::disconnected);
}

TEST(NetworkFile, RejectsMalformedRecord) {
  EXPECT_EQ(parse_error_code("nodes 1\n0 zero 0\nedges 0\n"), NetworkErrc::parse_failure);
  EXPECT_EQ(parse_error_code("nodes 2\n0 0 0\n"), NetworkErrc::parse_failure);
}

TEST(NetworkFile, WriteThenParseRoundTrips) {
  std::mt19937_64 rng(11);
  RoadNetwork net = oracle::random_network(rng, 15, 10);
  std::stringstream buf;
  write_network(buf, net);
  RoadNetwork back = parse_network(buf);
  ASSERT_EQ(back.edge_count(), net.edge_count());
  for (const Edge& e : net.edges()) {
    EXPECT_EQ(back.edge(e.id).from, e.from);
    EXPECT_EQ(back.edge(e.id).weights.slots(), e.weights.slots());
  }
  for (const Node& n : net.nodes()) {
    EXPECT_NEAR(back.node(n.id).position.lat, n.position.lat, 1e-15);
  }
}

TEST(EdgeWeight, LooksUpHourSlot) {
  std::array<double, kSlotsPerDay> w{};
  for (int i = 0; i < kSlotsPerDay; ++i) w[static_cast<std::size_t>(i)] = 10.0 * (i + 1);
  std::vector<Node> nodes{{0, {0.0, 0.0}}, {1, {0.001, 0.0}}};
  RoadNetwork net(std::move(nodes), {{0, 0, 1, EdgeWeightProfile(w)}});
  EXPECT_EQ(edge_weight(net, 0, 0.0), 10.0);
  EXPECT_EQ(edge_weight(net, 0, 3599.0), 10.0);
  EXPECT_EQ(edge_weight(net, 0, 3600.0), 20.0);
  EXPECT_EQ(edge_weight(net, 0, 86400.0 + 7200.0), 30.0);
  EXPECT_THROW(edge_weight(net, 5, 0.0), NetworkError);
}

TEST(ShortestPath, IdentityIsZero) {
  RoadNetwork net = triangle();
  EXPECT_EQ(shortest_path_time(net, 1, 1, 0.0), 0.0);
}

TEST(ShortestPath, PrefersTwoHopDetour) {
  RoadNetwork net = triangle();
  EXPECT_EQ(shortest_path_time(net, 0, 1, 0.0), 4.0);
  ShortestPaths sp(net);
  EXPECT_EQ(sp.time(0, 1, 0.0), 4.0);
  EXPECT_EQ(sp.path(0, 1, 0.0), (std::vector<EdgeId>{1, 2}));
}

TEST(ShortestPath, UnreachableIsInfinite) {
  RoadNetwork net = triangle();
  EXPECT_EQ(shortest_path_time(net, 1, 0, 0.0), kUnreachable);
  ShortestPaths sp(net);
  EXPECT_EQ(sp.time(1, 0, 0.0), kUnreachable);
  EXPECT_TRUE(sp.path(1, 0, 0.0).empty());
}

TEST(ShortestPath, UnknownNodeThrows) {
  RoadNetwork net = triangle();
  EXPECT_THROW(shortest_path_time(net, 0, 7, 0.0), NetworkError);
}

TEST(ShortestPath, AgreesWithBellmanFordOnRandomGraphs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<std::size_t> size(2, 50);
    const std::size_t n = size(rng);
    RoadNetwork net = oracle::random_network(rng, n, n);
    ShortestPaths sp(net);
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n) - 1);
    std::uniform_int_distribution<int> slot(0, kSlotsPerDay - 1);
    for (int q = 0; q < 20; ++q) {
      NodeId a = node(rng), b = node(rng);
      int s = slot(rng);
      double expected = oracle::bellman_ford(net, a, b, s);
      EXPECT_EQ(sp.time_in_slot(a, b, s), expected);
      EXPECT_EQ(shortest_path_time(net, a, b, s * kSecondsPerSlot), expected);
    }
  }
}

TEST(ShortestPath, PathWeightsSumToTime) {
  std::mt19937_64 rng(5);
  RoadNetwork net = oracle::random_network(rng, 30, 30);
  ShortestPaths sp(net);
  for (NodeId a = 0; a < 30; a += 3) {
    for (NodeId b = 0; b < 30; b += 4) {
      double sum = 0.0;
      NodeId at = a;
      for (EdgeId e : sp.path(a, b, 0.0)) {
        EXPECT_EQ(net.edge(e).from, at);
        at = net.edge(e).to;
        sum += edge_weight(net, e, 0.0);
      }
      EXPECT_EQ(at, b);
      EXPECT_DOUBLE_EQ(sum, sp.time(a, b, 0.0));
    }
  }
}

TEST(ShortestPath, TriangleInequality) {
  std::mt19937_64 rng(8);
  RoadNetwork net = oracle::random_network(rng, 40, 60);
  ShortestPaths sp(net);
  std::uniform_int_distribution<NodeId> node(0, 39);
  for (int i = 0; i < 500; ++i) {
    NodeId a = node(rng), b = node(rng), c = node(rng);
    EXPECT_LE(sp.time(a, c, 0.0), sp.time(a, b, 0.0) + sp.time(b, c, 0.0));
  }
}

TEST(ShortestPath, TinyBudgetEvictsButStaysCorrect) {
  std::mt19937_64 rng(9);
  RoadNetwork net = oracle::random_network(rng, 25, 20);
  ShortestPaths sp(net, 1);
  auto dist = oracle::floyd_warshall(net, 0);
  for (NodeId a = 0; a < 25; ++a) {
    for (NodeId b = 0; b < 25; ++b) {
      EXPECT_EQ(sp.time_in_slot(a, b, 0), dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
    }
  }
  EXPECT_GT(sp.misses(), 1u);
}

TEST(Bearing, CardinalDirections) {
  EXPECT_NEAR(bearing({0.0, 0.0}, {0.1, 0.0}).radians(), 0.0, 1e-12);
  EXPECT_NEAR(bearing({0.0, 0.0}, {0.0, 0.1}).radians(), kPi / 2, 1e-12);
  EXPECT_NEAR(bearing({0.0, 0.0}, {-0.1, 0.0}).radians(), kPi, 1e-12);
  EXPECT_NEAR(bearing({0.0, 0.0}, {0.0, -0.1}).radians(), 3 * kPi / 2, 1e-12);
}

TEST(Bearing, IdenticalPointsThrow) {
  EXPECT_THROW(bearing({0.3, 0.2}, {0.3, 0.2}), GeometryError);
}

TEST(Bearing, RangeIsHalfOpen) {
  EXPECT_THROW(Bearing(2 * kPi), std::out_of_range);
  EXPECT_THROW(Bearing(-0.1), std::out_of_range);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double r = bearing({coord(rng), coord(rng)}, {coord(rng), coord(rng)}).radians();
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, 2 * kPi);
  }
}

TEST(AngularDistance, AlignedOppositeAndPerpendicular) {
  GeoPoint loc{0.0, 0.0};
  EXPECT_NEAR(angular_distance(loc, {0.1, 0.0}, {0.05, 0.0}), 0.0, 1e-12);
  EXPECT_NEAR(angular_distance(loc, {0.1, 0.0}, {-0.1, 0.0}), 1.0, 1e-12);
  EXPECT_NEAR(angular_distance(loc, {0.1, 0.0}, {0.0, 0.1}), 0.5, 1e-12);
}

TEST(AngularDistance, CoincidentPointsThrow) {
  EXPECT_THROW(angular_distance({0.1, 0.1}, {0.1, 0.1}, {0.2, 0.2}), GeometryError);
  EXPECT_THROW(angular_distance({0.1, 0.1}, {0.2, 0.2}, {0.1, 0.1}), GeometryError);
}

TEST(AngularDistance, InvariantUnderLongitudeShift) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lat(-1.2, 1.2), lon(-3.0, 3.0), shift(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
    double s = shift(rng);
    GeoPoint a2{a.lat, a.lon + s}, b2{b.lat, b.lon + s}, c2{c.lat, c.lon + s};
    EXPECT_NEAR(angular_distance(a, b, c), angular_distance(a2, b2, c2), 1e-9);
  }
}

class VehicleWeight : public ::testing::Test {
 protected:
  // 0 is the vehicle, 1 lies north (its destination), 2 south, 3 east.
  VehicleWeight()
      : net_({{0, {0.0, 0.0}}, {1, {0.01, 0.0}}, {2, {-0.01, 0.0}}, {3, {0.0, 0.01}}},
             {{0, 0, 1, EdgeWeightProfile::constant(10.0)},
              {1, 0, 2, EdgeWeightProfile::constant(20.0)},
              {2, 0, 3, EdgeWeightProfile::constant(5.0)}}) {}
  RoadNetwork net_;
  VehicleHeading moving_{0, 1};
  VehicleHeading idle_{0, std::nullopt};
};

TEST_F(VehicleWeight, GammaOneIsNormalisedTravelTime) {
  EXPECT_DOUBLE_EQ(vehicle_sensitive_weight(net_, moving_, 1, 0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(vehicle_sensitive_weight(net_, moving_, 2, 0.0, 1.0), 0.25);
}

TEST_F(VehicleWeight, GammaZeroAlignedIsZero) {
  EXPECT_NEAR(vehicle_sensitive_weight(net_, moving_, 0, 0.0, 0.0), 0.0, 1e-12);
}

TEST_F(VehicleWeight, HalfGammaOppositeLongestEdgeIsOne) {
  EXPECT_NEAR(vehicle_sensitive_weight(net_, moving_, 1, 0.0, 0.5), 1.0, 1e-12);
}

TEST_F(VehicleWeight, IdleVehicleIgnoresAngle) {
  EXPECT_DOUBLE_EQ(vehicle_sensitive_weight(net_, idle_, 1, 0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(vehicle_sensitive_weight(net_, idle_, 2, 0.0, 0.5), 0.125);
}

TEST_F(VehicleWeight, StaysInUnitInterval) {
  for (double g : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (EdgeId e = 0; e < 3; ++e) {
      double w = vehicle_sensitive_weight(net_, moving_, e, 0.0, g);
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
    }
  }
}

TEST(TimeSlot, WrapsPastMidnight) {
  EXPECT_EQ(time_slot(0.0), 0);
  EXPECT_EQ(time_slot(3599.999), 0);
  EXPECT_EQ(time_slot(23 * 3600.0), 23);
  EXPECT_EQ(time_slot(86400.0), 0);
  EXPECT_EQ(time_slot(86400.0 + 5 * 3600.0 + 1.0), 5);
}

}  // namespace
}  // namespace foodmatch
