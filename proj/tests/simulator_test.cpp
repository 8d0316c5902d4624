#include "foodmatch/simulator.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <sstream>

#include "foodmatch/baselines.hpp"
#include "foodmatch/workload.hpp"
#include "oracles.hpp"

namespace foodmatch {
namespace {

using ::testing::Contains;
using ::testing::ElementsAre;
using ::testing::Not;

// Four nodes on a line, 60 s per hop in both directions.
RoadNetwork line_network() {
  std::vector<Node> nodes;
  for (NodeId i = 0; i < 4; ++i) nodes.push_back({i, {0.2264, 1.3542 + 1e-4 * i}});
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 3; ++i) {
    edges.push_back({static_cast<EdgeId>(edges.size()), i, i + 1, EdgeWeightProfile::constant(60.0)});
    edges.push_back({static_cast<EdgeId>(edges.size()), i + 1, i, EdgeWeightProfile::constant(60.0)});
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

SimConfig config_for(Policy policy) {
  SimConfig c;
  c.policy = policy;
  return c;
}

TEST(OrdersPerKm, WeightedByLoad) {
  std::vector<double> by_load{6.0, 5.0 + 5.0, 8.0};
  EXPECT_NEAR(orders_per_km(by_load), 1.083, 1e-3);
  EXPECT_DOUBLE_EQ(orders_per_km(by_load), 26.0 / 24.0);
  EXPECT_EQ(orders_per_km(std::vector<double>{0.0, 0.0}), 0.0);
  EXPECT_EQ(orders_per_km(std::vector<double>{}), 0.0);
}

TEST(Simulation, EmptyStreamsGiveZeroMetrics) {
  RoadNetwork net = line_network();
  SimulationMetrics m = run(SimConfig{}, net, {}, {});
  EXPECT_EQ(m.injected, 0u);
  EXPECT_EQ(m.total_xdt, 0.0);
  EXPECT_EQ(m.orders_per_km, 0.0);
  EXPECT_EQ(m.windows, 0u);
}

TEST(Simulation, SingleOrderWaitsForTheNextWindow) {
  RoadNetwork net = line_network();
  for (Policy p : {Policy::foodmatch, Policy::greedy, Policy::km}) {
    Simulator sim(config_for(p), net, {{1, 0, 1, 10.0, 1, 0.0}}, {{7, 0.0, 0}});
    SimulationMetrics m = sim.run();
    EXPECT_EQ(m.delivered, 1u);
    // Seen at the 180 s window boundary, delivered 60 s later.
    EXPECT_DOUBLE_EQ(m.total_xdt, 180.0 + 60.0 - 10.0 - 60.0);
    EXPECT_DOUBLE_EQ(m.orders_per_km, 1.0);
    EXPECT_NEAR(m.distance_km, net.edge_length_km(0), 1e-12);
    EXPECT_EQ(m.total_wait, 0.0);
  }
}

TEST(Simulation, RejectedOrderChargesOmega) {
  RoadNetwork net = line_network();
  SimConfig c;
  c.reject_after = 360.0;
  SimulationMetrics m = run(c, net, {{1, 0, 1, 0.0, 1, 0.0}}, {});
  EXPECT_EQ(m.rejected, 1u);
  EXPECT_EQ(m.delivered, 0u);
  EXPECT_EQ(m.objective, c.omega);
}

TEST(Simulation, RejectsInvalidStreams) {
  RoadNetwork net = line_network();
  EXPECT_THROW(Simulator(SimConfig{}, net, {{1, 0, 1, 50.0, 1, 0.0}, {2, 0, 1, 10.0, 1, 0.0}}, {}),
               StreamError);
  EXPECT_THROW(Simulator(SimConfig{}, net, {{1, 0, 9, 0.0, 1, 0.0}}, {}), StreamError);
  EXPECT_THROW(Simulator(SimConfig{}, net, {}, {{1, 0.0, 4}}), StreamError);
  SimConfig bad;
  bad.gamma = 2.0;
  EXPECT_THROW(Simulator(bad, net, {}, {}), std::invalid_argument);
}

TEST(Simulation, WorkedExampleAssignedCost) {
  auto ex = oracle::worked_example();
  std::vector<VehicleArrival> fleet;
  for (const Vehicle& v : ex.vehicles) fleet.push_back({v.id, 0.0, v.location});
  auto assigned = [&](Policy p, double eta = 60.0) {
    SimConfig c = config_for(p);
    c.eta = eta;
    Simulator sim(c, ex.network, ex.orders, fleet);
    sim.step();
    return sim.assigned_cost();
  };
  EXPECT_EQ(assigned(Policy::greedy), 6.0);
  EXPECT_EQ(assigned(Policy::km), 5.0);
  // Edges here are a few seconds long, so η must be on that scale.
  EXPECT_LE(assigned(Policy::foodmatch, 5.0), 5.0);
  EXPECT_GT(assigned(Policy::foodmatch, 60.0), 5.0);
}

class WindowMechanics : public ::testing::Test {
 protected:
  RoadNetwork net_ = line_network();
};

TEST_F(WindowMechanics, UnpickedOrderRejoinsThePool) {
  Simulator sim(config_for(Policy::foodmatch), net_, {{1, 3, 0, 0.0, 1, 0.0}}, {{5, 0.0, 0}});
  sim.ingest();
  sim.assign(sim.collect_window());
  EXPECT_EQ(sim.status(1), OrderStatus::assigned);
  sim.advance_vehicles(30.0);
  WindowPools pools = sim.collect_window();
  EXPECT_THAT(pools.orders, ElementsAre(1));
  EXPECT_THAT(pools.vehicles, ElementsAre(5));
  EXPECT_EQ(sim.status(1), OrderStatus::pending);
  EXPECT_TRUE(sim.fleet().at(5).committed.empty());
}

// Order 1 loses its vehicle to the much cheaper order 2 in the second window.
// Its rejection age restarts there, so a 20 s limit does not reject it yet.
TEST_F(WindowMechanics, DisplacedOrderRestartsRejectionAge) {
  SimConfig c = config_for(Policy::foodmatch);
  c.delta = 30.0;
  c.reject_after = 20.0;
  c.max_o = 1;
  Simulator sim(c, net_, {{1, 3, 2, 0.0, 1, 0.0}, {2, 1, 0, 20.0, 1, 0.0}}, {{5, 0.0, 0}});
  sim.step();
  EXPECT_EQ(sim.status(1), OrderStatus::assigned);
  sim.step();
  EXPECT_EQ(sim.status(2), OrderStatus::assigned);
  EXPECT_EQ(sim.status(1), OrderStatus::pending);
}

TEST_F(WindowMechanics, BaselinesKeepCommitments) {
  Simulator sim(config_for(Policy::greedy), net_, {{1, 3, 0, 0.0, 1, 0.0}}, {{5, 0.0, 0}});
  sim.ingest();
  sim.assign(sim.collect_window());
  sim.advance_vehicles(30.0);
  WindowPools pools = sim.collect_window();
  EXPECT_TRUE(pools.orders.empty());
  EXPECT_EQ(sim.status(1), OrderStatus::assigned);
}

TEST_F(WindowMechanics, PickedUpOrderIsNeverReshuffled) {
  Simulator sim(config_for(Policy::foodmatch), net_, {{1, 1, 3, 0.0, 1, 0.0}}, {{5, 0.0, 0}});
  sim.ingest();
  sim.assign(sim.collect_window());
  sim.advance_vehicles(90.0);
  EXPECT_EQ(sim.status(1), OrderStatus::picked_up);
  WindowPools pools = sim.collect_window();
  EXPECT_THAT(pools.orders, Not(Contains(1)));
  EXPECT_THAT(sim.fleet().at(5).carried, ElementsAre(1));
}

TEST_F(WindowMechanics, FullVehicleLeavesTheVehiclePool) {
  std::vector<Order> orders{{1, 0, 3, 0.0, 1, 0.0}, {2, 0, 3, 0.0, 1, 0.0}, {3, 0, 2, 0.0, 1, 0.0}};
  SimConfig c = config_for(Policy::greedy);
  Simulator sim(c, net_, orders, {{5, 0.0, 0}});
  sim.ingest();
  sim.assign(sim.collect_window());
  sim.advance_vehicles(1.0);
  EXPECT_EQ(sim.fleet().at(5).carried.size(), 3u);
  EXPECT_TRUE(sim.collect_window().vehicles.empty());
}

TEST_F(WindowMechanics, MidEdgeProgressKeepsNode) {
  Simulator sim(config_for(Policy::greedy), net_, {{1, 2, 3, 0.0, 1, 0.0}}, {{5, 0.0, 0}});
  sim.ingest();
  sim.assign(sim.collect_window());
  sim.advance_vehicles(20.0);
  const FleetVehicle& v = sim.fleet().at(5);
  EXPECT_EQ(v.node, 0);
  ASSERT_TRUE(v.current_edge.has_value());
  EXPECT_NEAR(v.edge_progress(), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(v.planning_location(net_), 1);
  sim.advance_vehicles(50.0);
  EXPECT_EQ(sim.fleet().at(5).node, 1);
  EXPECT_NEAR(sim.fleet().at(5).edge_progress(), 10.0 / 60.0, 1e-12);
}

TEST_F(WindowMechanics, VehicleWaitsForFood) {
  Simulator sim(config_for(Policy::greedy), net_, {{1, 0, 1, 0.0, 1, 100.0}}, {{5, 0.0, 0}});
  sim.ingest();
  sim.assign(sim.collect_window());
  sim.advance_vehicles(40.0);
  EXPECT_EQ(sim.status(1), OrderStatus::assigned);
  EXPECT_DOUBLE_EQ(sim.finalize_metrics().total_wait, 40.0);
  sim.advance_vehicles(100.0);
  EXPECT_EQ(sim.status(1), OrderStatus::picked_up);
  EXPECT_DOUBLE_EQ(sim.finalize_metrics().total_wait, 100.0);
  sim.advance_vehicles(100.0);
  EXPECT_EQ(sim.status(1), OrderStatus::delivered);
}

TEST_F(WindowMechanics, IdleVehicleStaysPut) {
  Simulator sim(config_for(Policy::greedy), net_, {}, {{5, 0.0, 2}});
  sim.ingest();
  sim.advance_vehicles(500.0);
  EXPECT_EQ(sim.fleet().at(5).node, 2);
  EXPECT_FALSE(sim.fleet().at(5).current_edge.has_value());
  EXPECT_EQ(sim.finalize_metrics().distance_km, 0.0);
  EXPECT_THROW(sim.advance_vehicles(0.0), std::invalid_argument);
}

struct SmallCity {
  Workload workload;
  std::vector<Order> orders;
};

SmallCity small_city(std::uint64_t seed, std::size_t vehicles) {
  WorkloadSpec spec;
  spec.node_count = 100;
  spec.vehicle_count = vehicles;
  spec.order_rate_per_slot = peak_rate_profile(12.0);
  spec.seed = seed;
  SmallCity city{generate(spec), {}};
  city.orders = realize_orders(city.workload.orders, city.workload.restaurant_model, seed);
  return city;
}

class SimulationProperties : public ::testing::TestWithParam<Policy> {};

TEST_P(SimulationProperties, ConservationCapacityAndNonNegativeXdt) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SmallCity city = small_city(seed, 4);
    SimConfig c = config_for(GetParam());
    c.max_clock = 8 * 3600.0;
    Simulator sim(c, city.workload.network, city.orders, city.workload.vehicles);
    std::map<OrderId, int> items;
    for (const Order& o : city.orders) items[o.id] = o.items;
    while (sim.clock() + c.delta <= c.max_clock && sim.step()) {
      for (const auto& [id, v] : sim.fleet()) {
        int load = 0;
        for (OrderId o : v.carried) load += items.at(o);
        for (OrderId o : v.committed) load += items.at(o);
        ASSERT_LE(v.carried.size() + v.committed.size(), static_cast<std::size_t>(c.max_o));
        ASSERT_LE(load, c.max_i);
      }
    }
    SimulationMetrics m = sim.finalize_metrics();
    EXPECT_EQ(m.delivered + m.rejected + m.in_flight, m.injected);
    EXPECT_GE(m.orders_per_km, 0.0);
    for (const LedgerEntry& e : sim.ledger()) {
      EXPECT_GE(e.xdt, 0.0);
      if (e.status == OrderStatus::delivered) {
        EXPECT_GE(e.edt, e.sdt - 1e-9);
      }
    }
  }
}

TEST_P(SimulationProperties, IdenticalRunsAreByteIdentical) {
  SmallCity city = small_city(9, 3);
  SimConfig c = config_for(GetParam());
  c.max_clock = 6 * 3600.0;
  auto render = [&] {
    Simulator sim(c, city.workload.network, city.orders, city.workload.vehicles);
    SimulationMetrics m = sim.run();
    std::ostringstream out;
    write_metrics(out, m);
    write_ledger(out, sim.ledger());
    return out.str();
  };
  EXPECT_EQ(render(), render());
}

INSTANTIATE_TEST_SUITE_P(Policies, SimulationProperties,
                         ::testing::Values(Policy::foodmatch, Policy::greedy, Policy::km),
                         [](const auto& info) { return to_string(info.param); });

TEST(PolicyNames, RoundTrip) {
  for (Policy p : {Policy::foodmatch, Policy::greedy, Policy::km}) EXPECT_EQ(parse_policy(to_string(p)), p);
  EXPECT_THROW(parse_policy("fifo"), std::invalid_argument);
}

}  // namespace
}  // namespace foodmatch
