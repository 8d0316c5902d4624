#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foodmatch/roadnet.hpp"
#include "foodmatch/simulator.hpp"

namespace foodmatch {

enum class Topology { grid, random_geometric };

/// Hourly order rates with a lunch and a dinner peak, scaled so that the
/// daily mean is `orders_per_hour`.
std::array<double, kSlotsPerDay> peak_rate_profile(double orders_per_hour);

/// Multiplier applied to free-flow travel times per hour slot (rush hours
/// are slower).
std::array<double, kSlotsPerDay> congestion_profile();

struct WorkloadSpec {
  std::size_t node_count = 400;
  Topology topology = Topology::grid;
  double restaurant_fraction = 0.05;
  std::array<double, kSlotsPerDay> order_rate_per_slot = peak_rate_profile(10.0);
  std::size_t vehicle_count = 50;
  double prep_mu_min = 300.0;
  double prep_mu_max = 900.0;
  double prep_sigma_min = 60.0;
  double prep_sigma_max = 180.0;
  double spacing_km = 0.2;         // grid pitch / mean neighbour distance
  double free_flow_kmh = 25.0;
  double customer_radius = 900.0;  // seconds, in the slowest slot
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument for an infeasible spec.
  void validate() const;
};

struct Workload {
  RoadNetwork network;
  std::vector<NodeId> restaurants;
  std::vector<OrderRequest> orders;  // sorted by request time, ids 0..n-1
  std::vector<VehicleArrival> vehicles;
  RestaurantModel restaurant_model;
};

/// Deterministic under `spec.seed`.
Workload generate(const WorkloadSpec& spec);

/// Writes network.txt, orders.txt, vehicles.txt and restaurants.txt.
void write_workload(const Workload& workload, const std::filesystem::path& dir);

}  // namespace foodmatch
