#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "foodmatch/costmodel.hpp"

namespace foodmatch {

enum class Policy { foodmatch, greedy, km };

std::string to_string(Policy policy);
/// Accepts "foodmatch", "greedy" and "km".
Policy parse_policy(const std::string& name);

struct SimConfig {
  double delta = 180.0;
  double omega = 7200.0;
  int max_o = 3;
  int max_i = 10;
  double eta = 60.0;
  double gamma = 0.5;
  double k_factor = 200.0;
  double reject_after = 1800.0;
  double service_cap = 2700.0;
  Policy policy = Policy::foodmatch;
  std::uint64_t rng_seed = 0;
  bool reshuffle = true;  // FoodMatch only
  double max_clock = std::numeric_limits<double>::infinity();

  /// Throws std::invalid_argument on non-positive values, γ outside [0, 1]
  /// or MaxO beyond what the route planner supports.
  void validate() const;
  DispatchParams dispatch() const;
};

/// FoodMatch knobs, separate from SimConfig so the policy can run standalone.
struct FoodMatchParams {
  double eta = 60.0;
  double gamma = 0.5;
  double k_factor = 200.0;
};

/// One FoodMatch round: cluster into batches, sparsified FoodGraph, matching.
/// Orders of a batch matched at Ω, or left unmatched, stay unassigned. The
/// batch's matched weight is split evenly over its orders.
AssignmentOutcome foodmatch_assign(ShortestPaths& sp, std::span<const Order> orders,
                                   std::span<const Vehicle> vehicles, double t,
                                   const FoodMatchParams& fm, const DispatchParams& params = {});

// Streams ---------------------------------------------------------------

/// An order as it appears in the stream; an absent prep time is sampled
/// from the restaurant model.
struct OrderRequest {
  OrderId id = 0;
  double request_time = 0.0;
  NodeId restaurant = 0;
  NodeId customer = 0;
  int items = 1;
  std::optional<double> prep_time;
};

struct VehicleArrival {
  VehicleId id = 0;
  double appear_time = 0.0;
  NodeId start = 0;
};

/// Per-restaurant, per-hour-slot Gaussian prep-time model.
class RestaurantModel {
 public:
  struct Entry {
    double mu = 0.0;
    double sigma = 0.0;
  };

  void set(NodeId restaurant, int slot, Entry entry);
  std::optional<Entry> find(NodeId restaurant, int slot) const;
  const std::map<std::pair<NodeId, int>, Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::pair<NodeId, int>, Entry> entries_;
};

class StreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<OrderRequest> parse_orders(std::istream& in);
std::vector<OrderRequest> load_orders(const std::filesystem::path& path);
void write_orders(std::ostream& out, std::span<const OrderRequest> orders);

std::vector<VehicleArrival> parse_vehicles(std::istream& in);
std::vector<VehicleArrival> load_vehicles(const std::filesystem::path& path);
void write_vehicles(std::ostream& out, std::span<const VehicleArrival> vehicles);

RestaurantModel parse_restaurant_model(std::istream& in);
RestaurantModel load_restaurant_model(const std::filesystem::path& path);
void write_restaurant_model(std::ostream& out, const RestaurantModel& model);

/// Resolves every missing prep time by drawing from N(μ, σ) of the order's
/// restaurant and request slot, truncated at zero. Draws happen in stream
/// order from a generator seeded with `seed`.
std::vector<Order> realize_orders(std::span<const OrderRequest> requests,
                                  const RestaurantModel& model, std::uint64_t seed);

// Results ---------------------------------------------------------------

enum class OrderStatus { pending, assigned, picked_up, delivered, rejected };
std::string to_string(OrderStatus status);

struct LedgerEntry {
  OrderId order = 0;
  OrderStatus status = OrderStatus::pending;
  std::optional<VehicleId> vehicle;
  double edt = 0.0;  // expected delivery time at the last assignment, relative to o^t
  double sdt = 0.0;
  double xdt = 0.0;  // realised: delivery time - o^t - SDT (delivered orders only)
};

/// Sizes of O(ℓ) and V(ℓ) for one window.
struct WindowLoad {
  double clock = 0.0;
  std::size_t orders = 0;
  std::size_t vehicles = 0;
};

struct SimulationMetrics {
  double total_xdt = 0.0;
  double orders_per_km = 0.0;
  double total_wait = 0.0;
  std::size_t rejected = 0;
  std::size_t delivered = 0;
  std::size_t in_flight = 0;
  std::size_t injected = 0;
  double objective = 0.0;  // total_xdt + Ω · rejected
  double assigned_cost = 0.0;  // Σ marginal cost charged at assignment
  double distance_km = 0.0;
  std::size_t windows = 0;
  std::vector<double> per_window_runtime;  // wall-clock seconds
  std::vector<WindowLoad> per_window_load;

  std::size_t overflown_windows(double delta) const;
};

/// Deterministic key=value record; wall-clock runtimes are excluded.
void write_metrics(std::ostream& out, const SimulationMetrics& metrics);
/// One runtime per window plus the overflow count.
void write_timings(std::ostream& out, const SimulationMetrics& metrics, double delta);
void write_ledger(std::ostream& out, std::span<const LedgerEntry> ledger);

/// Σ k·D_k / Σ D_k where D_k is distance driven carrying k orders; 0 when
/// nothing was driven.
double orders_per_km(std::span<const double> distance_by_load);

// Simulation ------------------------------------------------------------

/// A vehicle as tracked by the simulator.
struct FleetVehicle {
  VehicleId id = 0;
  NodeId node = 0;                     // last node reached
  std::optional<EdgeId> current_edge;  // edge being traversed, if any
  double edge_total = 0.0;
  double edge_remaining = 0.0;
  std::deque<EdgeId> route;            // edges still to take toward the next stop
  std::vector<Stop> plan;              // remaining stops
  std::vector<OrderId> carried;
  std::vector<OrderId> committed;

  /// Where planning happens: the head of the current edge, else `node`.
  NodeId planning_location(const RoadNetwork& net) const;
  /// Fraction of the current edge already covered, 0 when at a node.
  double edge_progress() const;
};

struct WindowPools {
  std::vector<OrderId> orders;      // O(ℓ), ascending id
  std::vector<VehicleId> vehicles;  // V(ℓ), ascending id
};

class Simulator {
 public:
  /// Orders must be sorted by request time and vehicles by appearance time.
  Simulator(SimConfig config, const RoadNetwork& net, std::vector<Order> orders,
            std::vector<VehicleArrival> vehicles);

  /// Runs windows until every order is terminal or the clock passes
  /// max_clock, then returns the final metrics.
  SimulationMetrics run();

  /// One window: move vehicles to the window end, ingest arrivals, assign,
  /// reject orders unassigned for longer than reject_after. Returns false
  /// when there is nothing left to do.
  bool step();

  /// Builds O(ℓ) and V(ℓ). Under FoodMatch, assigned-but-unpicked orders are
  /// detached from their vehicles and rejoin the pool; one the next round
  /// leaves unassigned returns to its previous vehicle if it still fits.
  WindowPools collect_window();

  /// Moves every vehicle forward by dt seconds of simulated time.
  void advance_vehicles(double dt);

  SimulationMetrics finalize_metrics() const;
  std::vector<LedgerEntry> ledger() const;

  double clock() const { return clock_; }
  const std::map<VehicleId, FleetVehicle>& fleet() const { return fleet_; }
  OrderStatus status(OrderId id) const;
  /// Marginal cost charged across the assignment rounds so far.
  double assigned_cost() const { return assigned_cost_; }
  /// Ingests arrivals up to `clock()` without assigning; used when a caller
  /// drives the window phases itself.
  void ingest();
  /// Runs the configured policy on the given pools and commits the result.
  AssignmentOutcome assign(const WindowPools& pools);

 private:
  struct OrderState {
    Order order;
    OrderStatus status = OrderStatus::pending;
    std::optional<VehicleId> vehicle;
    double sdt = 0.0;
    double edt = 0.0;
    double delivered_at = 0.0;
    double unassigned_since = 0.0;  // o^t, or the window reshuffling dropped it
  };

  Vehicle snapshot(const FleetVehicle& v) const;
  void replan(FleetVehicle& v);
  void advance(FleetVehicle& v, double from, double to);
  void reject_stale();
  bool finished() const;
  void record_edt(const FleetVehicle& v);

  SimConfig config_;
  const RoadNetwork& net_;
  ShortestPaths sp_;
  std::vector<Order> order_stream_;
  std::vector<VehicleArrival> vehicle_stream_;
  std::size_t next_order_ = 0;
  std::size_t next_vehicle_ = 0;

  double clock_ = 0.0;
  bool started_ = false;
  std::map<OrderId, OrderState> orders_;
  std::vector<OrderId> unassigned_;
  std::map<OrderId, VehicleId> detached_;  // reshuffled this window -> previous vehicle
  std::map<VehicleId, FleetVehicle> fleet_;

  std::vector<double> distance_by_load_;
  double total_wait_ = 0.0;
  double assigned_cost_ = 0.0;
  std::size_t windows_ = 0;
  std::vector<double> runtimes_;
  std::vector<WindowLoad> loads_;
};

/// Convenience wrapper: Simulator(config, ...).run().
SimulationMetrics run(const SimConfig& config, const RoadNetwork& net, std::vector<Order> orders,
                      std::vector<VehicleArrival> vehicles);

}  // namespace foodmatch
