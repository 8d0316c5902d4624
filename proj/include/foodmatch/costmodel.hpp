#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "foodmatch/roadnet.hpp"

namespace foodmatch {

using OrderId = std::int32_t;
using VehicleId = std::int32_t;

/// Largest order count the exhaustive route planner accepts.
inline constexpr int kMaxPlannableOrders = 4;

/// A food order: pick up at `restaurant`, drop off at `customer`.
struct Order {
  OrderId id = 0;
  NodeId restaurant = 0;
  NodeId customer = 0;
  double request_time = 0.0;
  int items = 1;
  double prep_time = 0.0;
};

/// Throws std::invalid_argument if restaurant == customer, items < 1 or the
/// prep time is negative.
void validate(const Order& order);

struct Capacity {
  int max_orders = 3;
  int max_items = 10;
};

class CapacityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Constraints shared by every assignment policy.
struct DispatchParams {
  Capacity capacity;
  double omega = 7200.0;        // penalty / missing-edge weight, seconds
  double service_cap = 2700.0;  // max SP(loc(v), first pickup), seconds
};

enum class StopKind : std::uint8_t { pickup, dropoff };

struct Stop {
  NodeId node = 0;
  OrderId order = 0;
  StopKind kind = StopKind::pickup;

  friend bool operator==(const Stop&, const Stop&) = default;
};

struct RoutePlan {
  std::vector<Stop> stops;
  double length = 0.0;  // seconds

  bool feasible() const { return length < kUnreachable; }
  static RoutePlan infeasible() { return {{}, kUnreachable}; }
};

/// A delivery vehicle as seen by the cost model. `carried` orders are on
/// board (dropoff only); `committed` orders are assigned but not yet picked up.
struct Vehicle {
  VehicleId id = 0;
  NodeId location = 0;
  std::optional<NodeId> dest;
  std::vector<Order> carried;
  std::vector<Order> committed;

  std::size_t order_count() const { return carried.size() + committed.size(); }
  int item_count() const;
};

/// Per-order result of one assignment round.
struct Assignment {
  OrderId order = 0;
  std::optional<VehicleId> vehicle;  // empty: not assigned this round
  double cost = 0.0;                 // marginal cost charged when assigned
};

struct AssignmentOutcome {
  double assignment_time = 0.0;
  std::vector<Assignment> orders;

  std::size_t assigned_count() const;
  double total_cost() const;  // Σ cost over assigned orders
  std::optional<VehicleId> vehicle_of(OrderId id) const;
};

/// Minimum-length plan from `start` that drops every carried order and
/// serves every new order (pickup before dropoff). Ties go to the
/// lexicographically smallest (order id, kind) sequence. Unreachable legs
/// make the result infeasible. Throws CapacityError above max_orders.
RoutePlan quickest_route_plan(ShortestPaths& sp, NodeId start, std::span<const Order> carried,
                              std::span<const Order> new_orders, double t,
                              const Capacity& capacity = {});

/// max(assignment_time + first_mile, prep) + last_mile.
double expected_delivery_time(const Order& order, double assignment_time, double first_mile,
                              double last_mile);

/// prep + SP(restaurant, customer, request_time).
double shortest_delivery_time(ShortestPaths& sp, const Order& order);

/// edt - sdt; throws std::logic_error when edt < sdt beyond round-off.
double extra_delivery_time(double edt, double sdt);

/// Input of the cost-optimal planner.
struct PlanRequest {
  std::optional<NodeId> start;  // empty: start at the plan's first stop
  std::span<const Order> carried;
  std::span<const Order> pending;
  double now = 0.0;
  // Batching simulates vehicles with time(A(o)) = 0; live vehicles use now - o^t.
  bool zero_assignment_time = false;
};

struct CostedPlan {
  RoutePlan plan;
  double cost = 0.0;  // Σ XDT over every order in the plan

  bool feasible() const { return plan.feasible(); }
};

/// Plan minimising Σ XDT (ties: shorter length, then lexicographic order).
/// The vehicle leaves each pickup once that order's food is ready, so an
/// order is delivered at time(A) plus its dropoff time on this schedule. For
/// the first pickup of a plan that is max(time(A) + fm, prep) + lm.
CostedPlan cheapest_plan(ShortestPaths& sp, const PlanRequest& request);

/// Cost(v, O): Σ XDT of the vehicle's carried orders plus `orders` under the
/// cheapest plan from `location`. Empty order set with nothing carried → 0.
double set_cost(ShortestPaths& sp, NodeId location, std::span<const Order> carried,
                std::span<const Order> orders, double t);

/// True when adding `batch` keeps the vehicle within MaxO and MaxI.
bool fits(const Vehicle& vehicle, std::span<const Order> batch, const Capacity& capacity);

/// Cost(v, O ∪ π) - Cost(v, O) clamped to [0, Ω], where O is the vehicle's
/// carried and committed orders. Ω when capacity is violated or the first
/// pickup lies beyond the service cap. `base_cost` may carry a precomputed
/// Cost(v, O).
double marginal_cost(ShortestPaths& sp, std::span<const Order> batch, NodeId first_pickup,
                     const Vehicle& vehicle, double t, const DispatchParams& params,
                     std::optional<double> base_cost = std::nullopt);

/// Convenience overload: π[1]^r taken from the batch's own cheapest plan.
double marginal_cost(ShortestPaths& sp, std::span<const Order> batch, const Vehicle& vehicle,
                     double t, const DispatchParams& params);

/// Cost(v, O) for the vehicle's current order set.
double vehicle_cost(ShortestPaths& sp, const Vehicle& vehicle, double t);

}  // namespace foodmatch
