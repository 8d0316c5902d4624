#include "foodmatch/costmodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace foodmatch {

void validate(const Order& order) {
  if (order.restaurant == order.customer) {
    throw std::invalid_argument("order " + std::to_string(order.id) +
                                ": restaurant and customer must differ");
  }
  if (order.items < 1) {
    throw std::invalid_argument("order " + std::to_string(order.id) + ": items must be >= 1");
  }
  if (!(order.prep_time >= 0.0) || !std::isfinite(order.prep_time)) {
    throw std::invalid_argument("order " + std::to_string(order.id) +
                                ": prep time must be finite and >= 0");
  }
}

int Vehicle::item_count() const {
  int items = 0;
  for (const Order& o : carried) items += o.items;
  for (const Order& o : committed) items += o.items;
  return items;
}

std::size_t AssignmentOutcome::assigned_count() const {
  return static_cast<std::size_t>(
      std::count_if(orders.begin(), orders.end(), [](const Assignment& a) { return a.vehicle.has_value(); }));
}

double AssignmentOutcome::total_cost() const {
  double total = 0.0;
  for (const Assignment& a : orders) {
    if (a.vehicle) total += a.cost;
  }
  return total;
}

std::optional<VehicleId> AssignmentOutcome::vehicle_of(OrderId id) const {
  for (const Assignment& a : orders) {
    if (a.order == id) return a.vehicle;
  }
  return std::nullopt;
}

double expected_delivery_time(const Order& order, double assignment_time, double first_mile,
                              double last_mile) {
  return std::max(assignment_time + first_mile, order.prep_time) + last_mile;
}

double shortest_delivery_time(ShortestPaths& sp, const Order& order) {
  validate(order);
  return order.prep_time + sp.time(order.restaurant, order.customer, order.request_time);
}

double extra_delivery_time(double edt, double sdt) {
  double xdt = edt - sdt;
  if (xdt < -1e-9 * std::max(1.0, std::abs(sdt))) {
    throw std::logic_error("negative extra delivery time: edt " + std::to_string(edt) + " < sdt " +
                           std::to_string(sdt));
  }
  return std::max(0.0, xdt);
}

namespace {

constexpr std::size_t kMaxStops = 2 * kMaxPlannableOrders;

enum class Objective { length, cost };

struct PlanOrder {
  const Order* order = nullptr;
  bool carried = false;
  double elapsed = 0.0;  // time(A(o)) for pending orders, age for carried ones
  double sdt = 0.0;
};

struct StopRef {
  Stop stop;
  std::size_t order_index = 0;
};

/// Exhaustive depth-first enumeration of precedence-respecting stop
/// sequences, visited in lexicographic (order id, kind) order so that the
/// first optimum found is also the lexicographically smallest.
class PlanSearch {
 public:
  PlanSearch(ShortestPaths& sp, std::optional<NodeId> start, std::vector<PlanOrder> orders,
             int slot, Objective objective)
      : orders_(std::move(orders)), objective_(objective), has_start_(start.has_value()) {
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      const Order& o = *orders_[i].order;
      if (!orders_[i].carried) stops_.push_back({{o.restaurant, o.id, StopKind::pickup}, i});
      stops_.push_back({{o.customer, o.id, StopKind::dropoff}, i});
    }
    std::sort(stops_.begin(), stops_.end(), [](const StopRef& a, const StopRef& b) {
      if (a.stop.order != b.stop.order) return a.stop.order < b.stop.order;
      return a.stop.kind < b.stop.kind;
    });
    // Node 0 of the leg table is the start (when present), then the stops.
    std::vector<NodeId> nodes;
    if (start) nodes.push_back(*start);
    for (const StopRef& s : stops_) nodes.push_back(s.stop.node);
    width_ = nodes.size();
    dropoff_of_.assign(orders_.size(), 0);
    for (std::size_t s = 0; s < stops_.size(); ++s) {
      if (stops_[s].stop.kind == StopKind::dropoff) dropoff_of_[stops_[s].order_index] = s;
    }
    legs_.assign(width_ * width_, 0.0);
    // The start is never a destination, so its column stays unused.
    for (std::size_t j = has_start_ ? 1 : 0; j < width_; ++j) {
      std::shared_ptr<const DistanceRow> row;
      for (std::size_t i = 0; i < width_; ++i) {
        if (nodes[i] == nodes[j]) continue;
        if (!row) row = sp.row_to(nodes[j], slot);
        legs_[i * width_ + j] = row->seconds[static_cast<std::size_t>(nodes[i])];
      }
    }
  }

  CostedPlan run() {
    if (stops_.empty()) return {RoutePlan{{}, 0.0}, 0.0};
    for (const PlanOrder& po : orders_) {
      if (!std::isfinite(po.sdt)) return {RoutePlan::infeasible(), kUnreachable};
    }
    picked_.assign(orders_.size(), 0);
    sequence_.clear();
    dfs(0, 0.0, 0.0, 0.0);
    if (!found_) return {RoutePlan::infeasible(), kUnreachable};
    RoutePlan plan;
    plan.length = best_length_;
    for (std::size_t idx : best_sequence_) plan.stops.push_back(stops_[idx].stop);
    return {std::move(plan), best_cost_};
  }

 private:
  double leg(std::size_t from_slot, std::size_t to_stop) const {
    // from_slot: index into the leg table; stops live at offset has_start_.
    return legs_[from_slot * width_ + to_stop + (has_start_ ? 1 : 0)];
  }

  // `length` is pure travel time; `clock` also includes waiting at pickups
  // until the food is ready, and drives the cost.
  void dfs(std::uint32_t visited, double length, double clock, double cost) {
    if (sequence_.size() == stops_.size()) {
      bool better = !found_;
      if (!better) {
        if (objective_ == Objective::length) {
          better = length < best_length_;
        } else {
          better = cost < best_cost_ || (cost == best_cost_ && length < best_length_);
        }
      }
      if (better) {
        found_ = true;
        best_length_ = length;
        best_cost_ = cost;
        best_sequence_ = sequence_;
      }
      return;
    }
    if (objective_ == Objective::length && found_ && length >= best_length_) return;
    if (objective_ == Objective::cost && found_ && cost_bound(visited, clock, cost) > best_cost_) return;

    for (std::size_t s = 0; s < stops_.size(); ++s) {
      if (visited & (1u << s)) continue;
      const StopRef& ref = stops_[s];
      const PlanOrder& po = orders_[ref.order_index];
      if (ref.stop.kind == StopKind::dropoff && !po.carried && !picked_[ref.order_index]) continue;

      double step = 0.0;
      if (!sequence_.empty()) {
        std::size_t from = sequence_.back() + (has_start_ ? 1 : 0);
        step = leg(from, s);
      } else if (has_start_) {
        step = leg(0, s);
      }
      if (!std::isfinite(step)) continue;
      double arrive = clock + step;

      double depart = arrive;
      double added = 0.0;
      if (ref.stop.kind == StopKind::pickup) {
        picked_[ref.order_index] = 1;
        depart = std::max(arrive, po.order->prep_time - po.elapsed);
      } else {
        added = po.elapsed + arrive - po.sdt;
      }

      sequence_.push_back(s);
      dfs(visited | (1u << s), length + step, depart, cost + added);
      sequence_.pop_back();
      if (ref.stop.kind == StopKind::pickup) picked_[ref.order_index] = 0;
    }
  }

  // Every undelivered order is dropped no earlier than one direct leg from
  // here; the slack keeps round-off from pruning an exact tie.
  double cost_bound(std::uint32_t visited, double clock, double cost) const {
    std::size_t from = 0;
    if (!sequence_.empty()) {
      from = sequence_.back() + (has_start_ ? 1 : 0);
    } else if (!has_start_) {
      return -kUnreachable;
    }
    double bound = cost;
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      const std::size_t d = dropoff_of_[i];
      if (visited & (1u << d)) continue;
      bound += orders_[i].elapsed + clock + leg(from, d) - orders_[i].sdt;
    }
    return bound - 1e-9 * (1.0 + std::abs(best_cost_));
  }

  std::vector<PlanOrder> orders_;
  std::vector<std::size_t> dropoff_of_;
  Objective objective_;
  bool has_start_;
  std::vector<StopRef> stops_;
  std::size_t width_ = 0;
  std::vector<double> legs_;

  std::vector<char> picked_;
  std::vector<std::size_t> sequence_;

  bool found_ = false;
  double best_length_ = kUnreachable;
  double best_cost_ = kUnreachable;
  std::vector<std::size_t> best_sequence_;
};

std::vector<PlanOrder> collect_orders(ShortestPaths& sp, std::span<const Order> carried,
                                      std::span<const Order> pending, double now,
                                      bool zero_assignment_time) {
  if (carried.size() + pending.size() > static_cast<std::size_t>(kMaxPlannableOrders)) {
    throw CapacityError("route planning supports at most " + std::to_string(kMaxPlannableOrders) +
                        " orders");
  }
  std::vector<PlanOrder> orders;
  orders.reserve(carried.size() + pending.size());
  for (const Order& o : carried) {
    orders.push_back({&o, true, std::max(0.0, now - o.request_time), shortest_delivery_time(sp, o)});
  }
  for (const Order& o : pending) {
    double elapsed = zero_assignment_time ? 0.0 : std::max(0.0, now - o.request_time);
    orders.push_back({&o, false, elapsed, shortest_delivery_time(sp, o)});
  }
  return orders;
}

}  // namespace

RoutePlan quickest_route_plan(ShortestPaths& sp, NodeId start, std::span<const Order> carried,
                              std::span<const Order> new_orders, double t, const Capacity& capacity) {
  if (carried.size() + new_orders.size() > static_cast<std::size_t>(capacity.max_orders)) {
    throw CapacityError("order set exceeds MaxO");
  }
  sp.network().node(start);
  PlanSearch search(sp, start, collect_orders(sp, carried, new_orders, t, false), time_slot(t),
                    Objective::length);
  return search.run().plan;
}

CostedPlan cheapest_plan(ShortestPaths& sp, const PlanRequest& request) {
  if (request.start) sp.network().node(*request.start);
  PlanSearch search(sp, request.start,
                    collect_orders(sp, request.carried, request.pending, request.now,
                                   request.zero_assignment_time),
                    time_slot(request.now), Objective::cost);
  return search.run();
}

double set_cost(ShortestPaths& sp, NodeId location, std::span<const Order> carried,
                std::span<const Order> orders, double t) {
  return cheapest_plan(sp, {location, carried, orders, t, false}).cost;
}

bool fits(const Vehicle& vehicle, std::span<const Order> batch, const Capacity& capacity) {
  int items = vehicle.item_count();
  for (const Order& o : batch) items += o.items;
  return vehicle.order_count() + batch.size() <= static_cast<std::size_t>(capacity.max_orders) &&
         items <= capacity.max_items;
}

namespace {

std::vector<Order> with_batch(const std::vector<Order>& committed, std::span<const Order> batch) {
  std::vector<Order> all(committed);
  all.insert(all.end(), batch.begin(), batch.end());
  return all;
}

}  // namespace

double vehicle_cost(ShortestPaths& sp, const Vehicle& vehicle, double t) {
  return set_cost(sp, vehicle.location, vehicle.carried, vehicle.committed, t);
}

double marginal_cost(ShortestPaths& sp, std::span<const Order> batch, NodeId first_pickup,
                     const Vehicle& vehicle, double t, const DispatchParams& params,
                     std::optional<double> base_cost) {
  if (!fits(vehicle, batch, params.capacity)) return params.omega;
  if (batch.empty()) return 0.0;
  if (sp.time(vehicle.location, first_pickup, t) > params.service_cap) return params.omega;

  double base = base_cost ? *base_cost : vehicle_cost(sp, vehicle, t);
  std::vector<Order> pending = with_batch(vehicle.committed, batch);
  double extended = set_cost(sp, vehicle.location, vehicle.carried, pending, t);
  if (!std::isfinite(extended) || !std::isfinite(base)) return params.omega;
  return std::clamp(extended - base, 0.0, params.omega);
}

double marginal_cost(ShortestPaths& sp, std::span<const Order> batch, const Vehicle& vehicle,
                     double t, const DispatchParams& params) {
  if (batch.empty()) return fits(vehicle, batch, params.capacity) ? 0.0 : params.omega;
  if (batch.size() > static_cast<std::size_t>(kMaxPlannableOrders)) return params.omega;
  CostedPlan own = cheapest_plan(sp, {std::nullopt, {}, batch, t, true});
  if (!own.feasible()) return params.omega;
  return marginal_cost(sp, batch, own.plan.stops.front().node, vehicle, t, params);
}

}  // namespace foodmatch
