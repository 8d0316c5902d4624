#include "foodmatch/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>

#include "foodmatch/baselines.hpp"
#include "foodmatch/batching.hpp"
#include "foodmatch/foodgraph.hpp"
#include "foodmatch/matching.hpp"
#include "foodmatch/text_io.hpp"

namespace foodmatch {

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::foodmatch: return "foodmatch";
    case Policy::greedy: return "greedy";
    case Policy::km: return "km";
  }
  return "unknown";
}

Policy parse_policy(const std::string& name) {
  if (name == "foodmatch") return Policy::foodmatch;
  if (name == "greedy") return Policy::greedy;
  if (name == "km") return Policy::km;
  throw std::invalid_argument("unknown policy '" + name + "'");
}

std::string to_string(OrderStatus status) {
  switch (status) {
    case OrderStatus::pending: return "pending";
    case OrderStatus::assigned: return "assigned";
    case OrderStatus::picked_up: return "picked_up";
    case OrderStatus::delivered: return "delivered";
    case OrderStatus::rejected: return "rejected";
  }
  return "unknown";
}

void SimConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  positive(delta, "delta");
  positive(omega, "omega");
  positive(eta, "eta");
  positive(k_factor, "k_factor");
  positive(reject_after, "reject_after");
  positive(service_cap, "service_cap");
  positive(max_clock, "max_clock");
  if (max_o < 1 || max_i < 1) throw std::invalid_argument("max_o and max_i must be >= 1");
  if (max_o > kMaxPlannableOrders) {
    throw std::invalid_argument("max_o must not exceed " + std::to_string(kMaxPlannableOrders));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
}

DispatchParams SimConfig::dispatch() const {
  return {{max_o, max_i}, omega, service_cap};
}

AssignmentOutcome foodmatch_assign(ShortestPaths& sp, std::span<const Order> orders,
                                   std::span<const Vehicle> vehicles, double t,
                                   const FoodMatchParams& fm, const DispatchParams& params) {
  AssignmentOutcome outcome;
  outcome.assignment_time = t;
  std::vector<Order> sorted(orders.begin(), orders.end());
  std::sort(sorted.begin(), sorted.end(), [](const Order& a, const Order& b) { return a.id < b.id; });
  std::map<OrderId, Assignment> by_order;
  for (const Order& o : sorted) by_order[o.id] = {o.id, std::nullopt, 0.0};

  if (!sorted.empty() && !vehicles.empty()) {
    ClusterResult clustered = cluster(sp, sorted, fm.eta, t, params.capacity);
    std::size_t k = sparsification_degree(fm.k_factor, sorted.size(), vehicles.size(),
                                          clustered.batches.size());
    FoodGraph graph = build_sparsified(sp, std::move(clustered.batches),
                                       std::vector<Vehicle>(vehicles.begin(), vehicles.end()), k, t,
                                       fm.gamma, params);
    auto matching = min_weight_matching_sparse(graph.weights, graph.omega);
    for (const auto& [r, c] : matching.pairs) {
      double w = graph.weights(r, c);
      if (w >= params.omega) continue;
      const Batch& batch = graph.batches[static_cast<std::size_t>(r)];
      VehicleId vid = graph.vehicles[static_cast<std::size_t>(c)].id;
      for (const Order& o : batch.orders) {
        by_order[o.id] = {o.id, vid, w / static_cast<double>(batch.orders.size())};
      }
    }
  }
  for (auto& [id, a] : by_order) outcome.orders.push_back(a);
  return outcome;
}

// Metrics ---------------------------------------------------------------

double orders_per_km(std::span<const double> distance_by_load) {
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < distance_by_load.size(); ++k) {
    weighted += static_cast<double>(k) * distance_by_load[k];
    total += distance_by_load[k];
  }
  return total > 0.0 ? weighted / total : 0.0;
}

std::size_t SimulationMetrics::overflown_windows(double delta) const {
  return static_cast<std::size_t>(std::count_if(per_window_runtime.begin(), per_window_runtime.end(),
                                                [delta](double r) { return r > delta; }));
}

void write_metrics(std::ostream& out, const SimulationMetrics& m) {
  out << "total_xdt=" << format_number(m.total_xdt) << '\n'
      << "orders_per_km=" << format_number(m.orders_per_km) << '\n'
      << "total_wait=" << format_number(m.total_wait) << '\n'
      << "rejected=" << m.rejected << '\n'
      << "delivered=" << m.delivered << '\n'
      << "in_flight=" << m.in_flight << '\n'
      << "injected=" << m.injected << '\n'
      << "objective=" << format_number(m.objective) << '\n'
      << "assigned_cost=" << format_number(m.assigned_cost) << '\n'
      << "distance_km=" << format_number(m.distance_km) << '\n'
      << "windows=" << m.windows << '\n';
}

void write_timings(std::ostream& out, const SimulationMetrics& m, double delta) {
  out << "overflown_windows=" << m.overflown_windows(delta) << '\n';
  out << "per_window_runtime=";
  for (std::size_t i = 0; i < m.per_window_runtime.size(); ++i) {
    if (i) out << ',';
    out << format_number(m.per_window_runtime[i]);
  }
  out << '\n';
}

void write_ledger(std::ostream& out, std::span<const LedgerEntry> ledger) {
  out << "order_id status assigned_vehicle edt sdt xdt\n";
  for (const LedgerEntry& e : ledger) {
    out << e.order << ' ' << to_string(e.status) << ' '
        << (e.vehicle ? std::to_string(*e.vehicle) : std::string("-")) << ' '
        << format_number(e.edt) << ' ' << format_number(e.sdt) << ' ' << format_number(e.xdt)
        << '\n';
  }
}

// Simulator -------------------------------------------------------------

NodeId FleetVehicle::planning_location(const RoadNetwork& net) const {
  return current_edge ? net.edge(*current_edge).to : node;
}

double FleetVehicle::edge_progress() const {
  if (!current_edge || edge_total <= 0.0) return 0.0;
  return 1.0 - edge_remaining / edge_total;
}

Simulator::Simulator(SimConfig config, const RoadNetwork& net, std::vector<Order> orders,
                     std::vector<VehicleArrival> vehicles)
    : config_(config), net_(net), sp_(net), order_stream_(std::move(orders)),
      vehicle_stream_(std::move(vehicles)) {
  config_.validate();
  std::set<OrderId> order_ids;
  for (std::size_t i = 0; i < order_stream_.size(); ++i) {
    const Order& o = order_stream_[i];
    if (i > 0 && o.request_time < order_stream_[i - 1].request_time) {
      throw StreamError("order stream is not sorted by request time at order " + std::to_string(o.id));
    }
    if (!net_.valid_node(o.restaurant) || !net_.valid_node(o.customer)) {
      throw StreamError("order " + std::to_string(o.id) + " references an unknown node");
    }
    validate(o);
    if (!order_ids.insert(o.id).second) throw StreamError("duplicate order id " + std::to_string(o.id));
  }
  std::set<VehicleId> vehicle_ids;
  for (std::size_t i = 0; i < vehicle_stream_.size(); ++i) {
    const VehicleArrival& v = vehicle_stream_[i];
    if (i > 0 && v.appear_time < vehicle_stream_[i - 1].appear_time) {
      throw StreamError("vehicle stream is not sorted by appearance time at vehicle " + std::to_string(v.id));
    }
    if (!net_.valid_node(v.start)) {
      throw StreamError("vehicle " + std::to_string(v.id) + " starts at an unknown node");
    }
    if (!vehicle_ids.insert(v.id).second) throw StreamError("duplicate vehicle id " + std::to_string(v.id));
  }
  distance_by_load_.assign(static_cast<std::size_t>(config_.max_o) + 1, 0.0);
}

OrderStatus Simulator::status(OrderId id) const {
  auto it = orders_.find(id);
  if (it == orders_.end()) throw std::out_of_range("order " + std::to_string(id) + " not injected");
  return it->second.status;
}

bool Simulator::finished() const {
  if (next_order_ < order_stream_.size()) return false;
  return std::all_of(orders_.begin(), orders_.end(), [](const auto& kv) {
    return kv.second.status == OrderStatus::delivered || kv.second.status == OrderStatus::rejected;
  });
}

SimulationMetrics Simulator::run() {
  while (!finished()) {
    double next = started_ ? clock_ + config_.delta : 0.0;
    if (next > config_.max_clock) break;
    step();
  }
  return finalize_metrics();
}

bool Simulator::step() {
  if (finished()) return false;
  if (!started_) {
    double first = std::numeric_limits<double>::infinity();
    if (!order_stream_.empty()) first = std::min(first, order_stream_.front().request_time);
    if (!vehicle_stream_.empty()) first = std::min(first, vehicle_stream_.front().appear_time);
    clock_ = std::floor(first / config_.delta) * config_.delta;
    started_ = true;
  } else {
    advance_vehicles(config_.delta);
  }
  ingest();
  auto begin = std::chrono::steady_clock::now();
  WindowPools pools = collect_window();
  loads_.push_back({clock_, pools.orders.size(), pools.vehicles.size()});
  assign(pools);
  auto end = std::chrono::steady_clock::now();
  runtimes_.push_back(std::chrono::duration<double>(end - begin).count());
  reject_stale();
  ++windows_;
  return !finished();
}

void Simulator::ingest() {
  while (next_vehicle_ < vehicle_stream_.size() &&
         vehicle_stream_[next_vehicle_].appear_time <= clock_) {
    const VehicleArrival& a = vehicle_stream_[next_vehicle_++];
    FleetVehicle v;
    v.id = a.id;
    v.node = a.start;
    fleet_.emplace(a.id, std::move(v));
  }
  while (next_order_ < order_stream_.size() && order_stream_[next_order_].request_time <= clock_) {
    const Order& o = order_stream_[next_order_++];
    OrderState state;
    state.order = o;
    state.sdt = shortest_delivery_time(sp_, o);
    state.unassigned_since = o.request_time;
    if (std::isfinite(state.sdt)) {
      unassigned_.push_back(o.id);
    } else {
      // The customer cannot be reached from the restaurant at all.
      state.status = OrderStatus::rejected;
    }
    orders_.emplace(o.id, state);
  }
}

WindowPools Simulator::collect_window() {
  WindowPools pools;
  const bool reshuffle = config_.policy == Policy::foodmatch && config_.reshuffle;
  detached_.clear();
  for (auto& [id, v] : fleet_) {
    if (reshuffle && !v.committed.empty()) {
      for (OrderId oid : v.committed) {
        OrderState& s = orders_.at(oid);
        s.status = OrderStatus::pending;
        s.vehicle.reset();
        unassigned_.push_back(oid);
        detached_.emplace(oid, id);
      }
      v.committed.clear();
      replan(v);
    }
    int items = 0;
    for (OrderId oid : v.carried) items += orders_.at(oid).order.items;
    std::size_t count = v.carried.size();
    if (!reshuffle) {
      for (OrderId oid : v.committed) items += orders_.at(oid).order.items;
      count += v.committed.size();
    }
    if (count < static_cast<std::size_t>(config_.max_o) && items < config_.max_i) {
      pools.vehicles.push_back(id);
    }
  }
  std::sort(unassigned_.begin(), unassigned_.end());
  unassigned_.erase(std::unique(unassigned_.begin(), unassigned_.end()), unassigned_.end());
  pools.orders = unassigned_;
  return pools;
}

Vehicle Simulator::snapshot(const FleetVehicle& v) const {
  Vehicle out;
  out.id = v.id;
  out.location = v.planning_location(net_);
  if (!v.plan.empty() && v.plan.front().node != out.location) out.dest = v.plan.front().node;
  for (OrderId oid : v.carried) out.carried.push_back(orders_.at(oid).order);
  for (OrderId oid : v.committed) out.committed.push_back(orders_.at(oid).order);
  return out;
}

AssignmentOutcome Simulator::assign(const WindowPools& pools) {
  std::vector<Order> orders;
  orders.reserve(pools.orders.size());
  for (OrderId id : pools.orders) orders.push_back(orders_.at(id).order);
  std::vector<Vehicle> vehicles;
  vehicles.reserve(pools.vehicles.size());
  for (VehicleId id : pools.vehicles) vehicles.push_back(snapshot(fleet_.at(id)));

  const DispatchParams params = config_.dispatch();
  AssignmentOutcome outcome;
  switch (config_.policy) {
    case Policy::foodmatch:
      outcome = foodmatch_assign(sp_, orders, vehicles, clock_,
                                 {config_.eta, config_.gamma, config_.k_factor}, params);
      break;
    case Policy::greedy:
      outcome = greedy_assign(sp_, orders, vehicles, clock_, params);
      break;
    case Policy::km:
      outcome = vanilla_km_assign(sp_, orders, vehicles, clock_, params);
      break;
  }

  std::set<VehicleId> touched;
  std::set<OrderId> placed;
  for (const Assignment& a : outcome.orders) {
    if (!a.vehicle) continue;
    OrderState& s = orders_.at(a.order);
    s.status = OrderStatus::assigned;
    s.vehicle = a.vehicle;
    fleet_.at(*a.vehicle).committed.push_back(a.order);
    assigned_cost_ += a.cost;
    touched.insert(*a.vehicle);
    placed.insert(a.order);
  }
  // A reshuffled order the new round left out goes back to its previous
  // vehicle when that vehicle still has room.
  for (const auto& [oid, vid] : detached_) {
    if (placed.count(oid)) continue;
    FleetVehicle& v = fleet_.at(vid);
    const Order& o = orders_.at(oid).order;
    const double cost = marginal_cost(sp_, std::span(&o, 1), snapshot(v), clock_, params);
    if (cost >= params.omega) continue;
    OrderState& s = orders_.at(oid);
    s.status = OrderStatus::assigned;
    s.vehicle = vid;
    v.committed.push_back(oid);
    assigned_cost_ += cost;
    touched.insert(vid);
    placed.insert(oid);
  }
  for (const auto& [oid, vid] : detached_) {
    if (!placed.count(oid)) orders_.at(oid).unassigned_since = clock_;
  }
  detached_.clear();
  std::erase_if(unassigned_, [&](OrderId id) { return placed.count(id) > 0; });
  for (VehicleId id : touched) {
    FleetVehicle& v = fleet_.at(id);
    if (v.carried.size() + v.committed.size() > static_cast<std::size_t>(config_.max_o)) {
      throw std::logic_error("assignment exceeds MaxO for vehicle " + std::to_string(id));
    }
    replan(v);
    record_edt(v);
  }
  return outcome;
}

void Simulator::replan(FleetVehicle& v) {
  Vehicle snap = snapshot(v);
  CostedPlan plan = cheapest_plan(sp_, {snap.location, snap.carried, snap.committed, clock_, false});
  if (!plan.feasible()) {
    throw std::logic_error("vehicle " + std::to_string(v.id) + " has no feasible route plan");
  }
  v.plan = std::move(plan.plan.stops);
  v.route.clear();
}

void Simulator::record_edt(const FleetVehicle& v) {
  NodeId at = v.planning_location(net_);
  double clock = 0.0;
  for (const Stop& s : v.plan) {
    clock += sp_.time(at, s.node, clock_);
    at = s.node;
    OrderState& st = orders_.at(s.order);
    const double elapsed = std::max(0.0, clock_ - st.order.request_time);
    if (s.kind == StopKind::pickup) {
      clock = std::max(clock, st.order.prep_time - elapsed);
    } else if (st.status == OrderStatus::assigned) {
      st.edt = elapsed + clock;
    }
  }
}

void Simulator::advance_vehicles(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const double to = clock_ + dt;
  for (auto& [id, v] : fleet_) advance(v, clock_, to);
  clock_ = to;
}

void Simulator::advance(FleetVehicle& v, double from, double to) {
  double c = from;
  while (true) {
    if (v.current_edge) {
      if (c >= to) return;
      const double take = std::min(v.edge_remaining, to - c);
      const std::size_t load = v.carried.size();
      if (distance_by_load_.size() <= load) distance_by_load_.resize(load + 1, 0.0);
      distance_by_load_[load] += net_.edge_length_km(*v.current_edge) * (take / v.edge_total);
      v.edge_remaining -= take;
      c += take;
      if (v.edge_remaining > 1e-9) return;
      v.node = net_.edge(*v.current_edge).to;
      v.current_edge.reset();
      v.edge_remaining = 0.0;
      v.edge_total = 0.0;
      continue;
    }
    if (v.plan.empty()) return;
    const Stop stop = v.plan.front();
    if (v.node == stop.node) {
      OrderState& s = orders_.at(stop.order);
      if (stop.kind == StopKind::pickup) {
        const double ready = s.order.request_time + s.order.prep_time;
        if (c < ready) {
          const double wait = std::min(ready, to) - c;
          total_wait_ += wait;
          c += wait;
          if (c < ready) return;
        }
        std::erase(v.committed, stop.order);
        v.carried.push_back(stop.order);
        s.status = OrderStatus::picked_up;
      } else {
        std::erase(v.carried, stop.order);
        s.status = OrderStatus::delivered;
        s.delivered_at = c;
      }
      v.plan.erase(v.plan.begin());
      v.route.clear();
      continue;
    }
    if (c >= to) return;
    if (v.route.empty()) {
      auto path = sp_.path(v.node, stop.node, c);
      if (path.empty()) {
        throw std::logic_error("vehicle " + std::to_string(v.id) + " cannot reach node " +
                               std::to_string(stop.node));
      }
      v.route.assign(path.begin(), path.end());
    }
    v.current_edge = v.route.front();
    v.route.pop_front();
    v.edge_total = v.edge_remaining = edge_weight(net_, *v.current_edge, c);
  }
}

void Simulator::reject_stale() {
  std::erase_if(unassigned_, [&](OrderId id) {
    OrderState& s = orders_.at(id);
    if (clock_ - s.unassigned_since > config_.reject_after) {
      s.status = OrderStatus::rejected;
      return true;
    }
    return false;
  });
}

SimulationMetrics Simulator::finalize_metrics() const {
  SimulationMetrics m;
  for (const auto& [id, s] : orders_) {
    ++m.injected;
    if (s.status == OrderStatus::delivered) {
      ++m.delivered;
      m.total_xdt += std::max(0.0, s.delivered_at - s.order.request_time - s.sdt);
    } else if (s.status == OrderStatus::rejected) {
      ++m.rejected;
    } else {
      ++m.in_flight;
    }
  }
  m.orders_per_km = orders_per_km(distance_by_load_);
  for (double d : distance_by_load_) m.distance_km += d;
  m.total_wait = total_wait_;
  m.objective = m.total_xdt + config_.omega * static_cast<double>(m.rejected);
  m.assigned_cost = assigned_cost_;
  m.windows = windows_;
  m.per_window_runtime = runtimes_;
  m.per_window_load = loads_;
  return m;
}

std::vector<LedgerEntry> Simulator::ledger() const {
  std::vector<LedgerEntry> out;
  out.reserve(orders_.size());
  for (const auto& [id, s] : orders_) {
    LedgerEntry e{id, s.status, s.vehicle, s.edt, s.sdt, 0.0};
    if (s.status == OrderStatus::delivered) {
      e.xdt = std::max(0.0, s.delivered_at - s.order.request_time - s.sdt);
    }
    out.push_back(e);
  }
  return out;
}

SimulationMetrics run(const SimConfig& config, const RoadNetwork& net, std::vector<Order> orders,
                      std::vector<VehicleArrival> vehicles) {
  Simulator sim(config, net, std::move(orders), std::move(vehicles));
  return sim.run();
}

}  // namespace foodmatch
