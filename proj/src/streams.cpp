#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "foodmatch/simulator.hpp"
#include "foodmatch/text_io.hpp"

namespace foodmatch {

namespace {

[[noreturn]] void stream_error(const std::string& what, std::size_t line, const std::string& msg) {
  throw StreamError(what + " line " + std::to_string(line) + ": " + msg);
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StreamError("cannot open " + path.string());
  return in;
}

}  // namespace

void RestaurantModel::set(NodeId restaurant, int slot, Entry entry) {
  if (slot < 0 || slot >= kSlotsPerDay) throw std::invalid_argument("slot out of range");
  if (!(entry.mu >= 0.0) || !(entry.sigma >= 0.0) || !std::isfinite(entry.mu) ||
      !std::isfinite(entry.sigma)) {
    throw std::invalid_argument("prep model needs finite mu, sigma >= 0");
  }
  entries_[{restaurant, slot}] = entry;
}

std::optional<RestaurantModel::Entry> RestaurantModel::find(NodeId restaurant, int slot) const {
  auto it = entries_.find({restaurant, slot});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<OrderRequest> parse_orders(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> f;
  std::vector<OrderRequest> out;
  while (reader.next(f)) {
    if (f.size() != 6) {
      stream_error("orders", reader.line_number(),
                   "expected 'order_id request_time restaurant customer items prep'");
    }
    auto id = parse_integer<OrderId>(f[0]);
    auto t = parse_double(f[1]);
    auto r = parse_integer<NodeId>(f[2]);
    auto c = parse_integer<NodeId>(f[3]);
    auto items = parse_integer<int>(f[4]);
    auto prep = parse_double(f[5]);
    if (!id || !t || !r || !c || !items || !prep) stream_error("orders", reader.line_number(), "malformed record");
    if (!std::isfinite(*t) || *t < 0.0) stream_error("orders", reader.line_number(), "bad request time");
    OrderRequest req{*id, *t, *r, *c, *items, std::nullopt};
    if (*prep == -1.0) {
      req.prep_time.reset();
    } else if (*prep >= 0.0 && std::isfinite(*prep)) {
      req.prep_time = *prep;
    } else {
      stream_error("orders", reader.line_number(), "prep time must be >= 0 or -1");
    }
    out.push_back(req);
  }
  return out;
}

std::vector<OrderRequest> load_orders(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_orders(in);
}

void write_orders(std::ostream& out, std::span<const OrderRequest> orders) {
  for (const OrderRequest& o : orders) {
    out << o.id << ' ' << format_number(o.request_time) << ' ' << o.restaurant << ' ' << o.customer
        << ' ' << o.items << ' ' << (o.prep_time ? format_number(*o.prep_time) : std::string("-1"))
        << '\n';
  }
}

std::vector<VehicleArrival> parse_vehicles(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> f;
  std::vector<VehicleArrival> out;
  while (reader.next(f)) {
    if (f.size() != 3) stream_error("vehicles", reader.line_number(), "expected 'vehicle_id appear_time start_node'");
    auto id = parse_integer<VehicleId>(f[0]);
    auto t = parse_double(f[1]);
    auto node = parse_integer<NodeId>(f[2]);
    if (!id || !t || !node || !std::isfinite(*t) || *t < 0.0) {
      stream_error("vehicles", reader.line_number(), "malformed record");
    }
    out.push_back({*id, *t, *node});
  }
  return out;
}

std::vector<VehicleArrival> load_vehicles(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_vehicles(in);
}

void write_vehicles(std::ostream& out, std::span<const VehicleArrival> vehicles) {
  for (const VehicleArrival& v : vehicles) {
    out << v.id << ' ' << format_number(v.appear_time) << ' ' << v.start << '\n';
  }
}

RestaurantModel parse_restaurant_model(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> f;
  RestaurantModel model;
  while (reader.next(f)) {
    if (f.size() != 4) stream_error("restaurant model", reader.line_number(), "expected 'node slot mu sigma'");
    auto node = parse_integer<NodeId>(f[0]);
    auto slot = parse_integer<int>(f[1]);
    auto mu = parse_double(f[2]);
    auto sigma = parse_double(f[3]);
    if (!node || !slot || !mu || !sigma) stream_error("restaurant model", reader.line_number(), "malformed record");
    try {
      model.set(*node, *slot, {*mu, *sigma});
    } catch (const std::invalid_argument& e) {
      stream_error("restaurant model", reader.line_number(), e.what());
    }
  }
  return model;
}

RestaurantModel load_restaurant_model(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_restaurant_model(in);
}

void write_restaurant_model(std::ostream& out, const RestaurantModel& model) {
  for (const auto& [key, e] : model.entries()) {
    out << key.first << ' ' << key.second << ' ' << format_number(e.mu) << ' '
        << format_number(e.sigma) << '\n';
  }
}

std::vector<Order> realize_orders(std::span<const OrderRequest> requests,
                                  const RestaurantModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Order> out;
  out.reserve(requests.size());
  for (const OrderRequest& r : requests) {
    Order o{r.id, r.restaurant, r.customer, r.request_time, r.items, 0.0};
    if (r.prep_time) {
      o.prep_time = *r.prep_time;
    } else {
      int slot = time_slot(r.request_time);
      auto entry = model.find(r.restaurant, slot);
      if (!entry) {
        throw StreamError("order " + std::to_string(r.id) + ": no prep model for restaurant " +
                          std::to_string(r.restaurant) + " in slot " + std::to_string(slot));
      }
      // Truncated at zero by rejection sampling.
      double draw = entry->mu;
      if (entry->sigma > 0.0) {
        std::normal_distribution<double> dist(entry->mu, entry->sigma);
        draw = -1.0;
        for (int attempt = 0; attempt < 64 && draw < 0.0; ++attempt) draw = dist(rng);
      }
      o.prep_time = std::max(0.0, draw);
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace foodmatch
