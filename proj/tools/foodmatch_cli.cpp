// foodmatch: simulate dispatch policies, generate workloads, run oracles.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "foodmatch/baselines.hpp"
#include "foodmatch/matching.hpp"
#include "foodmatch/simulator.hpp"
#include "foodmatch/text_io.hpp"
#include "foodmatch/workload.hpp"
#include "oracles.hpp"

namespace fm = foodmatch;

namespace {

struct SimulateArgs {
  std::string network, orders, vehicles, restaurants, policy = "foodmatch";
  std::string out = "-", ledger, timings;
  fm::SimConfig config;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

int simulate(SimulateArgs& args) {
  args.config.policy = fm::parse_policy(args.policy);
  fm::RoadNetwork net = fm::load_network(args.network);
  auto requests = fm::load_orders(args.orders);
  auto vehicles = fm::load_vehicles(args.vehicles);
  fm::RestaurantModel model;
  if (!args.restaurants.empty()) model = fm::load_restaurant_model(args.restaurants);
  auto orders = fm::realize_orders(requests, model, args.config.rng_seed);

  fm::Simulator sim(args.config, net, std::move(orders), std::move(vehicles));
  fm::SimulationMetrics metrics = sim.run();
  if (args.out == "-") {
    fm::write_metrics(std::cout, metrics);
  } else {
    auto out = open_output(args.out);
    fm::write_metrics(out, metrics);
  }
  if (!args.ledger.empty()) {
    auto out = open_output(args.ledger);
    fm::write_ledger(out, sim.ledger());
  }
  if (!args.timings.empty()) {
    auto out = open_output(args.timings);
    fm::write_timings(out, metrics, args.config.delta);
  }
  return 0;
}

struct GenArgs {
  std::size_t nodes = 400;
  bool grid = false;
  bool geometric = false;
  double orders_per_hour = 10.0;
  std::size_t vehicles = 50;
  std::uint64_t seed = 1;
  double restaurant_fraction = 0.05;
  std::string out = "workload";
};

int gen(const GenArgs& args) {
  fm::WorkloadSpec spec;
  spec.node_count = args.nodes;
  spec.topology = args.geometric ? fm::Topology::random_geometric : fm::Topology::grid;
  spec.order_rate_per_slot = fm::peak_rate_profile(args.orders_per_hour);
  spec.vehicle_count = args.vehicles;
  spec.seed = args.seed;
  spec.restaurant_fraction = args.restaurant_fraction;
  fm::Workload w = fm::generate(spec);
  fm::write_workload(w, args.out);
  std::cout << "nodes=" << w.network.node_count() << " edges=" << w.network.edge_count()
            << " restaurants=" << w.restaurants.size() << " orders=" << w.orders.size()
            << " vehicles=" << w.vehicles.size() << " dir=" << args.out << '\n';
  return 0;
}

int oracle_worked_example() {
  auto ex = fm::oracle::worked_example();
  fm::ShortestPaths sp(ex.network);
  fm::DispatchParams params;
  std::cout << "marginal costs (order x vehicle):\n";
  for (const auto& o : ex.orders) {
    std::cout << "  o" << o.id << ':';
    for (const auto& v : ex.vehicles) {
      std::cout << ' ' << fm::format_number(fm::marginal_cost(sp, std::span(&o, 1), o.restaurant, v, 0.0, params));
    }
    std::cout << '\n';
  }
  auto greedy = fm::greedy_assign(sp, ex.orders, ex.vehicles, 0.0, params);
  auto km = fm::vanilla_km_assign(sp, ex.orders, ex.vehicles, 0.0, params);
  std::cout << "greedy total=" << fm::format_number(greedy.total_cost())
            << " km total=" << fm::format_number(km.total_cost()) << '\n';
  return 0;
}

int oracle_matching(int trials, int max_size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, max_size);
  std::uniform_int_distribution<int> value(0, 100);
  int mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd m(size(rng), size(rng));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = value(rng);
    double fast = fm::min_weight_matching(m).total_cost;
    double slow = fm::oracle::brute_force_matching(m);
    if (fast != slow) ++mismatches;
  }
  std::cout << "matching trials=" << trials << " mismatches=" << mismatches << '\n';
  return mismatches == 0 ? 0 : 1;
}

int oracle_route(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    auto net = fm::oracle::random_network(rng, 12, 10);
    fm::ShortestPaths sp(net);
    auto dist = fm::oracle::floyd_warshall(net, 0);
    std::uniform_int_distribution<fm::NodeId> node(0, 11);
    std::vector<fm::Order> orders;
    for (int i = 0; i < 3; ++i) {
      fm::NodeId r = node(rng), c = node(rng);
      if (r == c) c = (c + 1) % 12;
      orders.push_back({i, r, c, 0.0, 1, 0.0});
    }
    fm::NodeId start = node(rng);
    double fast = fm::quickest_route_plan(sp, start, {}, orders, 0.0).length;
    double slow = fm::oracle::enumerate_route_length(dist, start, {}, orders);
    if (fast != slow) ++mismatches;
  }
  std::cout << "route trials=" << trials << " mismatches=" << mismatches << '\n';
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Food delivery dispatch simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run one simulation and write metrics");
  simulate_cmd->add_option("--network", sim.network, "Road network file")->required();
  simulate_cmd->add_option("--orders", sim.orders, "Order stream file")->required();
  simulate_cmd->add_option("--vehicles", sim.vehicles, "Vehicle stream file")->required();
  simulate_cmd->add_option("--restaurants", sim.restaurants, "Restaurant prep-time model file");
  simulate_cmd->add_option("--policy", sim.policy, "foodmatch | greedy | km")
      ->check(CLI::IsMember({"foodmatch", "greedy", "km"}));
  simulate_cmd->add_option("--delta", sim.config.delta, "Accumulation window, seconds");
  simulate_cmd->add_option("--eta", sim.config.eta, "Batching threshold, seconds");
  simulate_cmd->add_option("--gamma", sim.config.gamma, "Angular weight in [0, 1]");
  simulate_cmd->add_option("--k-factor", sim.config.k_factor, "Sparsification factor");
  simulate_cmd->add_option("--seed", sim.config.rng_seed, "Seed for prep-time sampling");
  simulate_cmd->add_option("--omega", sim.config.omega, "Rejection penalty, seconds");
  simulate_cmd->add_option("--max-o", sim.config.max_o, "Orders per vehicle");
  simulate_cmd->add_option("--max-i", sim.config.max_i, "Items per vehicle");
  simulate_cmd->add_option("--reject-after", sim.config.reject_after, "Unassigned age limit, seconds");
  simulate_cmd->add_option("--service-cap", sim.config.service_cap, "First-mile cap, seconds");
  simulate_cmd->add_flag("!--no-reshuffle", sim.config.reshuffle, "Keep earlier FoodMatch assignments fixed");
  simulate_cmd->add_option("--max-clock", sim.config.max_clock, "Simulation horizon, seconds");
  simulate_cmd->add_option("--out", sim.out, "Metrics file ('-' for stdout)");
  simulate_cmd->add_option("--ledger", sim.ledger, "Per-order ledger file");
  simulate_cmd->add_option("--timings", sim.timings, "Per-window runtime file");

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic city and workload");
  gen_cmd->add_option("--nodes", gen_args.nodes, "Node count");
  auto* grid_flag = gen_cmd->add_flag("--grid", gen_args.grid, "Grid topology (default)");
  gen_cmd->add_flag("--random-geometric", gen_args.geometric, "Random geometric topology")
      ->excludes(grid_flag);
  gen_cmd->add_option("--orders-per-hour", gen_args.orders_per_hour, "Mean hourly order rate");
  gen_cmd->add_option("--vehicles", gen_args.vehicles, "Fleet size");
  gen_cmd->add_option("--seed", gen_args.seed, "Generator seed");
  gen_cmd->add_option("--restaurant-fraction", gen_args.restaurant_fraction, "Share of nodes hosting restaurants");
  gen_cmd->add_option("--out", gen_args.out, "Output directory");

  auto* oracle_cmd = app.add_subcommand("oracle", "Cross-check solvers against brute force");
  oracle_cmd->require_subcommand(1);
  oracle_cmd->add_subcommand("worked-example", "Print costs of the three-order example");
  int trials = 200, max_size = 7;
  std::uint64_t oracle_seed = 7;
  auto* matching_cmd = oracle_cmd->add_subcommand("matching", "Random matrices vs permutation search");
  matching_cmd->add_option("--trials", trials);
  matching_cmd->add_option("--max-size", max_size)->check(CLI::Range(1, 8));
  matching_cmd->add_option("--seed", oracle_seed);
  auto* route_cmd = oracle_cmd->add_subcommand("route", "Random route plans vs enumeration");
  route_cmd->add_option("--trials", trials);
  route_cmd->add_option("--seed", oracle_seed);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate_cmd) return simulate(sim);
    if (*gen_cmd) return gen(gen_args);
    if (oracle_cmd->got_subcommand("worked-example")) return oracle_worked_example();
    if (*matching_cmd) return oracle_matching(trials, max_size, oracle_seed);
    if (*route_cmd) return oracle_route(trials, oracle_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
