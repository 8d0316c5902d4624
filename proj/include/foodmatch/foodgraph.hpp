#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "foodmatch/batching.hpp"
#include "foodmatch/costmodel.hpp"

namespace foodmatch {

/// Bipartite graph between batches (rows) and vehicles (columns). Every cell
/// holds a weight in [0, Ω]; cells never evaluated default to Ω.
struct FoodGraph {
  std::vector<Batch> batches;
  std::vector<Vehicle> vehicles;
  Eigen::MatrixXd weights;  // |batches| x |vehicles|
  double omega = 7200.0;
  std::size_t real_edge_count = 0;       // cells written by a marginal-cost evaluation
  std::size_t marginal_cost_evaluations = 0;
  std::vector<std::size_t> degree;       // evaluated edges per vehicle
};

/// Complete graph: every (batch, vehicle) weight is min(mCost, Ω), or Ω when
/// the pair violates capacity.
FoodGraph build_full(ShortestPaths& sp, std::vector<Batch> batches, std::vector<Vehicle> vehicles,
                     double t, const DispatchParams& params);

/// Per vehicle, best-first search from its location ordered by accumulated
/// vehicle-sensitive weight; each popped node connects the vehicle to the
/// batches whose first pickup is that node, until the vehicle has degree k
/// or the search is exhausted. Everything else stays at Ω.
FoodGraph build_sparsified(ShortestPaths& sp, std::vector<Batch> batches,
                           std::vector<Vehicle> vehicles, std::size_t k, double t, double gamma,
                           const DispatchParams& params);

/// round(k_factor · |orders| / |vehicles|) clamped to [1, |batches|].
std::size_t sparsification_degree(double k_factor, std::size_t order_count,
                                  std::size_t vehicle_count, std::size_t batch_count);

}  // namespace foodmatch
