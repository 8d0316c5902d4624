#pragma once

#include <span>

#include "foodmatch/costmodel.hpp"

namespace foodmatch {

/// Repeatedly assigns the (order, vehicle) pair of least marginal cost
/// (ties: lowest order id, then lowest vehicle id) until every remaining
/// pair costs Ω. A vehicle may take several orders up to MaxO/MaxI; after
/// each pick only that vehicle's column is recomputed.
AssignmentOutcome greedy_assign(ShortestPaths& sp, std::span<const Order> orders,
                                std::span<const Vehicle> vehicles, double t,
                                const DispatchParams& params = {});

/// Kuhn-Munkres over the complete singleton-order graph; orders left
/// unmatched or matched at Ω stay unassigned.
AssignmentOutcome vanilla_km_assign(ShortestPaths& sp, std::span<const Order> orders,
                                    std::span<const Vehicle> vehicles, double t,
                                    const DispatchParams& params = {});

}  // namespace foodmatch
