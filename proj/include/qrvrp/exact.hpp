#pragma once

#include "qrvrp/routing.hpp"

namespace qrvrp {

inline constexpr int kExactCustomerLimit = 8;

/// Minimum-cost feasible solution by exhaustive enumeration: every feasible
/// ordered route over every customer subset, then the best partition of the
/// customer set into such routes. Routes are returned in lexicographic order.
/// Throws InfeasibleProblem when no partition is feasible.
Solution solve_exact_small(const RoutingProblem& problem);

}  // namespace qrvrp
