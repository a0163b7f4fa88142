#include "qrvrp/exact.hpp"

#include <algorithm>
#include <limits>

#include "qrvrp/error.hpp"

namespace qrvrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RouteTable {
  std::vector<double> cost;
  std::vector<Route> best;
};

// Depth-first over ordered routes; a prefix that is already infeasible cannot
// become feasible by appending customers, so it is pruned.
void extend(const RoutingProblem& problem, Route& route, unsigned mask, RouteTable& table) {
  const int n = problem.customer_count();
  for (int c = 1; c <= n; ++c) {
    const unsigned bit = 1u << (c - 1);
    if (mask & bit) continue;
    route.push_back(c);
    if (capacity_feasible(route, problem) && time_feasible(route, problem).feasible) {
      const unsigned next = mask | bit;
      const double cost = route_cost(route, problem.travel);
      if (cost < table.cost[next]) {
        table.cost[next] = cost;
        table.best[next] = route;
      }
      extend(problem, route, next, table);
    }
    route.pop_back();
  }
}

}  // namespace

Solution solve_exact_small(const RoutingProblem& problem) {
  const int n = problem.customer_count();
  if (n > kExactCustomerLimit)
    throw Error("solve_exact_small: " + std::to_string(n) + " customers exceeds the limit of " +
                std::to_string(kExactCustomerLimit));
  if (n == 0) return {};

  const unsigned full = (1u << n) - 1;
  RouteTable table{std::vector<double>(full + 1, kInf), std::vector<Route>(full + 1)};
  Route scratch;
  extend(problem, scratch, 0u, table);

  std::vector<double> best(full + 1, kInf);
  std::vector<unsigned> choice(full + 1, 0);
  best[0] = 0.0;
  for (unsigned mask = 1; mask <= full; ++mask) {
    const unsigned low = mask & (~mask + 1);
    const unsigned rest = mask ^ low;
    // Enumerate subsets of `rest`, each joined with the lowest customer.
    for (unsigned sub = rest;; sub = (sub - 1) & rest) {
      const unsigned part = sub | low;
      const double c = table.cost[part] + best[mask ^ part];
      if (c < best[mask]) {
        best[mask] = c;
        choice[mask] = part;
      }
      if (sub == 0) break;
    }
  }
  if (best[full] == kInf) throw InfeasibleProblem("solve_exact_small: no feasible solution exists");

  Solution sol;
  for (unsigned mask = full; mask != 0; mask ^= choice[mask]) sol.routes.push_back(table.best[choice[mask]]);
  std::sort(sol.routes.begin(), sol.routes.end());
  return sol;
}

}  // namespace qrvrp
