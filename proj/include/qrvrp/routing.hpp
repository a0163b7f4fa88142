#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "qrvrp/instance.hpp"
#include "qrvrp/predict.hpp"

namespace qrvrp {

/// Customer ids in visiting order; the depot is implicit at both ends.
using Route = std::vector<int>;

struct Solution {
  std::vector<Route> routes;

  int customer_count() const;
  bool operator==(const Solution&) const = default;
};

/// Budgeted uncertainty set: d_i = base_i + xi_i * deviation_i with xi in
/// [0,1] and sum(xi) <= gamma. Vectors are indexed by node id.
struct UncertaintyBudget {
  Eigen::VectorXd base;
  Eigen::VectorXd deviation;
  int gamma = 0;

  double worst(int customer) const { return base(customer) + deviation(customer); }
  static UncertaintyBudget from_prediction(const DemandPrediction& prediction, int gamma);
};

/// u(p, g): load after the p-th customer of a route when at most g customers
/// before (and including) it take their worst-case demand. Row 0 is the depot.
using RobustLoadTable = Eigen::MatrixXd;

struct RoutingProblem {
  std::string name;
  PlanningMode mode = PlanningMode::deterministic;
  TravelMatrix travel;
  double capacity = 0.0;
  Eigen::VectorXd ready;
  Eigen::VectorXd due;
  Eigen::VectorXd service;
  Eigen::VectorXd demand;     // deterministic planning demand
  UncertaintyBudget budget;   // robust planning data

  int customer_count() const { return static_cast<int>(travel.rows()) - 1; }

  static RoutingProblem deterministic(const AugmentedInstance& aug, Eigen::VectorXd demand);
  static RoutingProblem robust(const AugmentedInstance& aug, UncertaintyBudget budget);
  static RoutingProblem from_prediction(const AugmentedInstance& aug, const DemandPrediction& prediction,
                                        int gamma = 0);
};

double route_cost(const Route& route, const TravelMatrix& travel);
double solution_cost(const Solution& solution, const TravelMatrix& travel);

struct TimeSchedule {
  bool feasible = true;
  std::vector<double> start;  // service start per route position
  double return_time = 0.0;
};

/// Forward recursion start = max(ready, previous start + service + travel);
/// feasible iff every start <= due and the depot is reached by its due time.
TimeSchedule time_feasible(const Route& route, const RoutingProblem& problem);

/// Throws in robust mode.
bool det_capacity_feasible(const Route& route, const RoutingProblem& problem);

RobustLoadTable robust_load_table(const Route& route, const UncertaintyBudget& budget);
bool robust_feasible(const Route& route, const UncertaintyBudget& budget, double capacity);

/// Mode-appropriate capacity check.
bool capacity_feasible(const Route& route, const RoutingProblem& problem);
bool route_feasible(const Route& route, const RoutingProblem& problem);

/// Reason the solution is infeasible, or nullopt when it is feasible.
std::optional<std::string> solution_violation(const Solution& solution, const RoutingProblem& problem);
bool solution_feasible(const Solution& solution, const RoutingProblem& problem);

}  // namespace qrvrp
