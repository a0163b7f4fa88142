#include "qrvrp/routing.hpp"

#include <algorithm>

#include "qrvrp/error.hpp"

namespace qrvrp {

int Solution::customer_count() const {
  int n = 0;
  for (const auto& r : routes) n += static_cast<int>(r.size());
  return n;
}

UncertaintyBudget UncertaintyBudget::from_prediction(const DemandPrediction& prediction, int gamma) {
  if (prediction.mode != PlanningMode::robust) throw Error("uncertainty budget needs a robust prediction");
  if (gamma < 0) throw Error("budget of uncertainty must be non-negative");
  return {prediction.base, (prediction.worst - prediction.base).cwiseMax(0.0), gamma};
}

namespace {

RoutingProblem common_fields(const AugmentedInstance& aug) {
  RoutingProblem p;
  p.name = aug.base.name;
  p.travel = build_travel_matrix(aug.base);
  p.capacity = aug.capacity();
  const auto n = static_cast<Eigen::Index>(aug.base.nodes.size());
  p.ready.resize(n);
  p.due.resize(n);
  p.service.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.ready(i) = aug.base.nodes[i].ready;
    p.due(i) = aug.base.nodes[i].due;
    p.service(i) = aug.base.nodes[i].service;
  }
  return p;
}

void check_size(const Eigen::VectorXd& v, const RoutingProblem& p, const char* what) {
  if (v.size() != p.travel.rows())
    throw Error(std::string("routing problem: ") + what + " has " + std::to_string(v.size()) +
                " entries, expected " + std::to_string(p.travel.rows()));
}

}  // namespace

RoutingProblem RoutingProblem::deterministic(const AugmentedInstance& aug, Eigen::VectorXd demand) {
  RoutingProblem p = common_fields(aug);
  p.mode = PlanningMode::deterministic;
  check_size(demand, p, "demand vector");
  if ((demand.array() < 0.0).any()) throw Error("routing problem: negative planning demand");
  p.demand = std::move(demand);
  p.demand(0) = 0.0;
  return p;
}

RoutingProblem RoutingProblem::robust(const AugmentedInstance& aug, UncertaintyBudget budget) {
  RoutingProblem p = common_fields(aug);
  p.mode = PlanningMode::robust;
  check_size(budget.base, p, "base demand vector");
  check_size(budget.deviation, p, "deviation vector");
  if ((budget.deviation.array() < 0.0).any()) throw Error("routing problem: negative demand deviation");
  if (budget.gamma < 0 || budget.gamma > p.customer_count())
    throw Error("routing problem: budget of uncertainty must lie in [0, customer count]");
  p.budget = std::move(budget);
  p.budget.base(0) = p.budget.deviation(0) = 0.0;
  return p;
}

RoutingProblem RoutingProblem::from_prediction(const AugmentedInstance& aug, const DemandPrediction& prediction,
                                               int gamma) {
  if (prediction.mode == PlanningMode::deterministic) return deterministic(aug, prediction.value);
  return robust(aug, UncertaintyBudget::from_prediction(prediction, gamma));
}

double route_cost(const Route& route, const TravelMatrix& travel) {
  if (route.empty()) return 0.0;
  double c = travel(0, route.front());
  for (std::size_t k = 1; k < route.size(); ++k) c += travel(route[k - 1], route[k]);
  return c + travel(route.back(), 0);
}

double solution_cost(const Solution& solution, const TravelMatrix& travel) {
  double c = 0.0;
  for (const auto& r : solution.routes) c += route_cost(r, travel);
  return c;
}

TimeSchedule time_feasible(const Route& route, const RoutingProblem& problem) {
  TimeSchedule s;
  s.start.reserve(route.size());
  int prev = 0;
  double t = problem.ready(0);
  for (int c : route) {
    const double arrive = t + problem.service(prev) + problem.travel(prev, c);
    t = std::max(problem.ready(c), arrive);
    s.start.push_back(t);
    if (t > problem.due(c)) s.feasible = false;
    prev = c;
  }
  s.return_time = t + problem.service(prev) + problem.travel(prev, 0);
  if (s.return_time > problem.due(0)) s.feasible = false;
  return s;
}

bool det_capacity_feasible(const Route& route, const RoutingProblem& problem) {
  if (problem.mode != PlanningMode::deterministic)
    throw Error("det_capacity_feasible called on a robust problem");
  double load = 0.0;
  for (int c : route) load += problem.demand(c);
  return load <= problem.capacity;
}

RobustLoadTable robust_load_table(const Route& route, const UncertaintyBudget& budget) {
  if (budget.gamma < 0) throw Error("robust_load_table: negative budget");
  const auto rows = static_cast<Eigen::Index>(route.size()) + 1;
  const Eigen::Index cols = budget.gamma + 1;
  RobustLoadTable u = RobustLoadTable::Zero(rows, cols);
  for (Eigen::Index p = 1; p < rows; ++p) {
    const int c = route[p - 1];
    const double base = budget.base(c);
    const double worst = budget.worst(c);
    u(p, 0) = u(p - 1, 0) + base;
    for (Eigen::Index g = 1; g < cols; ++g) u(p, g) = std::max(u(p - 1, g) + base, u(p - 1, g - 1) + worst);
  }
  return u;
}

bool robust_feasible(const Route& route, const UncertaintyBudget& budget, double capacity) {
  return (robust_load_table(route, budget).array() <= capacity).all();
}

bool capacity_feasible(const Route& route, const RoutingProblem& problem) {
  if (problem.mode == PlanningMode::deterministic) return det_capacity_feasible(route, problem);
  return robust_feasible(route, problem.budget, problem.capacity);
}

bool route_feasible(const Route& route, const RoutingProblem& problem) {
  return capacity_feasible(route, problem) && time_feasible(route, problem).feasible;
}

std::optional<std::string> solution_violation(const Solution& solution, const RoutingProblem& problem) {
  const int n = problem.customer_count();
  std::vector<int> seen(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    const auto& route = solution.routes[r];
    if (route.empty()) return "route " + std::to_string(r) + " is empty";
    for (int c : route) {
      if (c < 1 || c > n) return "route " + std::to_string(r) + " visits unknown customer " + std::to_string(c);
      if (++seen[c] > 1) return "customer " + std::to_string(c) + " visited more than once";
    }
    if (!capacity_feasible(route, problem)) return "route " + std::to_string(r) + " exceeds capacity";
    if (!time_feasible(route, problem).feasible) return "route " + std::to_string(r) + " violates a time window";
  }
  for (int c = 1; c <= n; ++c)
    if (seen[c] == 0) return "customer " + std::to_string(c) + " is not visited";
  return std::nullopt;
}

bool solution_feasible(const Solution& solution, const RoutingProblem& problem) {
  return !solution_violation(solution, problem).has_value();
}

}  // namespace qrvrp
