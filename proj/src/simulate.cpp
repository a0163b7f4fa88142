#include "qrvrp/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "qrvrp/error.hpp"
#include "qrvrp/rng.hpp"

namespace qrvrp {

ScenarioMatrix sample_scenarios(const AugmentedInstance& aug, int count, std::uint64_t seed) {
  if (count < 1) throw Error("sample_scenarios: count must be at least 1");
  const int n = aug.customer_count();
  ScenarioMatrix m(count, n);
  for (int s = 0; s < count; ++s) {
    for (int c = 1; c <= n; ++c) {
      Stream rng(seed, StreamTag::scenario, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(c));
      m(s, c - 1) = sample_demand(aug, c, rng);
    }
  }
  return m;
}

ReplayContext ReplayContext::from_instance(const AugmentedInstance& aug) {
  RoutingProblem p = RoutingProblem::deterministic(aug, Eigen::VectorXd::Zero(aug.customer_count() + 1));
  return from_problem(p);
}

ReplayContext ReplayContext::from_problem(const RoutingProblem& problem) {
  ReplayContext ctx;
  ctx.travel = problem.travel;
  ctx.capacity = problem.capacity;
  ctx.ready = problem.ready;
  ctx.due = problem.due;
  ctx.service = problem.service;
  return ctx;
}

RouteReplay simulate_route(const Route& route, std::span<const double> scenario, const ReplayContext& context) {
  const auto& c = context.travel;
  const double q = context.capacity;
  RouteReplay out;
  out.start.reserve(route.size());
  double load = 0.0;
  double t = context.ready(0);
  int prev = 0;
  for (int j : route) {
    double d = scenario[static_cast<std::size_t>(j) - 1];
    if (d > q) {
      d = q;
      out.clamped = true;
    }
    double arrive = 0.0;
    if (prev != 0 && load + d > q) {
      out.recourse += c(prev, 0) + c(0, j) - c(prev, j);
      ++out.detours;
      out.executed.push_back(0);
      arrive = t + context.service(prev) + c(prev, 0) + context.depot_dwell + c(0, j);
      load = 0.0;
    } else {
      arrive = t + context.service(prev) + c(prev, j);
    }
    t = std::max(arrive, context.ready(j));
    out.start.push_back(t);
    if (t > context.due(j)) out.violated.push_back(j);
    out.executed.push_back(j);
    load += d;
    prev = j;
  }
  return out;
}

EvaluationReport evaluate(const Solution& solution, const ScenarioMatrix& scenarios, const ReplayContext& context,
                          bool keep_records) {
  const int n = context.customer_count();
  if (scenarios.cols() != n)
    throw Error("evaluate: scenario width " + std::to_string(scenarios.cols()) + " does not match " +
                std::to_string(n) + " customers");
  EvaluationReport rep;
  rep.scenarios = static_cast<int>(scenarios.rows());
  rep.initial_cost = solution_cost(solution, context.travel);
  const int served = std::max(1, solution.customer_count());

  // Total cost is the initial cost plus recourse, so its spread is the spread of recourse.
  Eigen::VectorXd recourse(rep.scenarios);
  double detour_sum = 0.0, violation_sum = 0.0;
  for (int s = 0; s < rep.scenarios; ++s) {
    const std::span<const double> row(scenarios.row(s).data(), static_cast<std::size_t>(n));
    ScenarioRecord rec;
    int violated = 0;
    for (const auto& route : solution.routes) {
      const RouteReplay r = simulate_route(route, row, context);
      rec.recourse += r.recourse;
      rec.detours += r.detours;
      rec.clamped = rec.clamped || r.clamped;
      violated += static_cast<int>(r.violated.size());
    }
    rec.total_cost = rep.initial_cost + rec.recourse;
    rec.violation_fraction = static_cast<double>(violated) / served;
    recourse(s) = rec.recourse;
    detour_sum += rec.detours;
    violation_sum += rec.violation_fraction;
    if (rec.clamped) ++rep.clamped_scenarios;
    if (keep_records) rep.records.push_back(rec);
  }
  if (rep.scenarios > 0) {
    rep.mean_recourse = recourse.mean();
    rep.mean_total_cost = rep.initial_cost + rep.mean_recourse;
    rep.mean_detours = detour_sum / rep.scenarios;
    rep.mean_violation_fraction = violation_sum / rep.scenarios;
  }
  if (rep.scenarios > 1)
    rep.std_total_cost = std::sqrt((recourse.array() - rep.mean_recourse).square().sum() / (rep.scenarios - 1));
  return rep;
}

std::vector<double> normalize_costs(std::span<const double> costs, double base) {
  if (!(base > 0.0)) throw Error("normalize_costs: base must be positive");
  std::vector<double> out;
  out.reserve(costs.size());
  for (double c : costs) out.push_back(100.0 * (c - base) / base);
  return out;
}

}  // namespace qrvrp
