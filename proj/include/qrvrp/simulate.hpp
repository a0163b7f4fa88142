#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "qrvrp/instance.hpp"
#include "qrvrp/routing.hpp"

namespace qrvrp {

/// Realized demands, one scenario per row; column c-1 holds customer c.
using ScenarioMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Customer c in scenario s is drawn from the stream keyed by (seed, s, c),
/// so every model evaluated with the same seed sees the same demands.
ScenarioMatrix sample_scenarios(const AugmentedInstance& aug, int count, std::uint64_t seed);

/// Everything the replay needs besides demand.
struct ReplayContext {
  TravelMatrix travel;
  double capacity = 0.0;
  Eigen::VectorXd ready;
  Eigen::VectorXd due;
  Eigen::VectorXd service;
  double depot_dwell = 0.0;

  int customer_count() const { return static_cast<int>(travel.rows()) - 1; }

  static ReplayContext from_instance(const AugmentedInstance& aug);
  static ReplayContext from_problem(const RoutingProblem& problem);
};

struct RouteReplay {
  std::vector<int> executed;  // route customers with 0 for each mid-route depot visit
  double recourse = 0.0;
  int detours = 0;
  std::vector<double> start;  // service start per planned position
  std::vector<int> violated;
  bool clamped = false;  // some realized demand exceeded capacity
};

/// Detour-to-depot recourse: before a customer whose demand would overflow
/// the vehicle, return to the depot and unload. Violations are service starts
/// after the due time; the customer is still served.
RouteReplay simulate_route(const Route& route, std::span<const double> scenario, const ReplayContext& context);

struct ScenarioRecord {
  double total_cost = 0.0;
  double recourse = 0.0;
  int detours = 0;
  double violation_fraction = 0.0;
  bool clamped = false;
};

struct EvaluationReport {
  int scenarios = 0;
  double initial_cost = 0.0;
  double mean_total_cost = 0.0;
  double std_total_cost = 0.0;  // sample standard deviation
  double mean_recourse = 0.0;
  double mean_detours = 0.0;
  double mean_violation_fraction = 0.0;
  int clamped_scenarios = 0;
  std::vector<ScenarioRecord> records;  // filled on request
};

EvaluationReport evaluate(const Solution& solution, const ScenarioMatrix& scenarios, const ReplayContext& context,
                          bool keep_records = false);

/// 100 * (cost - base) / base for each cost.
std::vector<double> normalize_costs(std::span<const double> costs, double base);

}  // namespace qrvrp
