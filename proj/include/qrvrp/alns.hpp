#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qrvrp/rng.hpp"
#include "qrvrp/routing.hpp"

namespace qrvrp {

enum class DestroyOp { random_removal = 0, string_removal = 1 };
enum class RepairOp { greedy = 0, regret = 1 };
enum class Outcome { new_best = 0, better = 1, accepted = 2, rejected = 3 };

inline constexpr int kDestroyOps = 2;
inline constexpr int kRepairOps = 2;

std::string to_string(DestroyOp op);
std::string to_string(RepairOp op);
std::string to_string(Outcome outcome);

struct OperatorWeights {
  std::array<double, kDestroyOps> destroy{1.0, 1.0};
  std::array<double, kRepairOps> repair{1.0, 1.0};
  double decay = 0.8;
  std::array<double, 4> rewards{25.0, 5.0, 1.0, 0.0};  // indexed by Outcome
  double floor = 1e-3;
  bool additive = false;  // w <- decay*w + score instead of the convex combination
};

/// Roulette-wheel choice, independently per family.
std::pair<DestroyOp, RepairOp> select_operators(const OperatorWeights& weights, Stream& rng);

/// w <- decay*w + (1-decay)*score for both chosen operators, floored.
OperatorWeights update_weights(OperatorWeights weights, DestroyOp destroy, RepairOp repair, Outcome outcome);

/// Geometric cooling that reaches 1 after `cooling_steps` iterations and stays there.
struct AnnealingSchedule {
  double initial = 1.0;
  double alpha = 1.0;
  int cooling_steps = 5000;

  double temperature(long iteration) const;
};

/// temp0 = 0.5*cost / -ln(0.05), so a solution 50% worse than the initial one
/// is accepted with probability 0.05 at the start.
AnnealingSchedule init_temperature(double initial_cost, int cooling_steps = 5000);

/// Always true when candidate <= current, else true with probability
/// exp((current - candidate) / temperature). Draws from `rng` only in the second case.
bool accept(double current_cost, double candidate_cost, double temperature, Stream& rng);

struct PartialSolution {
  Solution solution;
  std::vector<int> removed;
};

struct StringRemovalConfig {
  int budget = 1;
  int max_length = 10;
};

/// Nearest-neighbor construction; a new route opens when no unassigned
/// customer can be appended feasibly. Throws InfeasibleProblem if some
/// customer is infeasible even on its own.
Solution greedy_initial(const RoutingProblem& problem);

/// Removes k customers drawn uniformly without replacement; empty routes are dropped.
PartialSolution random_removal(const Solution& solution, int k, Stream& rng);

/// Removes contiguous strings around a random seed customer, visiting routes
/// by the distance of their closest customer to the seed until the budget is met.
PartialSolution string_removal(const Solution& solution, const StringRemovalConfig& config,
                               const TravelMatrix& travel, Stream& rng);

/// Cheapest feasible insertion first; customers with no feasible position get a new route.
Solution greedy_repair(PartialSolution partial, const RoutingProblem& problem);

/// Orders customers once by decreasing regret-2 (a single feasible position
/// counts as infinite regret), then inserts each at its best feasible position.
Solution regret_repair(PartialSolution partial, const RoutingProblem& problem);

struct AlnsConfig {
  double time_limit = 60.0;  // seconds
  long max_iterations = 0;   // > 0 replaces the wall clock with an iteration budget
  double removal_fraction = 0.15;
  int string_max_length = 10;
  std::uint64_t seed = 0;
  OperatorWeights weights;
  bool check_partition = false;       // validate every candidate
  std::ostream* diagnostics = nullptr;  // per-iteration CSV
};

struct AlnsRun {
  Solution best;
  double best_cost = 0.0;
  double initial_cost = 0.0;
  long iterations = 0;
  double seconds = 0.0;
  std::array<long, kDestroyOps> destroy_uses{};
  std::array<long, kRepairOps> repair_uses{};
  std::array<double, kDestroyOps> destroy_scores{};
  std::array<double, kRepairOps> repair_scores{};
  std::array<long, 4> outcomes{};
  OperatorWeights final_weights;
};

AlnsRun run_alns(const RoutingProblem& problem, const AlnsConfig& config);

}  // namespace qrvrp
