#include "qrvrp/alns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "qrvrp/error.hpp"

namespace qrvrp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <std::size_t N>
int roulette(const std::array<double, N>& w, Stream& rng) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    if (u < w[k]) return static_cast<int>(k);
    u -= w[k];
  }
  return static_cast<int>(N) - 1;
}

void drop_empty(Solution& s) {
  std::erase_if(s.routes, [](const Route& r) { return r.empty(); });
}

struct Insertion {
  double cost = kInf;
  int route = -1;
  int pos = -1;

  bool feasible() const { return route >= 0; }
};

// Best and second-best feasible positions of every pending customer in every
// route. Only the column of a modified route is recomputed.
class InsertionTable {
 public:
  InsertionTable(const RoutingProblem& problem, Solution& solution, std::vector<int> pending)
      : problem_(problem), solution_(solution), pending_(std::move(pending)) {
    table_.resize(pending_.size());
    for (std::size_t k = 0; k < pending_.size(); ++k) {
      table_[k].resize(solution_.routes.size());
      for (std::size_t r = 0; r < solution_.routes.size(); ++r) table_[k][r] = evaluate(pending_[k], static_cast<int>(r));
    }
  }

  const std::vector<int>& pending() const { return pending_; }

  // Overall best and second-best positions of pending customer k.
  std::pair<Insertion, Insertion> top_two(std::size_t k) const {
    Insertion a, b;
    for (const auto& cell : table_[k]) {
      for (const auto& ins : cell) {
        if (!ins.feasible()) continue;
        if (ins.cost < a.cost) {
          b = a;
          a = ins;
        } else if (ins.cost < b.cost) {
          b = ins;
        }
      }
    }
    return {a, b};
  }

  void insert(std::size_t k, const Insertion& ins) {
    auto& route = solution_.routes[ins.route];
    route.insert(route.begin() + ins.pos, pending_[k]);
    erase(k);
    refresh(ins.route);
  }

  void open_route(std::size_t k) {
    solution_.routes.push_back({pending_[k]});
    erase(k);
    for (auto& row : table_) row.emplace_back();
    refresh(static_cast<int>(solution_.routes.size()) - 1);
  }

 private:
  using Cell = std::array<Insertion, 2>;

  Cell evaluate(int customer, int r) {
    Cell out;
    const Route& route = solution_.routes[r];
    scratch_ = route;
    scratch_.push_back(customer);
    // Capacity feasibility does not depend on the insertion position.
    if (!capacity_feasible(scratch_, problem_)) return out;
    const auto& c = problem_.travel;
    for (std::size_t p = 0; p <= route.size(); ++p) {
      const int prev = p == 0 ? 0 : route[p - 1];
      const int next = p == route.size() ? 0 : route[p];
      const double delta = c(prev, customer) + c(customer, next) - c(prev, next);
      if (delta >= out[1].cost) continue;
      scratch_.assign(route.begin(), route.begin() + static_cast<std::ptrdiff_t>(p));
      scratch_.push_back(customer);
      scratch_.insert(scratch_.end(), route.begin() + static_cast<std::ptrdiff_t>(p), route.end());
      if (!time_feasible(scratch_, problem_).feasible) continue;
      const Insertion ins{delta, r, static_cast<int>(p)};
      if (delta < out[0].cost) {
        out[1] = out[0];
        out[0] = ins;
      } else {
        out[1] = ins;
      }
    }
    return out;
  }

  void refresh(int r) {
    for (std::size_t k = 0; k < pending_.size(); ++k) table_[k][r] = evaluate(pending_[k], r);
  }

  void erase(std::size_t k) {
    pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(k));
    table_.erase(table_.begin() + static_cast<std::ptrdiff_t>(k));
  }

  const RoutingProblem& problem_;
  Solution& solution_;
  std::vector<int> pending_;
  std::vector<std::vector<Cell>> table_;
  Route scratch_;
};

void require_singleton(int customer, const RoutingProblem& problem) {
  if (!route_feasible(Route{customer}, problem))
    throw InfeasibleProblem("customer " + std::to_string(customer) + " is infeasible even as a singleton route");
}

}  // namespace

std::string to_string(DestroyOp op) {
  return op == DestroyOp::random_removal ? "random_removal" : "string_removal";
}

std::string to_string(RepairOp op) { return op == RepairOp::greedy ? "greedy_repair" : "regret_repair"; }

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::new_best: return "new_best";
    case Outcome::better: return "better";
    case Outcome::accepted: return "accepted";
    case Outcome::rejected: return "rejected";
  }
  return "?";
}

std::pair<DestroyOp, RepairOp> select_operators(const OperatorWeights& weights, Stream& rng) {
  const auto d = static_cast<DestroyOp>(roulette(weights.destroy, rng));
  const auto r = static_cast<RepairOp>(roulette(weights.repair, rng));
  return {d, r};
}

OperatorWeights update_weights(OperatorWeights w, DestroyOp destroy, RepairOp repair, Outcome outcome) {
  const double score = w.rewards[static_cast<int>(outcome)];
  auto step = [&](double& x) {
    x = w.decay * x + (w.additive ? score : (1.0 - w.decay) * score);
    x = std::max(x, w.floor);
  };
  step(w.destroy[static_cast<int>(destroy)]);
  step(w.repair[static_cast<int>(repair)]);
  return w;
}

double AnnealingSchedule::temperature(long iteration) const {
  if (iteration >= cooling_steps) return 1.0;
  return initial * std::pow(alpha, static_cast<double>(iteration));
}

AnnealingSchedule init_temperature(double initial_cost, int cooling_steps) {
  if (!(initial_cost > 0.0)) throw Error("init_temperature: initial cost must be positive");
  AnnealingSchedule s;
  s.initial = 0.5 * initial_cost / -std::log(0.05);
  s.alpha = std::pow(s.initial, -1.0 / cooling_steps);
  s.cooling_steps = cooling_steps;
  return s;
}

bool accept(double current_cost, double candidate_cost, double temperature, Stream& rng) {
  if (candidate_cost <= current_cost) return true;
  return rng.uniform() < std::exp((current_cost - candidate_cost) / temperature);
}

Solution greedy_initial(const RoutingProblem& problem) {
  const int n = problem.customer_count();
  for (int c = 1; c <= n; ++c) require_singleton(c, problem);

  std::vector<char> assigned(static_cast<std::size_t>(n) + 1, 0);
  int left = n;
  Solution s;
  Route route;
  while (left > 0) {
    const int at = route.empty() ? 0 : route.back();
    int pick = -1;
    double nearest = kInf;
    for (int c = 1; c <= n; ++c) {
      if (assigned[c] || problem.travel(at, c) >= nearest) continue;
      route.push_back(c);
      if (route_feasible(route, problem)) {
        pick = c;
        nearest = problem.travel(at, c);
      }
      route.pop_back();
    }
    if (pick < 0) {
      s.routes.push_back(std::move(route));
      route.clear();
      continue;
    }
    route.push_back(pick);
    assigned[pick] = 1;
    --left;
  }
  if (!route.empty()) s.routes.push_back(std::move(route));
  return s;
}

PartialSolution random_removal(const Solution& solution, int k, Stream& rng) {
  std::vector<int> all;
  for (const auto& r : solution.routes) all.insert(all.end(), r.begin(), r.end());
  if (k < 1 || k >= static_cast<int>(all.size()))
    throw Error("random_removal: k must lie in [1, customer count - 1]");
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.index(all.size() - i));
    std::swap(all[i], all[j]);
  }
  PartialSolution out;
  out.removed.assign(all.begin(), all.begin() + k);
  const int n_max = *std::max_element(all.begin(), all.end());
  std::vector<char> gone(static_cast<std::size_t>(n_max) + 1, 0);
  for (int c : out.removed) gone[c] = 1;
  out.solution = solution;
  for (auto& r : out.solution.routes) std::erase_if(r, [&](int c) { return gone[c] != 0; });
  drop_empty(out.solution);
  return out;
}

PartialSolution string_removal(const Solution& solution, const StringRemovalConfig& config,
                               const TravelMatrix& travel, Stream& rng) {
  PartialSolution out;
  out.solution = solution;
  const int total = solution.customer_count();
  if (total == 0) return out;

  // Seed customer, uniform over routed customers.
  auto pick = static_cast<int>(rng.index(static_cast<std::uint64_t>(total)));
  int seed = -1;
  for (const auto& r : solution.routes) {
    if (pick < static_cast<int>(r.size())) {
      seed = r[pick];
      break;
    }
    pick -= static_cast<int>(r.size());
  }

  // Routes ordered by the distance of their closest customer to the seed.
  struct Near {
    double dist;
    std::size_t route;
    std::size_t anchor;
  };
  std::vector<Near> order;
  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    const auto& route = solution.routes[r];
    Near best{kInf, r, 0};
    for (std::size_t p = 0; p < route.size(); ++p) {
      const double d = route[p] == seed ? -1.0 : travel(seed, route[p]);
      if (d < best.dist) best = {d, r, p};
    }
    order.push_back(best);
  }
  std::stable_sort(order.begin(), order.end(), [](const Near& a, const Near& b) { return a.dist < b.dist; });

  const int budget = std::max(1, config.budget);
  const int max_len = std::max(1, config.max_length);
  for (const auto& near : order) {
    if (static_cast<int>(out.removed.size()) >= budget) break;
    auto& route = out.solution.routes[near.route];
    const int size = static_cast<int>(route.size());
    const int len = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(std::min(max_len, size))));
    // Uniform among windows of length `len` that contain the anchor.
    const int lo = std::max(0, static_cast<int>(near.anchor) - len + 1);
    const int hi = std::min(static_cast<int>(near.anchor), size - len);
    const int start = lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(hi - lo + 1)));
    out.removed.insert(out.removed.end(), route.begin() + start, route.begin() + start + len);
    route.erase(route.begin() + start, route.begin() + start + len);
  }
  drop_empty(out.solution);
  return out;
}

Solution greedy_repair(PartialSolution partial, const RoutingProblem& problem) {
  Solution s = std::move(partial.solution);
  InsertionTable table(problem, s, std::move(partial.removed));
  while (!table.pending().empty()) {
    std::size_t pick = 0;
    Insertion best;
    bool stranded = false;
    for (std::size_t k = 0; k < table.pending().size(); ++k) {
      const Insertion ins = table.top_two(k).first;
      if (!ins.feasible()) {
        pick = k;
        stranded = true;
        break;
      }
      if (ins.cost < best.cost) {
        best = ins;
        pick = k;
      }
    }
    if (stranded) {
      require_singleton(table.pending()[pick], problem);
      table.open_route(pick);
    } else {
      table.insert(pick, best);
    }
  }
  return s;
}

Solution regret_repair(PartialSolution partial, const RoutingProblem& problem) {
  Solution s = std::move(partial.solution);
  std::vector<int> order;
  {
    InsertionTable table(problem, s, partial.removed);
    std::vector<double> regret(table.pending().size());
    for (std::size_t k = 0; k < regret.size(); ++k) {
      const auto [a, b] = table.top_two(k);
      regret[k] = b.feasible() ? b.cost - a.cost : kInf;
    }
    std::vector<std::size_t> idx(regret.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return regret[x] > regret[y]; });
    for (std::size_t k : idx) order.push_back(partial.removed[k]);
  }
  InsertionTable table(problem, s, std::move(order));
  while (!table.pending().empty()) {
    const Insertion ins = table.top_two(0).first;
    if (ins.feasible()) {
      table.insert(0, ins);
    } else {
      require_singleton(table.pending().front(), problem);
      table.open_route(0);
    }
  }
  return s;
}

AlnsRun run_alns(const RoutingProblem& problem, const AlnsConfig& config) {
  if (config.max_iterations <= 0 && !(config.time_limit > 0.0)) throw Error("run_alns: time limit must be positive");
  if (!(config.removal_fraction > 0.0 && config.removal_fraction <= 0.5))
    throw Error("run_alns: removal fraction must lie in (0, 0.5]");

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  AlnsRun run;
  const int n = problem.customer_count();
  Stream rng(config.seed, StreamTag::alns);
  Solution current = greedy_initial(problem);
  double current_cost = solution_cost(current, problem.travel);
  run.best = current;
  run.best_cost = run.initial_cost = current_cost;
  run.final_weights = config.weights;
  if (n < 2) {
    run.seconds = elapsed();
    return run;
  }

  const int k = std::clamp(static_cast<int>(std::ceil(config.removal_fraction * n)), 1, n - 1);
  const StringRemovalConfig strings{k, config.string_max_length};
  const AnnealingSchedule schedule = init_temperature(current_cost);
  OperatorWeights& weights = run.final_weights;

  if (config.diagnostics)
    *config.diagnostics << "iteration,temperature,current_cost,best_cost,destroy,repair,outcome\n";

  for (long it = 0;; ++it) {
    if (config.max_iterations > 0 ? it >= config.max_iterations : elapsed() >= config.time_limit) break;
    const double temp = schedule.temperature(it);
    const auto [d, r] = select_operators(weights, rng);
    PartialSolution partial = d == DestroyOp::random_removal ? random_removal(current, k, rng)
                                                             : string_removal(current, strings, problem.travel, rng);
    Solution candidate = r == RepairOp::greedy ? greedy_repair(std::move(partial), problem)
                                               : regret_repair(std::move(partial), problem);
    if (config.check_partition) {
      if (auto why = solution_violation(candidate, problem)) throw Error("run_alns: invalid candidate: " + *why);
    }
    const double cost = solution_cost(candidate, problem.travel);

    Outcome outcome = Outcome::rejected;
    if (cost < run.best_cost) {
      outcome = Outcome::new_best;
    } else if (cost < current_cost) {
      outcome = Outcome::better;
    } else if (accept(current_cost, cost, temp, rng)) {
      outcome = Outcome::accepted;
    }
    if (outcome != Outcome::rejected) {
      current = std::move(candidate);
      current_cost = cost;
    }
    if (outcome == Outcome::new_best) {
      run.best = current;
      run.best_cost = current_cost;
    }

    weights = update_weights(weights, d, r, outcome);
    const double score = weights.rewards[static_cast<int>(outcome)];
    ++run.destroy_uses[static_cast<int>(d)];
    ++run.repair_uses[static_cast<int>(r)];
    run.destroy_scores[static_cast<int>(d)] += score;
    run.repair_scores[static_cast<int>(r)] += score;
    ++run.outcomes[static_cast<int>(outcome)];
    run.iterations = it + 1;

    if (config.diagnostics)
      *config.diagnostics << it << ',' << temp << ',' << current_cost << ',' << run.best_cost << ','
                          << to_string(d) << ',' << to_string(r) << ',' << to_string(outcome) << '\n';
  }
  run.seconds = elapsed();
  return run;
}

}  // namespace qrvrp
