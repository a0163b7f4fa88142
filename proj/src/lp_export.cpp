#include "qrvrp/lp_export.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "qrvrp/error.hpp"

namespace qrvrp {

namespace {

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string x_name(int i, int j) { return "x_" + std::to_string(i) + "_" + std::to_string(j); }
std::string u_name(int i) { return "u_" + std::to_string(i); }
std::string u_name(int i, int g) { return "u_" + std::to_string(i) + "_" + std::to_string(g); }
std::string w_name(int i) { return "w_" + std::to_string(i); }

// Linear expression accumulator that wraps long rows.
class Expr {
 public:
  void add(double coef, const std::string& var) {
    if (coef == 0.0) return;
    if (terms_ > 0 && terms_ % kPerLine == 0) text_ += "\n   ";
    if (terms_ == 0) {
      if (coef < 0) text_ += "- ";
    } else {
      text_ += coef < 0 ? " - " : " + ";
    }
    const double a = std::abs(coef);
    if (a != 1.0) text_ += num(a) + " ";
    text_ += var;
    ++terms_;
  }
  const std::string& str() const { return text_; }

 private:
  static constexpr int kPerLine = 6;
  std::string text_;
  int terms_ = 0;
};

void emit(std::ostringstream& out, const std::string& name, const Expr& e, const char* sense, double rhs) {
  out << " " << name << ": " << e.str() << " " << sense << " " << num(rhs) << "\n";
}

}  // namespace

double lp_time_big_m(const RoutingProblem& problem) {
  return problem.due(0) + problem.service.maxCoeff() + problem.travel.maxCoeff();
}

std::string export_lp(const RoutingProblem& problem) {
  const int n = problem.customer_count();
  const int end = n + 1;
  const bool robust = problem.mode == PlanningMode::robust;
  const int gamma = robust ? problem.budget.gamma : 0;
  const double q = problem.capacity;
  const double big_t = lp_time_big_m(problem);
  auto travel = [&](int i, int j) { return problem.travel(i, j == end ? 0 : j); };

  // Arc set A in a fixed order.
  std::vector<std::pair<int, int>> arcs;
  for (int j = 1; j <= n; ++j) arcs.emplace_back(0, j);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j)
      if (i != j) arcs.emplace_back(i, j);
    arcs.emplace_back(i, end);
  }

  std::ostringstream out;
  out << "\\ " << (robust ? "robust" : "deterministic") << " CVRPTW '" << problem.name << "': " << n
      << " customers";
  if (robust) out << ", gamma " << gamma;
  out << "\n";

  out << "Minimize\n";
  {
    Expr obj;
    for (auto [i, j] : arcs) obj.add(travel(i, j), x_name(i, j));
    out << " obj: " << obj.str() << "\n";
  }

  out << "Subject To\n";
  for (int j = 1; j <= n; ++j) {
    Expr e;
    for (auto [a, b] : arcs)
      if (b == j) e.add(1.0, x_name(a, b));
    emit(out, "visit_" + std::to_string(j), e, "=", 1.0);
  }
  for (int i = 1; i <= n; ++i) {
    Expr e;
    for (auto [a, b] : arcs)
      if (a == i) e.add(1.0, x_name(a, b));
    for (auto [a, b] : arcs)
      if (b == i) e.add(-1.0, x_name(a, b));
    emit(out, "flow_" + std::to_string(i), e, "=", 0.0);
  }
  {
    Expr e;
    for (int j = 1; j <= n; ++j) e.add(1.0, x_name(0, j));
    for (int i = 1; i <= n; ++i) e.add(-1.0, x_name(i, end));
    emit(out, "fleet", e, "=", 0.0);
  }

  // Load propagation: u_j >= u_i + d_j x_ij - Q (1 - x_ij), u_0 = 0.
  for (auto [i, j] : arcs) {
    if (j == end) continue;
    const std::string suffix = std::to_string(i) + "_" + std::to_string(j);
    if (!robust) {
      Expr e;
      e.add(1.0, u_name(j));
      if (i != 0) e.add(-1.0, u_name(i));
      e.add(-(problem.demand(j) + q), x_name(i, j));
      emit(out, "load_" + suffix, e, ">=", -q);
      continue;
    }
    for (int g = 0; g <= gamma; ++g) {
      Expr e;
      e.add(1.0, u_name(j, g));
      if (i != 0) e.add(-1.0, u_name(i, g));
      e.add(-(problem.budget.base(j) + q), x_name(i, j));
      emit(out, "load_" + suffix + "_" + std::to_string(g), e, ">=", -q);
    }
    for (int g = 1; g <= gamma; ++g) {
      Expr e;
      e.add(1.0, u_name(j, g));
      if (i != 0) e.add(-1.0, u_name(i, g - 1));
      e.add(-(problem.budget.worst(j) + q), x_name(i, j));
      emit(out, "worst_" + suffix + "_" + std::to_string(g), e, ">=", -q);
    }
  }

  // Time propagation: w_j >= w_i + (s_i + t_ij) x_ij - T (1 - x_ij), w_0 = depot ready.
  for (auto [i, j] : arcs) {
    if (j == end) continue;
    Expr e;
    e.add(1.0, w_name(j));
    double rhs = -big_t;
    if (i != 0)
      e.add(-1.0, w_name(i));
    else
      rhs += problem.ready(0);
    e.add(-(problem.service(i) + travel(i, j) + big_t), x_name(i, j));
    emit(out, "time_" + std::to_string(i) + "_" + std::to_string(j), e, ">=", rhs);
  }

  out << "Bounds\n";
  for (int i = 1; i <= n; ++i) {
    if (!robust) {
      out << " " << num(problem.demand(i)) << " <= " << u_name(i) << " <= " << num(q) << "\n";
    } else {
      for (int g = 0; g <= gamma; ++g)
        out << " " << num(problem.budget.base(i)) << " <= " << u_name(i, g) << " <= " << num(q) << "\n";
    }
  }
  for (int i = 1; i <= n; ++i)
    out << " " << num(problem.ready(i)) << " <= " << w_name(i) << " <= " << num(problem.due(i)) << "\n";

  out << "Binaries\n";
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    out << " " << x_name(arcs[k].first, arcs[k].second);
    if (k % 8 == 7 || k + 1 == arcs.size()) out << "\n";
  }
  out << "End\n";
  return out.str();
}

Solution parse_external_solution(std::string_view text, const RoutingProblem& problem, double* objective) {
  const int n = problem.customer_count();
  const int end = n + 1;
  std::map<int, int> next;
  std::vector<int> starts;
  bool have_objective = false;

  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string name;
    double value = 0.0;
    if (!(ls >> name)) continue;
    if (!(ls >> value)) throw ParseError("expected '<name> <value>'", lineno);
    if (name == "objective") {
      have_objective = true;
      if (objective) *objective = value;
      continue;
    }
    if (name.rfind("x_", 0) != 0 || value <= 0.5) continue;
    int i = -1, j = -1;
    if (std::sscanf(name.c_str(), "x_%d_%d", &i, &j) != 2 || i < 0 || i > n || j < 1 || j > end || i == j)
      throw ParseError("bad arc variable '" + name + "'", lineno);
    if (i == 0) {
      starts.push_back(j);
    } else {
      if (next.count(i)) throw ParseError("customer " + std::to_string(i) + " has two successors", lineno);
      next[i] = j;
    }
  }
  if (!have_objective) throw ParseError("missing objective line", 0);

  Solution sol;
  std::vector<int> seen(static_cast<std::size_t>(end) + 1, 0);
  for (int s : starts) {
    Route r;
    for (int c = s; c != end;) {
      if (c == end || c < 1 || c > n) throw Error("external solution: route leaves the customer set");
      if (seen[c]++) throw Error("external solution: customer " + std::to_string(c) + " visited twice");
      r.push_back(c);
      auto it = next.find(c);
      if (it == next.end()) throw Error("external solution: customer " + std::to_string(c) + " has no successor");
      c = it->second;
    }
    sol.routes.push_back(std::move(r));
  }
  return sol;
}

}  // namespace qrvrp
