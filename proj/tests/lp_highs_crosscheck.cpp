// Solves exported LPs with HiGHS and compares against the exhaustive solver.
// Exits 77 (skipped) when Python or highspy is unavailable.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <sys/wait.h>

#include "fixtures.hpp"
#include "qrvrp/error.hpp"
#include "qrvrp/exact.hpp"
#include "qrvrp/lp_export.hpp"

using namespace qrvrp;
namespace fs = std::filesystem;

namespace {

int run_highs(const fs::path& lp, const fs::path& sol) {
  const std::string cmd = std::string("\"") + QRVRP_PYTHON + "\" \"" + QRVRP_HIGHS_SCRIPT + "\" \"" + lp.string() +
                          "\" \"" + sol.string() + "\"";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return 77;
  return WEXITSTATUS(rc);
}

}  // namespace

int main() {
  if (std::string(QRVRP_PYTHON).empty()) {
    std::cout << "python interpreter not found; skipping\n";
    return 77;
  }
  const fs::path dir = fs::temp_directory_path() / "qrvrp_highs";
  fs::create_directories(dir);
  int failures = 0, cases = 0;
  for (int seed = 1; seed <= 8; ++seed) {
    const int n = 4 + seed % 3;
    SolomonInstance inst = qrvrp::testing::random_instance(n, 500 + seed, 120.0, 1000.0);
    // The LP leaves the return to the depot untimed, so keep the depot window slack.
    inst.nodes[0].due = 5000.0;
    const AugmentedInstance aug = augment(inst, seed);
    Eigen::VectorXd d(n + 1);
    for (int i = 0; i <= n; ++i) d(i) = aug.base.nodes[i].demand;
    for (int gamma = 0; gamma <= 2; ++gamma) {
      const RoutingProblem p = gamma == 0 ? RoutingProblem::deterministic(aug, d)
                                          : RoutingProblem::robust(aug, {d, d * 0.3, gamma});
      const fs::path lp = dir / ("case.lp");
      const fs::path sol = dir / ("case.sol");
      std::ofstream(lp) << export_lp(p);
      const int rc = run_highs(lp, sol);
      if (rc == 77) {
        std::cout << "highspy not installed; skipping\n";
        return 77;
      }
      ++cases;
      double exact = 0.0;
      try {
        exact = solution_cost(solve_exact_small(p), p.travel);
      } catch (const InfeasibleProblem&) {
        const bool ok = rc == 2;
        std::cout << (ok ? "ok  " : "FAIL") << " seed " << seed << " n " << n << " gamma " << gamma
                  << ": infeasible, HiGHS exit " << rc << "\n";
        failures += !ok;
        continue;
      }
      if (rc != 0) {
        std::cout << "FAIL seed " << seed << " gamma " << gamma << ": HiGHS exited with " << rc << "\n";
        ++failures;
        continue;
      }
      std::ifstream in(sol);
      std::stringstream text;
      text << in.rdbuf();
      double objective = 0.0;
      const Solution s = parse_external_solution(text.str(), p, &objective);
      const auto why = solution_violation(s, p);
      const double cost = solution_cost(s, p.travel);
      const bool ok = !why && std::abs(cost - exact) <= 1e-6 * exact && std::abs(objective - exact) <= 1e-6 * exact;
      std::cout << (ok ? "ok  " : "FAIL") << " seed " << seed << " n " << n << " gamma " << gamma << ": lp " << cost
                << " exact " << exact << (why ? " (" + *why + ")" : std::string()) << "\n";
      failures += !ok;
    }
  }
  fs::remove_all(dir);
  std::cout << cases - failures << "/" << cases << " LP solutions match the exhaustive optimum\n";
  return failures == 0 ? 0 : 1;
}
