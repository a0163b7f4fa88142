#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "qrvrp/error.hpp"
#include "qrvrp/lp_export.hpp"

using namespace qrvrp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LpCounts {
  int constraints = 0;
  int binaries = 0;
  int bounded = 0;
  std::map<std::string, int> families;
};

LpCounts count(const std::string& lp) {
  LpCounts c;
  std::istringstream in(lp);
  std::string line, section;
  while (std::getline(in, line)) {
    if (line == "Subject To" || line == "Bounds" || line == "Binaries" || line == "End" || line == "Minimize") {
      section = line;
      continue;
    }
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (section == "Subject To" && !tok.empty() && tok.back() == ':') {
      ++c.constraints;
      tok.pop_back();
      ++c.families[tok.substr(0, tok.find('_'))];
    } else if (section == "Bounds" && !tok.empty()) {
      ++c.bounded;
    } else if (section == "Binaries") {
      for (std::istringstream bs(line); bs >> tok;) ++c.binaries;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("golden LP files for the three-customer toy") {
  const std::string det = export_lp(qrvrp::testing::toy_det_problem());
  CHECK(det == read_file(std::string(QRVRP_GOLDEN_DIR) + "/toy_det.lp"));
  const std::string rob = export_lp(qrvrp::testing::toy_robust_problem(1));
  CHECK(rob == read_file(std::string(QRVRP_GOLDEN_DIR) + "/toy_robust_g1.lp"));
}

TEST_CASE("variable and constraint counts follow the model size formulas") {
  for (int n : {3, 5, 8}) {
    const AugmentedInstance aug = augment(qrvrp::testing::random_instance(n, 40 + n), 1);
    Eigen::VectorXd d = Eigen::VectorXd::Constant(n + 1, 5.0);
    LpCounts det = count(export_lp(RoutingProblem::deterministic(aug, d)));
    CHECK(det.binaries == n * n + n);
    CHECK(det.constraints == 2 * n * n + 2 * n + 1);
    CHECK(det.families["visit"] == n);
    CHECK(det.families["flow"] == n);
    CHECK(det.families["fleet"] == 1);
    CHECK(det.families["load"] == n * n);
    CHECK(det.families["time"] == n * n);
    CHECK(det.bounded == 2 * n);

    for (int g : {0, 1, 2}) {
      UncertaintyBudget b{d, Eigen::VectorXd::Constant(n + 1, 2.0), g};
      LpCounts rob = count(export_lp(RoutingProblem::robust(aug, b)));
      CHECK(rob.binaries == n * n + n);
      CHECK(rob.families["load"] == (g + 1) * n * n);
      CHECK(rob.families["worst"] == g * n * n);
      CHECK(rob.families["time"] == n * n);
      CHECK(rob.constraints == 2 * n + 1 + (2 * g + 2) * n * n);
      CHECK(rob.bounded == (g + 1) * n + n);
    }
  }
}

TEST_CASE("big-M covers the horizon") {
  const RoutingProblem p = qrvrp::testing::toy_det_problem();
  CHECK(lp_time_big_m(p) == doctest::Approx(100.0 + 1.0 + 5.0));
}

TEST_CASE("external solution files are turned back into routes") {
  const RoutingProblem p = qrvrp::testing::toy_det_problem();
  double obj = 0.0;
  const Solution s = parse_external_solution(
      "objective 22\nx_0_1 1\nx_1_2 0.9999999\nx_2_4 1\nx_0_3 1\nx_3_4 1\nx_1_3 0\nu_1 4\n", p, &obj);
  CHECK(obj == 22.0);
  REQUIRE(s.routes.size() == 2);
  CHECK(s.routes[0] == Route{1, 2});
  CHECK(s.routes[1] == Route{3});

  CHECK_THROWS_AS(parse_external_solution("x_0_1 1\n", p), ParseError);
  CHECK_THROWS_AS(parse_external_solution("objective 1\nx_0_9 1\n", p), ParseError);
  CHECK_THROWS_AS(parse_external_solution("objective 1\nx_0_1 1\nx_1_2 1\n", p), Error);
  CHECK_THROWS_AS(parse_external_solution("objective 1\nx_0_1 1\nx_1_4 1\nx_1_2 1\n", p), ParseError);
}
