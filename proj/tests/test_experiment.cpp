#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "qrvrp/experiment.hpp"

using namespace qrvrp;
using qrvrp::testing::data_path;

namespace {

std::size_t error_position(std::string_view s) {
  try {
    parse_model_name(s);
  } catch (const ModelNameError& e) {
    return e.position();
  }
  return std::string::npos;
}

GridConfig tiny_grid() {
  GridConfig c;
  c.instances = {data_path("tiny4.txt")};
  c.customers = 4;
  c.replications = 2;
  c.models = {parse_model_name("D-L-50"), parse_model_name("D-I-50"), parse_model_name("R-N-M-90-G1")};
  c.iteration_budget = 20;
  c.scenarios = 50;
  c.master_seed = 11;
  c.report_timing = false;
  return c;
}

std::string csv_of(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

ResultRow ok_row(const std::string& model, int rep, double cost, double violation) {
  ResultRow r;
  r.instance = "X";
  r.setting = HistorySetting::all;
  r.n_obs = 30;
  r.replication = rep;
  r.model = model;
  r.mean_total_cost = cost;
  r.mean_tw_violation_frac = violation;
  r.status = "ok";
  return r;
}

}  // namespace

TEST_CASE("model names parse and print canonically") {
  const ModelName d = parse_model_name("D-N-60");
  CHECK(d.family == PlanningMode::deterministic);
  CHECK(d.predictor == PredictorKind::nonlinear);
  CHECK(d.target == PredictionTarget::quantile(0.6));
  CHECK(d.str() == "D-N-60");

  const ModelName r = parse_model_name("R-L-M-95-Γ1");
  CHECK(r.family == PlanningMode::robust);
  CHECK(r.predictor == PredictorKind::linear);
  CHECK(r.target == PredictionTarget::mean());
  CHECK(r.worst == PredictionTarget::quantile(0.95));
  CHECK(r.gamma == 1);
  CHECK(r.str() == "R-L-M-95-G1");
  CHECK(parse_model_name("R-L-M-95-G1") == r);
  CHECK(r.targets().size() == 2);

  const std::vector<ModelName> all = all_model_names();
  CHECK(all.size() == 69);
  std::set<std::string> names;
  for (const auto& m : all) {
    CHECK(parse_model_name(m.str()) == m);
    names.insert(m.str());
  }
  CHECK(names.size() == 69);
}

TEST_CASE("model name rejection positions") {
  CHECK(error_position("D-I-42") == 4);
  CHECK(error_position("") == 0);
  CHECK(error_position("X-L-50") == 0);
  CHECK(error_position("D_L-50") == 1);
  CHECK(error_position("D-Q-50") == 2);
  CHECK(error_position("D-L-50-") == 6);
  CHECK(error_position("R-L-60-90-G1") == 4);
  CHECK(error_position("R-L-M-80-G1") == 6);
  CHECK(error_position("R-L-M-90-G3") == 10);
  CHECK(error_position("R-L-M-90-1") == 9);
  CHECK(error_position("R-L-M-90") == 8);
  CHECK(error_position("R-L-M-90-G1x") == 11);
  CHECK(error_position("D-L-M") == std::string::npos);
}

TEST_CASE("availability and grid cardinality") {
  const ModelName di = parse_model_name("D-I-50");
  CHECK(!model_available(di, HistorySetting::half, 10));
  CHECK(!model_available(di, HistorySetting::quar, 30));
  CHECK(!model_available(di, HistorySetting::all, 1));
  CHECK(model_available(di, HistorySetting::all, 10));
  CHECK(model_available(parse_model_name("D-L-50"), HistorySetting::quar, 1));

  long available = 0;
  for (const auto& m : all_model_names())
    for (auto s : {HistorySetting::all, HistorySetting::half, HistorySetting::quar})
      for (int n : {1, 10, 30}) available += model_available(m, s, n);
  CHECK(17 * 5 * available == 39100);
}

TEST_CASE("grid rows follow the configuration combinatorics") {
  GridConfig c;
  c.instances.assign(17, data_path("tiny4.txt"));
  c.customers = 4;
  c.models = {parse_model_name("D-I-M")};
  c.iteration_budget = 5;
  c.scenarios = 5;
  const std::vector<ResultRow> rows = run_grid(c);
  CHECK(rows.size() == 765);
  int unavailable = 0;
  for (const auto& r : rows) unavailable += r.status == "unavailable";
  // Every half/quar cell plus all with n=1.
  CHECK(unavailable == 17 * 5 * 7);

  c.models.clear();
  CHECK(run_grid(c).empty());
}

TEST_CASE("grid output is deterministic and ordered") {
  const GridConfig c = tiny_grid();
  const std::vector<ResultRow> a = run_grid(c);
  REQUIRE(a.size() == 3 * 3 * 2 * 3);
  GridConfig threaded = c;
  threaded.threads = 3;
  const std::string bytes = csv_of(a);
  CHECK(bytes == csv_of(run_grid(c)));
  CHECK(bytes == csv_of(run_grid(threaded)));

  CHECK(bytes.substr(0, bytes.find('\n')) == kCsvHeader);
  CHECK(a[0].setting == HistorySetting::all);
  CHECK(a[0].n_obs == 1);
  CHECK(a[0].replication == 0);
  CHECK(a[0].model == "D-L-50");
  CHECK(a[1].model == "D-I-50");
  CHECK(a[1].status == "unavailable");
  CHECK(a[3].replication == 1);
  CHECK(a.back().setting == HistorySetting::quar);

  bool any_zero = false;
  for (const auto& r : a) {
    if (r.status != "ok") continue;
    CHECK(r.mean_total_cost.has_value());
    CHECK(*r.mean_total_cost >= *r.initial_cost);
    CHECK(!r.solve_seconds.has_value());
    REQUIRE(r.normalized_score.has_value());
    CHECK(*r.normalized_score >= (r.setting == HistorySetting::all && r.n_obs == 30 ? 0.0 : -100.0));
    any_zero = any_zero || *r.normalized_score == 0.0;
  }
  CHECK(any_zero);

  std::istringstream in(bytes);
  CHECK(csv_of(read_csv(in)) == bytes);
}

TEST_CASE("run_cell agrees with the grid") {
  const GridConfig c = tiny_grid();
  const SolomonInstance inst = load_solomon(data_path("tiny4.txt"));
  const ResultRow cell = run_cell(inst, HistorySetting::half, 10, 1, parse_model_name("R-N-M-90-G1"), c);
  const ResultRow again = run_cell(inst, HistorySetting::half, 10, 1, parse_model_name("R-N-M-90-G1"), c);
  CHECK(csv_of({cell}) == csv_of({again}));
  CHECK(cell.status == "ok");
  for (const auto& r : run_grid(c)) {
    if (r.setting == HistorySetting::half && r.n_obs == 10 && r.replication == 1 && r.model == "R-N-M-90-G1") {
      CHECK(r.mean_total_cost == cell.mean_total_cost);
      CHECK(r.initial_cost == cell.initial_cost);
    }
  }
  CHECK(run_cell(inst, HistorySetting::half, 10, 0, parse_model_name("D-I-50"), c).status == "unavailable");
}

TEST_CASE("cell seeds are distinct across cells") {
  std::set<std::uint64_t> solver, training, history;
  std::set<std::uint64_t> scenario;
  const auto models = all_model_names();
  for (const std::string inst : {"C101", "C102"})
    for (int rep = 0; rep < 5; ++rep) {
      scenario.insert(cell_seeds(1, inst, rep, HistorySetting::all, 1, models[0]).scenario);
      for (auto s : {HistorySetting::all, HistorySetting::half, HistorySetting::quar})
        for (int n : {1, 10, 30}) {
          history.insert(cell_seeds(1, inst, rep, s, n, models[0]).history);
          for (const auto& m : models) {
            const CellSeeds k = cell_seeds(1, inst, rep, s, n, m);
            solver.insert(k.solver);
            training.insert(k.training);
            CHECK(k.scenario == cell_seeds(1, inst, rep, HistorySetting::all, 1, models[0]).scenario);
          }
        }
    }
  CHECK(scenario.size() == 10);
  CHECK(history.size() == 90);
  CHECK(training.size() == 270);
  CHECK(solver.size() == 90 * 69);
  CHECK(cell_seeds(2, "C101", 0, HistorySetting::all, 1, models[0]).solver !=
        cell_seeds(1, "C101", 0, HistorySetting::all, 1, models[0]).solver);
}

TEST_CASE("normalization base is the best all/n=30 row per instance and replication") {
  std::vector<ResultRow> rows{ok_row("D-L-50", 0, 110, 0.1), ok_row("D-L-95", 0, 100, 0.2),
                              ok_row("D-L-50", 1, 200, 0.1)};
  ResultRow other = ok_row("D-L-65", 0, 99, 0.3);
  other.setting = HistorySetting::half;
  rows.push_back(other);
  normalize_rows(rows);
  CHECK(*rows[0].normalized_score == doctest::Approx(10.0));
  CHECK(*rows[1].normalized_score == 0.0);
  CHECK(*rows[2].normalized_score == 0.0);
  CHECK(*rows[3].normalized_score == doctest::Approx(-1.0));
}

TEST_CASE("summary ranking and violation increase") {
  std::vector<ResultRow> rows;
  for (int rep = 0; rep < 2; ++rep) {
    rows.push_back(ok_row("D-L-95", rep, 120 + rep, 0.10));
    rows.push_back(ok_row("D-L-50", rep, 100 + rep, 0.15));
    rows.push_back(ok_row("R-L-M-90-G1", rep, 105 + rep, 0.05));
  }
  ResultRow bad = ok_row("D-L-65", 0, 50, 0.0);
  bad.status = "infeasible";
  rows.push_back(bad);
  normalize_rows(rows);

  const std::vector<SummaryEntry> s = summarize(rows);
  REQUIRE(s.size() == 3);
  CHECK(s[0].model == "D-L-50");
  CHECK(s[0].rank == 1);
  CHECK(s[0].mean_score == doctest::Approx(0.0));
  CHECK(s[0].rows == 2);
  CHECK(*s[0].mean_violation_increase == doctest::Approx(50.0));
  CHECK(s[1].model == "R-L-M-90-G1");
  CHECK(*s[1].mean_violation_increase == doctest::Approx(-50.0));
  CHECK(s[2].model == "D-L-95");
  CHECK(*s[2].mean_violation_increase == 0.0);
  CHECK(*s[2].std_violation_increase == 0.0);

  std::vector<ResultRow> shuffled(rows.rbegin(), rows.rend());
  std::ostringstream a, b;
  write_summary_csv(a, s);
  write_summary_csv(b, summarize(shuffled));
  CHECK(a.str() == b.str());
  CHECK(summarize(rows, 1).size() == 1);

  const std::vector<ResultRow> single{ok_row("D-N-60", 0, 10, 0.0)};
  CHECK(summarize(single)[0].rank == 1);
  CHECK(!summarize(single)[0].mean_violation_increase.has_value());
  CHECK_THROWS_AS(summarize(std::vector<ResultRow>{}), Error);
}

TEST_CASE("grid config JSON") {
  const GridConfig c = tiny_grid();
  const GridConfig back = GridConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  Json j = c.to_json();
  j["models"] = "all";
  CHECK(GridConfig::from_json(j).models.size() == 69);
  j["models"] = Json::array({"D-L-42"});
  CHECK_THROWS_AS(GridConfig::from_json(j), ModelNameError);
  j = c.to_json();
  j["replications"] = 0;
  CHECK_THROWS_AS(GridConfig::from_json(j), Error);
  j = c.to_json();
  j["solver"] = "exact-export";
  j["lp_dir"] = "";
  CHECK_THROWS_AS(GridConfig::from_json(j), Error);
}

TEST_CASE("exact-export writes LP files and ingests solutions") {
  namespace fs = std::filesystem;
  GridConfig c = tiny_grid();
  c.solver = SolverChoice::exact_export;
  c.lp_dir = (fs::temp_directory_path() / "qrvrp_lp_test").string();
  fs::remove_all(c.lp_dir);
  const SolomonInstance inst = load_solomon(data_path("tiny4.txt"));
  const ModelName m = parse_model_name("D-L-50");
  const ResultRow r = run_cell(inst, HistorySetting::all, 10, 0, m, c);
  CHECK(r.status == "exported");
  const fs::path lp = fs::path(c.lp_dir) / "TINY4_all_10_0_D-L-50.lp";
  CHECK(fs::exists(lp));

  std::ofstream(fs::path(c.lp_dir) / "TINY4_all_10_0_D-L-50.sol")
      << "objective 0\nx_0_1 1\nx_1_5 1\nx_0_2 1\nx_2_5 1\nx_0_3 1\nx_3_5 1\nx_0_4 1\nx_4_5 1\n";
  const ResultRow solved = run_cell(inst, HistorySetting::all, 10, 0, m, c);
  CHECK(solved.status == "ok");
  CHECK(*solved.initial_cost == doctest::Approx(2 * (10 + 3 * std::sqrt(200.0))));
  fs::remove_all(c.lp_dir);
}
