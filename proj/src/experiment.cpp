#include "qrvrp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "qrvrp/alns.hpp"
#include "qrvrp/lp_export.hpp"
#include "qrvrp/rng.hpp"
#include "qrvrp/routing.hpp"
#include "qrvrp/simulate.hpp"

namespace qrvrp {

// ---------------------------------------------------------------------------
// Model names

namespace {

constexpr std::string_view kDeterministicTargets[] = {"M", "50", "55", "60", "65", "70", "75", "80", "85", "90", "95"};
constexpr std::string_view kRobustBases[] = {"M", "50", "55"};
constexpr std::string_view kRobustWorst[] = {"90", "95"};
constexpr PredictorKind kPredictors[] = {PredictorKind::individual, PredictorKind::linear, PredictorKind::nonlinear};
constexpr std::string_view kGammaUtf8 = "\xCE\x93";

template <std::size_t N>
bool one_of(std::string_view tok, const std::string_view (&set)[N]) {
  return std::find(std::begin(set), std::end(set), tok) != std::end(set);
}

}  // namespace

ModelNameError::ModelNameError(const std::string& text, std::size_t position, const std::string& what)
    : Error("invalid model name '" + text + "' at position " + std::to_string(position) + ": " + what +
            " (grammar: " + kModelGrammar + ")"),
      position_(position) {}

std::string ModelName::str() const {
  std::string s = family == PlanningMode::deterministic ? "D-" : "R-";
  s += to_char(predictor);
  s += "-" + target.label();
  if (family == PlanningMode::robust) s += "-" + worst.label() + "-G" + std::to_string(gamma);
  return s;
}

std::vector<PredictionTarget> ModelName::targets() const {
  if (family == PlanningMode::deterministic) return {target};
  return {target, worst};
}

ModelName parse_model_name(std::string_view s) {
  std::size_t i = 0;
  auto fail = [&](std::size_t pos, const std::string& what) -> void {
    throw ModelNameError(std::string(s), pos, what);
  };
  auto expect_dash = [&] {
    if (i >= s.size() || s[i] != '-') fail(i, "expected '-'");
    ++i;
  };
  auto token = [&] {
    const std::size_t start = i;
    while (i < s.size() && s[i] != '-') ++i;
    return std::pair{start, s.substr(start, i - start)};
  };

  ModelName m;
  if (s.empty()) fail(0, "empty name");
  if (s[0] == 'D') {
    m.family = PlanningMode::deterministic;
  } else if (s[0] == 'R') {
    m.family = PlanningMode::robust;
  } else {
    fail(0, "expected family D or R");
  }
  ++i;
  expect_dash();
  if (i >= s.size() || (s[i] != 'I' && s[i] != 'L' && s[i] != 'N')) fail(i, "expected predictor I, L or N");
  m.predictor = predictor_from_char(s[i]);
  ++i;
  expect_dash();

  const bool det = m.family == PlanningMode::deterministic;
  auto [tpos, tok] = token();
  if (det ? !one_of(tok, kDeterministicTargets) : !one_of(tok, kRobustBases))
    fail(tpos, det ? "expected target M or 50..95 in steps of 5" : "expected base level M, 50 or 55");
  m.target = PredictionTarget::from_label(tok);
  if (det) {
    if (i != s.size()) fail(i, "unexpected trailing text");
    return m;
  }

  expect_dash();
  auto [wpos, wtok] = token();
  if (!one_of(wtok, kRobustWorst)) fail(wpos, "expected worst-case level 90 or 95");
  m.worst = PredictionTarget::from_label(wtok);
  expect_dash();
  if (s.substr(i, 1) == "G") {
    i += 1;
  } else if (s.substr(i, kGammaUtf8.size()) == kGammaUtf8) {
    i += kGammaUtf8.size();
  } else {
    fail(i, "expected budget prefix G or Γ");
  }
  if (i >= s.size() || (s[i] != '1' && s[i] != '2')) fail(i, "expected budget 1 or 2");
  m.gamma = s[i] - '0';
  ++i;
  if (i != s.size()) fail(i, "unexpected trailing text");
  return m;
}

std::vector<ModelName> all_model_names() {
  std::vector<ModelName> out;
  for (auto p : kPredictors)
    for (auto t : kDeterministicTargets)
      out.push_back({PlanningMode::deterministic, p, PredictionTarget::from_label(t), {}, 0});
  for (auto p : kPredictors)
    for (auto b : kRobustBases)
      for (auto w : kRobustWorst)
        for (int g = 1; g <= 2; ++g)
          out.push_back({PlanningMode::robust, p, PredictionTarget::from_label(b), PredictionTarget::from_label(w), g});
  return out;
}

bool model_available(const ModelName& model, HistorySetting setting, int observations) {
  if (model.predictor != PredictorKind::individual) return true;
  return setting == HistorySetting::all && observations > 1;
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string solver_name(SolverChoice s) { return s == SolverChoice::alns ? "alns" : "exact-export"; }

SolverChoice parse_solver(const std::string& s) {
  if (s == "alns") return SolverChoice::alns;
  if (s == "exact-export") return SolverChoice::exact_export;
  throw Error("unknown solver '" + s + "' (expected alns|exact-export)");
}

}  // namespace

void GridConfig::validate() const {
  if (replications < 1) throw Error("grid config: replications must be at least 1");
  if (customers < 1) throw Error("grid config: customers must be at least 1");
  if (scenarios < 1) throw Error("grid config: scenarios must be at least 1");
  if (threads < 1) throw Error("grid config: threads must be at least 1");
  if (iteration_budget <= 0 && !(time_limit > 0.0)) throw Error("grid config: time limit must be positive");
  for (int n : observations)
    if (n < 1) throw Error("grid config: observation counts must be at least 1");
  if (solver == SolverChoice::exact_export) {
    if (lp_dir.empty()) throw Error("grid config: exact-export needs lp_dir");
    if (customers > 25) throw Error("grid config: exact-export is limited to 25 customers");
  }
}

GridConfig GridConfig::from_json(const Json& j) {
  GridConfig c;
  c.instances = j.at("instances").get<std::vector<std::string>>();
  c.customers = j.value("customers", c.customers);
  if (j.contains("settings")) {
    c.settings.clear();
    for (const auto& s : j.at("settings")) c.settings.push_back(parse_history_setting(s.get<std::string>()));
  }
  c.observations = j.value("observations", c.observations);
  c.replications = j.value("replications", c.replications);
  const auto& models = j.at("models");
  if (models.is_string() && models.get<std::string>() == "all") {
    c.models = all_model_names();
  } else {
    for (const auto& m : models) c.models.push_back(parse_model_name(m.get<std::string>()));
  }
  c.solver = parse_solver(j.value("solver", std::string("alns")));
  c.time_limit = j.value("time_limit", c.time_limit);
  c.iteration_budget = j.value("iteration_budget", c.iteration_budget);
  c.scenarios = j.value("scenarios", c.scenarios);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.threads = j.value("threads", c.threads);
  c.lp_dir = j.value("lp_dir", c.lp_dir);
  c.report_timing = j.value("report_timing", c.report_timing);
  c.validate();
  return c;
}

Json GridConfig::to_json() const {
  Json settings_json = Json::array(), models_json = Json::array();
  for (auto s : settings) settings_json.push_back(to_string(s));
  for (const auto& m : models) models_json.push_back(m.str());
  return {{"instances", instances},   {"customers", customers},
          {"settings", settings_json}, {"observations", observations},
          {"replications", replications}, {"models", models_json},
          {"solver", solver_name(solver)}, {"time_limit", time_limit},
          {"iteration_budget", iteration_budget}, {"scenarios", scenarios},
          {"master_seed", master_seed}, {"threads", threads},
          {"lp_dir", lp_dir},          {"report_timing", report_timing}};
}

// ---------------------------------------------------------------------------
// Seeds

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

enum Purpose : std::uint64_t { kAugment = 1, kScenario, kHistory, kTraining, kSolver };

}  // namespace

CellSeeds cell_seeds(std::uint64_t master, const std::string& instance, int replication, HistorySetting setting,
                     int observations, const ModelName& model) {
  const auto tag = static_cast<std::uint64_t>(StreamTag::cell);
  const std::uint64_t h = fnv1a(instance);
  const auto rep = static_cast<std::uint64_t>(replication);
  const auto set = static_cast<std::uint64_t>(setting);
  const auto n = static_cast<std::uint64_t>(observations);
  CellSeeds s;
  s.augment = derive_key({master, tag, h, rep, kAugment});
  s.scenario = derive_key({master, tag, h, rep, kScenario});
  s.history = derive_key({master, tag, h, rep, kHistory, set, n});
  s.training = derive_key({master, tag, h, rep, kTraining, set, n, static_cast<std::uint64_t>(model.predictor)});
  s.solver = derive_key({master, tag, h, rep, kSolver, set, n, fnv1a(model.str())});
  return s;
}

// ---------------------------------------------------------------------------
// Cells

namespace {

// Augmented instance and scenarios shared by every cell of one (instance, replication).
struct InstanceData {
  AugmentedInstance full;
  AugmentedInstance routed;
  ScenarioMatrix scenarios;
  ReplayContext replay;
};

InstanceData prepare_instance(const SolomonInstance& instance, int replication, const GridConfig& config) {
  const CellSeeds seeds = cell_seeds(config.master_seed, instance.name, replication, HistorySetting::all, 0, {});
  InstanceData d;
  d.full = augment(instance, seeds.augment);
  d.routed = take_first(d.full, std::min(config.customers, d.full.customer_count()));
  d.scenarios = sample_scenarios(d.routed, config.scenarios, seeds.scenario);
  d.replay = ReplayContext::from_instance(d.routed);
  return d;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// Predictions for one (instance, replication, setting, n), cached per predictor and target.
class CellGroup {
 public:
  CellGroup(const InstanceData& data, HistorySetting setting, int observations, int replication,
            const GridConfig& config)
      : data_(data), setting_(setting), observations_(observations), replication_(replication), config_(config) {
    const CellSeeds seeds = cell_seeds(config.master_seed, data.full.base.name, replication, setting, observations, {});
    history_ = generate_history(data.full, setting, observations, seeds.history);
  }

  ResultRow run(const ModelName& model) {
    ResultRow row;
    row.instance = data_.full.base.name;
    row.setting = setting_;
    row.n_obs = observations_;
    row.replication = replication_;
    row.model = model.str();
    if (!model_available(model, setting_, observations_)) {
      row.status = "unavailable";
      return row;
    }
    try {
      solve_and_evaluate(model, row);
    } catch (const ModelUnavailable&) {
      row.status = "unavailable";
    } catch (const InfeasibleProblem&) {
      row.status = "infeasible";
    } catch (const std::exception& e) {
      row.status = "error: " + sanitize(e.what());
    }
    return row;
  }

 private:
  const Eigen::VectorXd& values(const ModelName& model, const PredictionTarget& target) {
    const std::string key = std::string(1, to_char(model.predictor)) + ":" + target.label();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Eigen::VectorXd v;
    if (model.predictor == PredictorKind::individual) {
      v = predict_individual(history_, data_.routed, target);
    } else {
      if (!dataset_) dataset_ = dataset_from_history(history_);
      if (dataset_->size() == 0) throw ModelUnavailable("empty demand history");
      TrainerConfig tc;
      tc.seed = cell_seeds(config_.master_seed, data_.full.base.name, replication_, setting_, observations_, model)
                    .training;
      v = predict_customers(train_model(model.predictor, *dataset_, target, tc), data_.routed);
    }
    return cache_.emplace(key, std::move(v)).first->second;
  }

  void solve_and_evaluate(const ModelName& model, ResultRow& row) {
    std::string provenance(1, to_char(model.predictor));
    for (const auto& t : model.targets()) provenance += ":" + t.label();
    const DemandPrediction prediction =
        model.family == PlanningMode::deterministic
            ? assemble_deterministic(values(model, model.target), provenance)
            : assemble_robust(values(model, model.target), values(model, model.worst), provenance);
    RoutingProblem problem = RoutingProblem::from_prediction(data_.routed, prediction, model.gamma);
    problem.name = data_.full.base.name;

    const CellSeeds seeds =
        cell_seeds(config_.master_seed, data_.full.base.name, replication_, setting_, observations_, model);
    Solution solution;
    if (config_.solver == SolverChoice::alns) {
      AlnsConfig ac;
      ac.time_limit = config_.time_limit;
      ac.max_iterations = config_.iteration_budget;
      ac.seed = seeds.solver;
      const AlnsRun run = run_alns(problem, ac);
      solution = run.best;
      if (config_.report_timing) row.solve_seconds = run.seconds;
    } else {
      namespace fs = std::filesystem;
      const std::string stem = row.instance + "_" + to_string(setting_) + "_" + std::to_string(observations_) + "_" +
                               std::to_string(replication_) + "_" + row.model;
      fs::create_directories(config_.lp_dir);
      const fs::path lp = fs::path(config_.lp_dir) / (stem + ".lp");
      std::ofstream(lp, std::ios::binary) << export_lp(problem);
      const fs::path sol = fs::path(config_.lp_dir) / (stem + ".sol");
      if (!fs::exists(sol)) {
        row.status = "exported";
        return;
      }
      std::ifstream in(sol);
      std::stringstream ss;
      ss << in.rdbuf();
      solution = parse_external_solution(ss.str(), problem);
      if (auto why = solution_violation(solution, problem)) throw Error("external solution: " + *why);
    }

    const EvaluationReport rep = evaluate(solution, data_.scenarios, data_.replay);
    row.initial_cost = rep.initial_cost;
    row.mean_total_cost = rep.mean_total_cost;
    row.std_total_cost = rep.std_total_cost;
    row.mean_tw_violation_frac = rep.mean_violation_fraction;
    row.status = "ok";
  }

  const InstanceData& data_;
  HistorySetting setting_;
  int observations_;
  int replication_;
  const GridConfig& config_;
  DemandHistory history_;
  std::optional<TrainingDataset> dataset_;
  std::map<std::string, Eigen::VectorXd> cache_;
};

}  // namespace

ResultRow run_cell(const SolomonInstance& instance, HistorySetting setting, int observations, int replication,
                   const ModelName& model, const GridConfig& config) {
  const InstanceData data = prepare_instance(instance, replication, config);
  CellGroup group(data, setting, observations, replication, config);
  return group.run(model);
}

std::vector<ResultRow> run_grid(const GridConfig& config, const std::function<void(const ResultRow&)>& progress) {
  config.validate();
  std::vector<SolomonInstance> instances;
  for (const auto& path : config.instances) instances.push_back(load_solomon(path));

  const std::size_t n_set = config.settings.size(), n_obs = config.observations.size();
  const auto n_rep = static_cast<std::size_t>(config.replications);
  const std::size_t n_mod = config.models.size();
  std::vector<ResultRow> rows(instances.size() * n_set * n_obs * n_rep * n_mod);
  if (rows.empty()) return rows;
  auto index = [&](std::size_t i, std::size_t s, std::size_t o, std::size_t r, std::size_t m) {
    return (((i * n_set + s) * n_obs + o) * n_rep + r) * n_mod + m;
  };

  std::mutex mu;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t r = 0; r < n_rep; ++r) {
      const InstanceData data = prepare_instance(instances[i], static_cast<int>(r), config);
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t g = next++; g < n_set * n_obs; g = next++) {
          const std::size_t s = g / n_obs, o = g % n_obs;
          CellGroup group(data, config.settings[s], config.observations[o], static_cast<int>(r), config);
          for (std::size_t m = 0; m < n_mod; ++m) {
            ResultRow row = group.run(config.models[m]);
            if (progress) {
              std::lock_guard lock(mu);
              progress(row);
            }
            rows[index(i, s, o, r, m)] = std::move(row);
          }
        }
      };
      const int workers = std::min<int>(config.threads, static_cast<int>(n_set * n_obs));
      std::vector<std::thread> pool;
      for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
    }
  }
  normalize_rows(rows);
  return rows;
}

void normalize_rows(std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, int>, double> base;
  for (const auto& r : rows) {
    if (r.status != "ok" || r.setting != HistorySetting::all || r.n_obs != 30 || !r.mean_total_cost) continue;
    auto [it, fresh] = base.emplace(std::pair{r.instance, r.replication}, *r.mean_total_cost);
    if (!fresh) it->second = std::min(it->second, *r.mean_total_cost);
  }
  for (auto& r : rows) {
    r.normalized_score.reset();
    auto it = base.find({r.instance, r.replication});
    if (it == base.end() || !r.mean_total_cost || !(it->second > 0.0)) continue;
    r.normalized_score = 100.0 * (*r.mean_total_cost - it->second) / it->second;
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_opt(const std::string& s, int lineno) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", lineno);
  return v;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void write_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.instance << ',' << to_string(r.setting) << ',' << r.n_obs << ',' << r.replication << ',' << r.model
        << ',' << opt(r.initial_cost) << ',' << opt(r.mean_total_cost) << ',' << opt(r.std_total_cost) << ','
        << opt(r.mean_tw_violation_frac) << ',' << opt(r.normalized_score) << ',' << opt(r.solve_seconds) << ','
        << r.status << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line)) throw ParseError("empty results file", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("unexpected CSV header", lineno);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != 12) throw ParseError("expected 12 fields, found " + std::to_string(f.size()), lineno);
    ResultRow r;
    r.instance = f[0];
    r.setting = parse_history_setting(f[1]);
    r.n_obs = std::stoi(f[2]);
    r.replication = std::stoi(f[3]);
    r.model = f[4];
    r.initial_cost = parse_opt(f[5], lineno);
    r.mean_total_cost = parse_opt(f[6], lineno);
    r.std_total_cost = parse_opt(f[7], lineno);
    r.mean_tw_violation_frac = parse_opt(f[8], lineno);
    r.normalized_score = parse_opt(f[9], lineno);
    r.solve_seconds = parse_opt(f[10], lineno);
    r.status = f[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summary

std::vector<SummaryEntry> summarize(std::span<const ResultRow> rows, int top_k) {
  if (rows.empty()) throw Error("summarize: no rows");

  using CellKey = std::tuple<std::string, HistorySetting, int, int, std::string>;
  std::map<CellKey, double> violation;
  for (const auto& r : rows)
    if (r.status == "ok" && r.mean_tw_violation_frac)
      violation[{r.instance, r.setting, r.n_obs, r.replication, r.model}] = *r.mean_tw_violation_frac;

  struct Acc {
    std::vector<double> score, increase;
  };
  std::map<std::tuple<HistorySetting, int, std::string>, Acc> acc;
  for (const auto& r : rows) {
    if (r.status != "ok" || !r.mean_total_cost) continue;
    Acc& a = acc[{r.setting, r.n_obs, r.model}];
    a.score.push_back(r.normalized_score ? *r.normalized_score : *r.mean_total_cost);
    if (!r.mean_tw_violation_frac) continue;
    ModelName m;
    try {
      m = parse_model_name(r.model);
    } catch (const ModelNameError&) {
      continue;
    }
    const std::string baseline = std::string("D-") + to_char(m.predictor) + "-95";
    auto it = violation.find({r.instance, r.setting, r.n_obs, r.replication, baseline});
    if (it == violation.end() || !(it->second > 0.0)) continue;
    a.increase.push_back(100.0 * (*r.mean_tw_violation_frac - it->second) / it->second);
  }

  std::map<std::pair<HistorySetting, int>, std::vector<SummaryEntry>> groups;
  for (const auto& [key, a] : acc) {
    const auto& [setting, n, model] = key;
    SummaryEntry e;
    e.setting = setting;
    e.n_obs = n;
    e.model = model;
    e.rows = static_cast<int>(a.score.size());
    e.mean_score = mean_of(a.score);
    e.std_score = std_of(a.score, e.mean_score);
    if (!a.increase.empty()) {
      e.mean_violation_increase = mean_of(a.increase);
      e.std_violation_increase = std_of(a.increase, *e.mean_violation_increase);
    }
    groups[{setting, n}].push_back(e);
  }

  std::vector<SummaryEntry> out;
  for (auto& [key, entries] : groups) {
    std::sort(entries.begin(), entries.end(), [](const SummaryEntry& a, const SummaryEntry& b) {
      return a.mean_score != b.mean_score ? a.mean_score < b.mean_score : a.model < b.model;
    });
    const std::size_t keep = top_k > 0 ? std::min<std::size_t>(entries.size(), top_k) : entries.size();
    for (std::size_t k = 0; k < keep; ++k) {
      entries[k].rank = static_cast<int>(k) + 1;
      out.push_back(entries[k]);
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryEntry> entries) {
  out << "setting,n_obs,rank,model,rows,mean_score,std_score,mean_violation_increase,std_violation_increase\n";
  for (const auto& e : entries) {
    out << to_string(e.setting) << ',' << e.n_obs << ',' << e.rank << ',' << e.model << ',' << e.rows << ','
        << num(e.mean_score) << ',' << num(e.std_score) << ',' << opt(e.mean_violation_increase) << ','
        << opt(e.std_violation_increase) << '\n';
  }
}

}  // namespace qrvrp
