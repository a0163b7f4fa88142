#include "qrvrp/serialize.hpp"

#include <fstream>

#include "qrvrp/error.hpp"

namespace qrvrp {

namespace {

template <typename Derived>
Json vec(const Eigen::MatrixBase<Derived>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <int N>
Eigen::Matrix<double, N, 1> fixed(const Json& a, const char* what) {
  if (!a.is_array() || a.size() != N)
    throw Error(std::string("json: '") + what + "' must be an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = a[i].get<double>();
  return v;
}

Eigen::VectorXd dynamic(const Json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

Json to_json(const Normalization& n) {
  return {{"feature_mean", vec(n.feature_mean)},
          {"feature_scale", vec(n.feature_scale)},
          {"target_mean", n.target_mean},
          {"target_scale", n.target_scale}};
}

Normalization normalization_from_json(const Json& j) {
  Normalization n;
  n.feature_mean = fixed<kFeatureDim>(j.at("feature_mean"), "feature_mean");
  n.feature_scale = fixed<kFeatureDim>(j.at("feature_scale"), "feature_scale");
  n.target_mean = j.at("target_mean").get<double>();
  n.target_scale = j.at("target_scale").get<double>();
  return n;
}

Json to_json(const TrainingTrace& t) {
  return {{"initial_loss", t.initial_loss},
          {"best_loss", t.best_loss},
          {"iterations", t.iterations},
          {"best_iteration", t.best_iteration}};
}

TrainingTrace trace_from_json(const Json& j) {
  TrainingTrace t;
  t.initial_loss = j.at("initial_loss").get<double>();
  t.best_loss = j.at("best_loss").get<double>();
  t.iterations = j.at("iterations").get<int>();
  t.best_iteration = j.at("best_iteration").get<int>();
  return t;
}

}  // namespace

Json to_json(const AugmentedInstance& aug) {
  Json nodes = Json::array();
  for (const auto& n : aug.base.nodes)
    nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"demand", n.demand},
                     {"ready", n.ready}, {"due", n.due}, {"service", n.service}});
  Json features = Json::array(), mixture = Json::array();
  for (std::size_t i = 0; i < aug.features.size(); ++i) {
    features.push_back(vec(aug.features[i]));
    mixture.push_back(vec(aug.mixture[i]));
  }
  return {{"name", aug.base.name},
          {"listed_vehicle_count", aug.base.listed_vehicle_count},
          {"capacity", aug.base.capacity},
          {"seed", aug.seed},
          {"nodes", nodes},
          {"features", features},
          {"mixture_weights", mixture}};
}

AugmentedInstance augmented_from_json(const Json& j) {
  AugmentedInstance aug;
  aug.base.name = j.at("name").get<std::string>();
  aug.base.listed_vehicle_count = j.value("listed_vehicle_count", 0);
  aug.base.capacity = j.at("capacity").get<double>();
  aug.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& n : j.at("nodes")) {
    aug.base.nodes.push_back({n.at("id").get<int>(), n.at("x").get<double>(), n.at("y").get<double>(),
                              n.at("demand").get<double>(), n.at("ready").get<double>(), n.at("due").get<double>(),
                              n.at("service").get<double>()});
  }
  for (const auto& f : j.at("features")) aug.features.push_back(fixed<kFeatureDim>(f, "features"));
  for (const auto& m : j.at("mixture_weights")) aug.mixture.push_back(fixed<kMixtureComponents>(m, "mixture_weights"));
  if (aug.features.size() != aug.base.nodes.size() || aug.mixture.size() != aug.base.nodes.size())
    throw Error("json: features and mixture_weights must have one entry per node");
  for (std::size_t i = 0; i < aug.base.nodes.size(); ++i)
    if (aug.base.nodes[i].id != static_cast<int>(i)) throw Error("json: node ids must be 0..n in order");
  return aug;
}

Json to_json(const DemandHistory& h) {
  Json customers = Json::array();
  for (std::size_t i = 1; i < h.customers.size(); ++i)
    customers.push_back({{"id", i}, {"features", vec(h.customers[i].features)}, {"values", h.customers[i].values}});
  return {{"setting", to_string(h.setting)}, {"observations", h.observations}, {"customers", customers}};
}

DemandHistory history_from_json(const Json& j) {
  DemandHistory h;
  h.setting = parse_history_setting(j.at("setting").get<std::string>());
  h.observations = j.at("observations").get<int>();
  const auto& cs = j.at("customers");
  h.customers.resize(cs.size() + 1);
  for (const auto& c : cs) {
    const auto id = c.at("id").get<std::size_t>();
    if (id < 1 || id > cs.size()) throw Error("json: history customer id out of range");
    h.customers[id].features = fixed<kFeatureDim>(c.at("features"), "features");
    h.customers[id].values = c.at("values").get<std::vector<double>>();
  }
  return h;
}

Json to_json(const Model& model) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        Json j;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["type"] = "linear";
          j["target"] = m.target.label();
          j["intercept"] = m.intercept;
          j["coefficients"] = vec(m.coefficients);
        } else {
          j["type"] = "mlp";
          j["target"] = m.target.label();
          Json rows = Json::array();
          for (int r = 0; r < kHiddenUnits; ++r) rows.push_back(vec(m.hidden_weights.row(r)));
          j["hidden_weights"] = rows;
          j["hidden_bias"] = vec(m.hidden_bias);
          j["output_weights"] = vec(m.output_weights);
          j["output_bias"] = m.output_bias;
        }
        j["normalization"] = to_json(m.normalization);
        j["trace"] = to_json(m.trace);
        return j;
      },
      model);
}

Model model_from_json(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") {
    LinearModel m;
    m.target = PredictionTarget::from_label(j.at("target").get<std::string>());
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = fixed<kFeatureDim>(j.at("coefficients"), "coefficients");
    m.normalization = normalization_from_json(j.at("normalization"));
    m.trace = trace_from_json(j.at("trace"));
    return m;
  }
  if (type == "mlp") {
    MlpModel m;
    m.target = PredictionTarget::from_label(j.at("target").get<std::string>());
    const auto& rows = j.at("hidden_weights");
    if (!rows.is_array() || rows.size() != kHiddenUnits) throw Error("json: hidden_weights must have 10 rows");
    for (int r = 0; r < kHiddenUnits; ++r)
      m.hidden_weights.row(r) = fixed<kFeatureDim>(rows[r], "hidden_weights").transpose();
    m.hidden_bias = fixed<kHiddenUnits>(j.at("hidden_bias"), "hidden_bias");
    m.output_weights = fixed<kHiddenUnits>(j.at("output_weights"), "output_weights");
    m.output_bias = j.at("output_bias").get<double>();
    m.normalization = normalization_from_json(j.at("normalization"));
    m.trace = trace_from_json(j.at("trace"));
    return m;
  }
  throw Error("json: unknown model type '" + type + "'");
}

Json to_json(const DemandPrediction& p) {
  Json j{{"mode", to_string(p.mode)}, {"provenance", p.provenance}};
  if (p.mode == PlanningMode::deterministic) {
    j["value"] = vec(p.value);
  } else {
    j["base"] = vec(p.base);
    j["worst"] = vec(p.worst);
  }
  return j;
}

DemandPrediction prediction_from_json(const Json& j) {
  const PlanningMode mode = parse_planning_mode(j.at("mode").get<std::string>());
  const auto provenance = j.value("provenance", std::string());
  if (mode == PlanningMode::deterministic) return assemble_deterministic(dynamic(j.at("value")), provenance);
  return assemble_robust(dynamic(j.at("base")), dynamic(j.at("worst")), provenance);
}

Json to_json(const Solution& s, const RoutingProblem& problem) {
  Json j{{"instance", problem.name}, {"mode", to_string(problem.mode)}};
  if (problem.mode == PlanningMode::robust) j["gamma"] = problem.budget.gamma;
  j["cost"] = solution_cost(s, problem.travel);
  j["routes"] = s.routes;
  return j;
}

Solution solution_from_json(const Json& j) {
  Solution s;
  s.routes = j.at("routes").get<std::vector<Route>>();
  return s;
}

Json to_json(const EvaluationReport& r) {
  return {{"scenarios", r.scenarios},
          {"initial_cost", r.initial_cost},
          {"mean_total_cost", r.mean_total_cost},
          {"std_total_cost", r.std_total_cost},
          {"mean_recourse", r.mean_recourse},
          {"mean_detours", r.mean_detours},
          {"mean_tw_violation_frac", r.mean_violation_fraction},
          {"clamped_scenarios", r.clamped_scenarios}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << dump(j);
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace qrvrp
