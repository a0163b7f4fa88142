#include "qrvrp/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qrvrp/error.hpp"

namespace qrvrp {

PredictionTarget PredictionTarget::quantile(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error("quantile level must lie in (0, 1)");
  return {TargetKind::quantile, beta};
}

std::string PredictionTarget::label() const {
  if (kind == TargetKind::mean) return "M";
  return std::to_string(static_cast<int>(std::lround(beta * 100.0)));
}

PredictionTarget PredictionTarget::from_label(std::string_view label) {
  if (label == "M") return mean();
  int pct = 0;
  for (char c : label) {
    if (c < '0' || c > '9') throw Error("bad target label '" + std::string(label) + "'");
    pct = pct * 10 + (c - '0');
  }
  if (label.empty() || pct <= 0 || pct >= 100) throw Error("bad target label '" + std::string(label) + "'");
  return quantile(pct / 100.0);
}

char to_char(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::individual: return 'I';
    case PredictorKind::linear: return 'L';
    case PredictorKind::nonlinear: return 'N';
  }
  return '?';
}

PredictorKind predictor_from_char(char c) {
  switch (c) {
    case 'I': return PredictorKind::individual;
    case 'L': return PredictorKind::linear;
    case 'N': return PredictorKind::nonlinear;
    default: throw Error(std::string("unknown predictor '") + c + "' (expected I, L or N)");
  }
}

double pinball_loss(double prediction, double actual, double beta) {
  const double e = actual - prediction;
  return std::max(beta * e, (beta - 1.0) * e);
}

double empirical_quantile(std::span<const double> values, double beta) {
  if (values.empty()) throw Error("empirical_quantile: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  // beta * n is often an integer in exact arithmetic but not in binary.
  auto k = static_cast<std::size_t>(std::ceil(beta * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

double empirical_mean(std::span<const double> values) {
  if (values.empty()) throw Error("empirical_mean: empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

TrainingDataset dataset_from_history(const DemandHistory& history) {
  TrainingDataset data;
  const auto n = static_cast<Eigen::Index>(history.record_count());
  data.features.resize(n, kFeatureDim);
  data.demand.resize(n);
  Eigen::Index row = 0;
  for (const auto& c : history.customers) {
    for (double v : c.values) {
      data.features.row(row) = c.features.transpose();
      data.demand(row) = v;
      ++row;
    }
  }
  return data;
}

Normalization Normalization::fit(const TrainingDataset& data) {
  Normalization norm;
  const auto n = static_cast<double>(data.size());
  if (data.size() == 0) return norm;
  norm.feature_mean = data.features.colwise().mean().transpose();
  for (int k = 0; k < kFeatureDim; ++k) {
    const double var = (data.features.col(k).array() - norm.feature_mean(k)).square().sum() / n;
    const double sd = std::sqrt(var);
    norm.feature_scale(k) = sd > 1e-12 ? sd : 1.0;
  }
  norm.target_mean = data.demand.mean();
  const double tvar = (data.demand.array() - norm.target_mean).square().sum() / n;
  norm.target_scale = std::sqrt(tvar) > 1e-12 ? std::sqrt(tvar) : 1.0;
  return norm;
}

FeatureMatrix Normalization::apply(const FeatureMatrix& x) const {
  return ((x.rowwise() - feature_mean.transpose()).array().rowwise() / feature_scale.transpose().array()).matrix();
}

FeatureVector Normalization::apply(const FeatureVector& f) const {
  return ((f - feature_mean).array() / feature_scale.array()).matrix();
}

namespace {

// Loss value and d(loss)/d(output) for each row.
double pointwise_loss(const Eigen::VectorXd& out, const Eigen::VectorXd& y, const PredictionTarget& target,
                      Eigen::VectorXd* dout) {
  const auto n = out.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  if (dout) dout->resize(n);
  if (target.kind == TargetKind::mean) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = out(i) - y(i);
      total += e * e;
      if (dout) (*dout)(i) = 2.0 * e * inv_n;
    }
  } else {
    const double b = target.beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = y(i) - out(i);
      total += std::max(b * e, (b - 1.0) * e);
      if (dout) (*dout)(i) = (e >= 0.0 ? -b : 1.0 - b) * inv_n;
    }
  }
  return total * inv_n;
}

// Converts a loss on the standardized target back to demand units.
double to_demand_units(double loss, const Normalization& norm, const PredictionTarget& target) {
  return target.kind == TargetKind::mean ? loss * norm.target_scale * norm.target_scale : loss * norm.target_scale;
}

struct AdamResult {
  Eigen::VectorXd params;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int iterations = 0;
  int best_iteration = 0;
};

template <class Objective>
AdamResult adam_minimize(Eigen::VectorXd params, Objective&& objective, const TrainerConfig& config) {
  Eigen::VectorXd grad(params.size());
  Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());

  double loss = objective(params, &grad);
  if (!std::isfinite(loss)) throw Error("training: non-finite initial loss");

  AdamResult res;
  res.params = params;
  res.initial_loss = res.best_loss = loss;
  int since_best = 0;
  double b1t = 1.0, b2t = 1.0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    b1t *= config.beta1;
    b2t *= config.beta2;
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
    const Eigen::VectorXd m_hat = m / (1.0 - b1t);
    const Eigen::VectorXd v_hat = v / (1.0 - b2t);
    params.array() -= config.step_size * m_hat.array() / (v_hat.array().sqrt() + config.epsilon);

    loss = objective(params, &grad);
    res.iterations = it;
    if (!std::isfinite(loss)) throw Error("training: non-finite loss at iteration " + std::to_string(it));
    if (loss < res.best_loss) {
      res.best_loss = loss;
      res.params = params;
      res.best_iteration = it;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return res;
}

void require_trainable(const TrainingDataset& data) {
  if (data.size() == 0) throw ModelUnavailable("training: empty dataset");
}

}  // namespace

double linear_objective(const Eigen::VectorXd& params, const FeatureMatrix& x, const Eigen::VectorXd& y,
                        const PredictionTarget& target, Eigen::VectorXd* grad) {
  const FeatureVector coef = params.tail<kFeatureDim>();
  const Eigen::VectorXd out = (x * coef).array() + params(0);
  Eigen::VectorXd dout;
  const double loss = pointwise_loss(out, y, target, grad ? &dout : nullptr);
  if (grad) {
    grad->resize(1 + kFeatureDim);
    (*grad)(0) = dout.sum();
    grad->tail<kFeatureDim>() = x.transpose() * dout;
  }
  return loss;
}

Eigen::VectorXd MlpModel::pack() const {
  Eigen::VectorXd p(parameter_count);
  Eigen::Index o = 0;
  p.segment(o, kHiddenUnits * kFeatureDim) = hidden_weights.reshaped();
  o += kHiddenUnits * kFeatureDim;
  p.segment(o, kHiddenUnits) = hidden_bias;
  o += kHiddenUnits;
  p.segment(o, kHiddenUnits) = output_weights;
  o += kHiddenUnits;
  p(o) = output_bias;
  return p;
}

void MlpModel::unpack(const Eigen::VectorXd& p) {
  if (p.size() != parameter_count) throw Error("MlpModel::unpack: wrong parameter count");
  Eigen::Index o = 0;
  hidden_weights = p.segment(o, kHiddenUnits * kFeatureDim).reshaped(kHiddenUnits, kFeatureDim);
  o += kHiddenUnits * kFeatureDim;
  hidden_bias = p.segment(o, kHiddenUnits);
  o += kHiddenUnits;
  output_weights = p.segment(o, kHiddenUnits);
  o += kHiddenUnits;
  output_bias = p(o);
}

double mlp_objective(const Eigen::VectorXd& params, const FeatureMatrix& x, const Eigen::VectorXd& y,
                     const PredictionTarget& target, Eigen::VectorXd* grad) {
  MlpModel net;
  net.unpack(params);
  const Eigen::MatrixXd pre = (x * net.hidden_weights.transpose()).rowwise() + net.hidden_bias.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Eigen::VectorXd out = (hidden * net.output_weights).array() + net.output_bias;

  Eigen::VectorXd dout;
  const double loss = pointwise_loss(out, y, target, grad ? &dout : nullptr);
  if (!grad) return loss;

  MlpModel g;
  g.output_weights = hidden.transpose() * dout;
  g.output_bias = dout.sum();
  const Eigen::MatrixXd dhidden =
      ((dout * net.output_weights.transpose()).array() * (pre.array() > 0.0).cast<double>()).matrix();
  g.hidden_weights = dhidden.transpose() * x;
  g.hidden_bias = dhidden.colwise().sum().transpose();
  *grad = g.pack();
  return loss;
}

LinearModel train_linear(const TrainingDataset& data, const PredictionTarget& target, const TrainerConfig& config) {
  require_trainable(data);
  LinearModel model;
  model.target = target;
  model.normalization = Normalization::fit(data);
  const FeatureMatrix xz = model.normalization.apply(data.features);
  const Eigen::VectorXd yz =
      (data.demand.array() - model.normalization.target_mean) / model.normalization.target_scale;

  auto objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) { return linear_objective(p, xz, yz, target, g); };
  const AdamResult res = adam_minimize(Eigen::VectorXd::Zero(1 + kFeatureDim), objective, config);

  model.intercept = res.params(0);
  model.coefficients = res.params.tail<kFeatureDim>();
  model.trace = {to_demand_units(res.initial_loss, model.normalization, target),
                 to_demand_units(res.best_loss, model.normalization, target), res.iterations, res.best_iteration};
  return model;
}

MlpModel train_mlp(const TrainingDataset& data, const PredictionTarget& target, const TrainerConfig& config) {
  require_trainable(data);
  MlpModel model;
  model.target = target;
  model.normalization = Normalization::fit(data);
  const FeatureMatrix xz = model.normalization.apply(data.features);
  const Eigen::VectorXd yz =
      (data.demand.array() - model.normalization.target_mean) / model.normalization.target_scale;

  // Glorot-uniform weights, zero biases.
  Stream rng(config.seed, StreamTag::mlp_init);
  const double a1 = std::sqrt(6.0 / (kFeatureDim + kHiddenUnits));
  const double a2 = std::sqrt(6.0 / (kHiddenUnits + 1));
  for (int j = 0; j < kFeatureDim; ++j)
    for (int i = 0; i < kHiddenUnits; ++i) model.hidden_weights(i, j) = rng.uniform(-a1, a1);
  for (int i = 0; i < kHiddenUnits; ++i) model.output_weights(i) = rng.uniform(-a2, a2);

  auto objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) { return mlp_objective(p, xz, yz, target, g); };
  const AdamResult res = adam_minimize(model.pack(), objective, config);

  model.unpack(res.params);
  model.trace = {to_demand_units(res.initial_loss, model.normalization, target),
                 to_demand_units(res.best_loss, model.normalization, target), res.iterations, res.best_iteration};
  return model;
}

Model train_model(PredictorKind kind, const TrainingDataset& data, const PredictionTarget& target,
                  const TrainerConfig& config) {
  switch (kind) {
    case PredictorKind::linear: return train_linear(data, target, config);
    case PredictorKind::nonlinear: return train_mlp(data, target, config);
    case PredictorKind::individual: break;
  }
  throw Error("train_model: individual predictors have no trainable model");
}

double evaluate_raw(const LinearModel& model, const FeatureVector& features) {
  const FeatureVector z = model.normalization.apply(features);
  const double out = model.intercept + model.coefficients.dot(z);
  return model.normalization.target_mean + model.normalization.target_scale * out;
}

double evaluate_raw(const MlpModel& model, const FeatureVector& features) {
  const FeatureVector z = model.normalization.apply(features);
  const Eigen::Matrix<double, kHiddenUnits, 1> h = (model.hidden_weights * z + model.hidden_bias).cwiseMax(0.0);
  const double out = model.output_weights.dot(h) + model.output_bias;
  return model.normalization.target_mean + model.normalization.target_scale * out;
}

double predict_value(const LinearModel& model, const FeatureVector& features) {
  return std::max(0.0, evaluate_raw(model, features));
}

double predict_value(const MlpModel& model, const FeatureVector& features) {
  return std::max(0.0, evaluate_raw(model, features));
}

double predict_value(const Model& model, const FeatureVector& features) {
  return std::visit([&](const auto& m) { return predict_value(m, features); }, model);
}

double training_loss(const Model& model, const TrainingDataset& data) {
  return std::visit(
      [&](const auto& m) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < data.size(); ++i) {
          const double out = evaluate_raw(m, data.features.row(i).transpose());
          const double e = out - data.demand(i);
          total += m.target.kind == TargetKind::mean ? e * e : pinball_loss(out, data.demand(i), m.target.beta);
        }
        return data.size() > 0 ? total / static_cast<double>(data.size()) : 0.0;
      },
      model);
}

std::string to_string(PlanningMode mode) { return mode == PlanningMode::deterministic ? "det" : "robust"; }

PlanningMode parse_planning_mode(std::string_view text) {
  if (text == "det" || text == "deterministic") return PlanningMode::deterministic;
  if (text == "robust") return PlanningMode::robust;
  throw Error("unknown mode '" + std::string(text) + "' (expected det|robust)");
}

int DemandPrediction::customer_count() const {
  const auto& v = mode == PlanningMode::deterministic ? value : base;
  return v.size() > 0 ? static_cast<int>(v.size()) - 1 : 0;
}

Eigen::VectorXd predict_individual(const DemandHistory& history, const AugmentedInstance& aug,
                                   const PredictionTarget& target) {
  const int n = aug.customer_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n + 1);
  for (int i = 1; i <= n; ++i) {
    if (i >= static_cast<int>(history.customers.size()) || history.customers[i].values.empty())
      throw ModelUnavailable("model unavailable: customer " + std::to_string(i) + " has no demand history");
    const auto& values = history.customers[i].values;
    const double v = target.kind == TargetKind::mean ? empirical_mean(values) : empirical_quantile(values, target.beta);
    out(i) = std::max(0.0, v);
  }
  return out;
}

Eigen::VectorXd predict_customers(const Model& model, const AugmentedInstance& aug) {
  const int n = aug.customer_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n + 1);
  for (int i = 1; i <= n; ++i) out(i) = predict_value(model, aug.features[i]);
  return out;
}

DemandPrediction assemble_deterministic(Eigen::VectorXd value, std::string provenance) {
  DemandPrediction p;
  p.mode = PlanningMode::deterministic;
  p.value = value.cwiseMax(0.0);
  if (p.value.size() > 0) p.value(0) = 0.0;
  p.provenance = std::move(provenance);
  return p;
}

DemandPrediction assemble_robust(Eigen::VectorXd base, Eigen::VectorXd worst, std::string provenance) {
  if (base.size() != worst.size()) throw Error("assemble_robust: base and worst-case sizes differ");
  DemandPrediction p;
  p.mode = PlanningMode::robust;
  p.base = base.cwiseMax(0.0);
  p.worst = worst.cwiseMax(p.base);
  if (p.base.size() > 0) p.base(0) = p.worst(0) = 0.0;
  p.provenance = std::move(provenance);
  return p;
}

DemandPrediction build_predictions(PredictorKind kind, const AugmentedInstance& aug, const DemandHistory& history,
                                   std::span<const PredictionTarget> targets, const TrainerConfig& config) {
  if (targets.size() != 1 && targets.size() != 2)
    throw Error("build_predictions: expected one (deterministic) or two (robust) targets");

  std::vector<Eigen::VectorXd> values;
  std::string provenance(1, to_char(kind));
  if (kind == PredictorKind::individual) {
    for (const auto& t : targets) {
      values.push_back(predict_individual(history, aug, t));
      provenance += ":" + t.label();
    }
  } else {
    const TrainingDataset data = dataset_from_history(history);
    if (data.size() == 0) throw ModelUnavailable("model unavailable: empty demand history");
    for (const auto& t : targets) {
      values.push_back(predict_customers(train_model(kind, data, t, config), aug));
      provenance += ":" + t.label();
    }
  }
  if (values.size() == 1) return assemble_deterministic(std::move(values[0]), provenance);
  return assemble_robust(std::move(values[0]), std::move(values[1]), provenance);
}

}  // namespace qrvrp
