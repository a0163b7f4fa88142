#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qrvrp/instance.hpp"

namespace qrvrp {

enum class TargetKind { mean, quantile };

/// Either the conditional mean or a beta-quantile of demand.
struct PredictionTarget {
  TargetKind kind = TargetKind::mean;
  double beta = 0.0;  // only meaningful for quantiles

  static PredictionTarget mean() { return {TargetKind::mean, 0.0}; }
  static PredictionTarget quantile(double beta);

  /// "M" or the percentage, e.g. "65".
  std::string label() const;
  static PredictionTarget from_label(std::string_view label);

  bool operator==(const PredictionTarget&) const = default;
};

/// Individual (per-customer history), linear, or one-hidden-layer network.
enum class PredictorKind { individual, linear, nonlinear };

char to_char(PredictorKind kind);
PredictorKind predictor_from_char(char c);

double pinball_loss(double prediction, double actual, double beta);

/// Lower sample quantile: the ceil(beta * n)-th order statistic.
double empirical_quantile(std::span<const double> values, double beta);
double empirical_mean(std::span<const double> values);

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, kFeatureDim>;

/// Aggregated (features, demand) pairs over every customer with history.
struct TrainingDataset {
  FeatureMatrix features;
  Eigen::VectorXd demand;

  Eigen::Index size() const { return demand.size(); }
};

TrainingDataset dataset_from_history(const DemandHistory& history);

/// Z-scoring of inputs and of the regression target. Constant columns get scale 1.
struct Normalization {
  FeatureVector feature_mean = FeatureVector::Zero();
  FeatureVector feature_scale = FeatureVector::Ones();
  double target_mean = 0.0;
  double target_scale = 1.0;

  static Normalization identity() { return {}; }
  static Normalization fit(const TrainingDataset& data);

  FeatureMatrix apply(const FeatureMatrix& x) const;
  FeatureVector apply(const FeatureVector& f) const;
};

struct TrainerConfig {
  std::uint64_t seed = 0;
  double step_size = 0.01;
  int max_iterations = 1000;
  int patience = 50;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Losses are in original demand units.
struct TrainingTrace {
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int iterations = 0;
  int best_iteration = 0;
};

struct LinearModel {
  double intercept = 0.0;
  FeatureVector coefficients = FeatureVector::Zero();
  Normalization normalization;
  PredictionTarget target;
  TrainingTrace trace;
};

inline constexpr int kHiddenUnits = 10;

struct MlpModel {
  Eigen::Matrix<double, kHiddenUnits, kFeatureDim> hidden_weights =
      Eigen::Matrix<double, kHiddenUnits, kFeatureDim>::Zero();
  Eigen::Matrix<double, kHiddenUnits, 1> hidden_bias = Eigen::Matrix<double, kHiddenUnits, 1>::Zero();
  Eigen::Matrix<double, kHiddenUnits, 1> output_weights = Eigen::Matrix<double, kHiddenUnits, 1>::Zero();
  double output_bias = 0.0;
  Normalization normalization;
  PredictionTarget target;
  TrainingTrace trace;

  static constexpr int parameter_count = kHiddenUnits * kFeatureDim + 2 * kHiddenUnits + 1;
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& params);
};

using Model = std::variant<LinearModel, MlpModel>;

/// Mean training loss (squared error or pinball) of a network with flat
/// parameters `params` on already-normalized data; writes the exact gradient
/// into `grad` when non-null.
double mlp_objective(const Eigen::VectorXd& params, const FeatureMatrix& x, const Eigen::VectorXd& y,
                     const PredictionTarget& target, Eigen::VectorXd* grad);

/// Same for the affine model; params = (intercept, coefficients).
double linear_objective(const Eigen::VectorXd& params, const FeatureMatrix& x, const Eigen::VectorXd& y,
                        const PredictionTarget& target, Eigen::VectorXd* grad);

LinearModel train_linear(const TrainingDataset& data, const PredictionTarget& target,
                         const TrainerConfig& config = {});
MlpModel train_mlp(const TrainingDataset& data, const PredictionTarget& target, const TrainerConfig& config = {});
Model train_model(PredictorKind kind, const TrainingDataset& data, const PredictionTarget& target,
                  const TrainerConfig& config = {});

/// Raw model output in demand units, before clamping.
double evaluate_raw(const LinearModel& model, const FeatureVector& features);
double evaluate_raw(const MlpModel& model, const FeatureVector& features);

/// Model output clamped at zero.
double predict_value(const LinearModel& model, const FeatureVector& features);
double predict_value(const MlpModel& model, const FeatureVector& features);
double predict_value(const Model& model, const FeatureVector& features);

/// Mean training loss in demand units.
double training_loss(const Model& model, const TrainingDataset& data);

enum class PlanningMode { deterministic, robust };

std::string to_string(PlanningMode mode);
PlanningMode parse_planning_mode(std::string_view text);

/// Planning demands indexed by node id (entry 0 is the depot, always 0).
/// Deterministic mode fills `value`; robust mode fills `base` and `worst`.
struct DemandPrediction {
  PlanningMode mode = PlanningMode::deterministic;
  Eigen::VectorXd value;
  Eigen::VectorXd base;
  Eigen::VectorXd worst;
  std::string provenance;

  int customer_count() const;
};

/// Per-customer predictions for every customer of `aug`.
Eigen::VectorXd predict_individual(const DemandHistory& history, const AugmentedInstance& aug,
                                   const PredictionTarget& target);
Eigen::VectorXd predict_customers(const Model& model, const AugmentedInstance& aug);

DemandPrediction assemble_deterministic(Eigen::VectorXd value, std::string provenance);
/// Repairs quantile crossing with worst <- max(base, worst).
DemandPrediction assemble_robust(Eigen::VectorXd base, Eigen::VectorXd worst, std::string provenance);

/// One target gives a deterministic prediction, two give (base, worst-case).
DemandPrediction build_predictions(PredictorKind kind, const AugmentedInstance& aug, const DemandHistory& history,
                                   std::span<const PredictionTarget> targets, const TrainerConfig& config = {});

}  // namespace qrvrp
