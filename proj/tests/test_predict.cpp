#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "qrvrp/error.hpp"
#include "qrvrp/predict.hpp"
#include "qrvrp/rng.hpp"

using namespace qrvrp;

namespace {

TrainingDataset linear_data(int n, std::uint64_t seed, double noise) {
  Stream rng(seed);
  TrainingDataset d;
  d.features.resize(n, kFeatureDim);
  d.demand.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kFeatureDim; ++k) d.features(i, k) = rng.uniform();
    d.demand(i) = 3.0 + 2.0 * d.features(i, 1) + noise * rng.uniform(-1.0, 1.0);
  }
  return d;
}

double summed_pinball(const std::vector<double>& v, double d, double beta) {
  double s = 0.0;
  for (double x : v) s += pinball_loss(d, x, beta);
  return s;
}

}  // namespace

TEST_CASE("pinball loss weights under-prediction by beta") {
  CHECK(pinball_loss(10, 10, 0.7) == 0.0);
  CHECK(pinball_loss(5, 10, 0.7) == doctest::Approx(3.5));
  CHECK(pinball_loss(12, 10, 0.7) == doctest::Approx(0.6));
  CHECK(pinball_loss(3, 7, 0.5) == doctest::Approx(2.0));

  Stream rng(3);
  for (int t = 0; t < 500; ++t) {
    const double beta = rng.uniform(0.05, 0.95), y = rng.uniform(-10, 10);
    const double a = rng.uniform(-20, 20), b = rng.uniform(-20, 20), lam = rng.uniform();
    CHECK(pinball_loss(a, y, beta) >= 0.0);
    const double mid = pinball_loss(lam * a + (1 - lam) * b, y, beta);
    CHECK(mid <= lam * pinball_loss(a, y, beta) + (1 - lam) * pinball_loss(b, y, beta) + 1e-12);
    CHECK(pinball_loss(a, y, 0.5) == doctest::Approx(0.5 * std::abs(a - y)));
  }
}

TEST_CASE("empirical quantile and mean") {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(empirical_quantile(v, 0.5) == 5.0);
  CHECK(empirical_quantile(v, 0.9) == 9.0);
  CHECK(empirical_quantile(v, 0.95) == 10.0);
  const std::vector<double> one{7.0};
  for (double b : {0.05, 0.5, 0.95}) CHECK(empirical_quantile(one, b) == 7.0);
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), Error);

  CHECK(empirical_mean(std::vector<double>{4, 6}) == 5.0);
  CHECK(empirical_mean(std::vector<double>{3.25}) == 3.25);
  CHECK(empirical_mean(std::vector<double>{0, 0, 30}) == 10.0);
  CHECK_THROWS_AS(empirical_mean(std::vector<double>{}), Error);
}

TEST_CASE("empirical quantile is a member and a grid minimizer") {
  Stream rng(17);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + static_cast<int>(rng.index(30));
    std::vector<double> v(n);
    for (auto& x : v) x = std::round(rng.uniform(0, 100) * 4) / 4;
    const double beta = 0.05 * (1 + static_cast<int>(rng.index(19)));
    const double q = empirical_quantile(v, beta);
    CHECK(std::find(v.begin(), v.end(), q) != v.end());
    const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    const double at_q = summed_pinball(v, q, beta);
    for (int g = 0; g <= 2000; ++g) {
      const double d = lo + (hi - lo) * g / 2000.0;
      REQUIRE(at_q <= summed_pinball(v, d, beta) + 1e-9);
    }
  }
}

TEST_CASE("linear model recovers a noiseless affine map") {
  const TrainingDataset data = linear_data(400, 1, 0.0);
  TrainerConfig tc;
  tc.max_iterations = 1000;
  const LinearModel m = train_linear(data, PredictionTarget::mean(), tc);
  for (Eigen::Index i = 0; i < data.size(); ++i)
    REQUIRE(std::abs(predict_value(m, data.features.row(i).transpose()) - data.demand(i)) <= 1e-3);
  CHECK(m.trace.best_loss <= m.trace.initial_loss);
}

TEST_CASE("linear quantile regression at beta 0.5 and 0.9") {
  Stream rng(5);
  TrainingDataset data;
  const int n = 10000;
  data.features.resize(n, kFeatureDim);
  data.demand.resize(n);
  for (int i = 0; i < n; ++i) {
    data.features(i, 0) = rng.uniform(10, 90);
    for (int k = 1; k < kFeatureDim; ++k) data.features(i, k) = rng.uniform();
    data.demand(i) = data.features(i, 0) + rng.uniform(-1, 1);
  }
  FeatureVector probe;
  probe << 50, 0.5, 0.5, 0.5, 0.5, 0.5;
  const LinearModel med = train_linear(data, PredictionTarget::quantile(0.5));
  CHECK(std::abs(predict_value(med, probe) - 50.0) <= 0.1);
  const LinearModel q90 = train_linear(data, PredictionTarget::quantile(0.9));
  CHECK(std::abs(predict_value(q90, probe) - 50.8) <= 0.15);
}

TEST_CASE("mlp fits an affine map and is deterministic") {
  const TrainingDataset data = linear_data(300, 2, 0.0);
  TrainerConfig tc;
  tc.seed = 9;
  const MlpModel a = train_mlp(data, PredictionTarget::mean(), tc);
  CHECK(training_loss(a, data) <= 1e-2);
  CHECK(a.trace.best_loss <= a.trace.initial_loss);
  const MlpModel b = train_mlp(data, PredictionTarget::mean(), tc);
  CHECK(a.pack() == b.pack());
  tc.seed = 10;
  const MlpModel c = train_mlp(data, PredictionTarget::mean(), tc);
  CHECK(a.pack() != c.pack());
}

TEST_CASE("mlp gradient matches central differences") {
  const TrainingDataset data = linear_data(40, 4, 0.5);
  Stream rng(8);
  for (const auto& target : {PredictionTarget::mean(), PredictionTarget::quantile(0.8)}) {
    Eigen::VectorXd p(MlpModel::parameter_count);
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(-1, 1);
    Eigen::VectorXd g;
    mlp_objective(p, data.features, data.demand, target, &g);
    const double h = 1e-7;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      Eigen::VectorXd up = p, dn = p;
      up(i) += h;
      dn(i) -= h;
      const double fd = (mlp_objective(up, data.features, data.demand, target, nullptr) -
                         mlp_objective(dn, data.features, data.demand, target, nullptr)) /
                        (2 * h);
      CHECK(std::abs(fd - g(i)) <= 1e-4 * std::max(1.0, std::abs(g(i))));
    }
  }
}

TEST_CASE("predict_value clamps and applies normalization") {
  LinearModel lin;
  lin.intercept = 1.0;
  FeatureVector f = FeatureVector::Random();
  CHECK(predict_value(lin, f) == 1.0);
  lin.intercept = -2.0;
  CHECK(evaluate_raw(lin, f) == -2.0);
  CHECK(predict_value(lin, f) == 0.0);

  MlpModel net;
  net.output_bias = 5.0;
  CHECK(predict_value(net, f) == 5.0);
}

TEST_CASE("assembly: crossing repair and individual predictions") {
  Eigen::VectorXd base(3), worst(3);
  base << 0, 10, 4;
  worst << 0, 8, 6;
  const DemandPrediction p = assemble_robust(base, worst, "test");
  CHECK(p.base(1) == 10.0);
  CHECK(p.worst(1) == 10.0);
  CHECK(p.worst(2) == 6.0);
  CHECK(p.mode == PlanningMode::robust);

  const AugmentedInstance aug = augment(qrvrp::testing::toy_instance(), 1);
  DemandHistory h;
  h.customers.resize(4);
  for (int i = 1; i <= 3; ++i) {
    h.customers[i].features = aug.features[i];
    for (int v = 1; v <= 10; ++v) h.customers[i].values.push_back(v);
  }
  const PredictionTarget t50 = PredictionTarget::quantile(0.5);
  const DemandPrediction d = build_predictions(PredictorKind::individual, aug, h, std::span(&t50, 1));
  CHECK(d.mode == PlanningMode::deterministic);
  CHECK(d.value(0) == 0.0);
  for (int i = 1; i <= 3; ++i) CHECK(d.value(i) == 5.0);
  CHECK(d.provenance == "I:50");

  h.customers[2].values.clear();
  CHECK_THROWS_AS(build_predictions(PredictorKind::individual, aug, h, std::span(&t50, 1)), ModelUnavailable);
}

TEST_CASE("robust linear predictions on a generated history") {
  const AugmentedInstance aug = augment(qrvrp::testing::random_instance(40, 6), 2);
  const DemandHistory h = generate_history(aug, HistorySetting::all, 10, 3);
  const std::vector<PredictionTarget> ts{PredictionTarget::mean(), PredictionTarget::quantile(0.95)};
  const DemandPrediction p = build_predictions(PredictorKind::linear, aug, h, ts);
  CHECK(p.provenance == "L:M:95");
  for (int i = 1; i <= 40; ++i) {
    CHECK(p.base(i) >= 0.0);
    CHECK(p.worst(i) >= p.base(i));
  }
  CHECK((p.worst - p.base).sum() > 0.0);
}

TEST_CASE("target labels") {
  CHECK(PredictionTarget::mean().label() == "M");
  CHECK(PredictionTarget::quantile(0.65).label() == "65");
  CHECK(PredictionTarget::from_label("95") == PredictionTarget::quantile(0.95));
  CHECK_THROWS_AS(PredictionTarget::from_label("x5"), Error);
  CHECK_THROWS_AS(PredictionTarget::quantile(1.0), Error);
}
