#pragma once

#include <string>

#include "qrvrp/instance.hpp"
#include "qrvrp/routing.hpp"

namespace qrvrp::testing {

inline std::string data_path(const std::string& name) { return std::string(QRVRP_TEST_DATA) + "/" + name; }

/// Depot at the origin and three customers on a 3-4-5 grid.
inline SolomonInstance toy_instance() {
  SolomonInstance inst;
  inst.name = "TOY3";
  inst.listed_vehicle_count = 3;
  inst.capacity = 20.0;
  inst.nodes = {
      {0, 0.0, 0.0, 0.0, 0.0, 100.0, 0.0},
      {1, 3.0, 0.0, 4.0, 0.0, 50.0, 1.0},
      {2, 3.0, 4.0, 3.0, 5.0, 60.0, 1.0},
      {3, 0.0, 4.0, 5.0, 0.0, 70.0, 1.0},
  };
  return inst;
}

/// Toy problem with capacity 10 after augmentation and the given planning demands.
inline RoutingProblem toy_det_problem(double d1 = 4.0, double d2 = 3.0, double d3 = 5.0) {
  const AugmentedInstance aug = augment(toy_instance(), 7);
  Eigen::VectorXd d(4);
  d << 0.0, d1, d2, d3;
  return RoutingProblem::deterministic(aug, d);
}

inline RoutingProblem toy_robust_problem(int gamma) {
  const AugmentedInstance aug = augment(toy_instance(), 7);
  UncertaintyBudget b;
  b.base.resize(4);
  b.base << 0.0, 3.0, 2.0, 4.0;
  b.deviation.resize(4);
  b.deviation << 0.0, 2.0, 1.5, 1.0;
  b.gamma = gamma;
  return RoutingProblem::robust(aug, b);
}

/// Random instance with n customers in a 100x100 square, wide windows.
SolomonInstance random_instance(int n, std::uint64_t seed, double capacity = 200.0, double horizon = 1000.0);

}  // namespace qrvrp::testing
