#include "fixtures.hpp"

#include "qrvrp/rng.hpp"

namespace qrvrp::testing {

SolomonInstance random_instance(int n, std::uint64_t seed, double capacity, double horizon) {
  Stream rng(seed);
  SolomonInstance inst;
  inst.name = "RND" + std::to_string(n);
  inst.capacity = capacity;
  inst.nodes.push_back({0, 50.0, 50.0, 0.0, 0.0, horizon, 0.0});
  for (int i = 1; i <= n; ++i) {
    const double x = rng.uniform(0.0, 100.0), y = rng.uniform(0.0, 100.0);
    const double ready = rng.uniform(0.0, horizon / 2);
    const double width = rng.uniform(horizon / 10, horizon / 2);
    const double demand = std::floor(rng.uniform(5.0, 40.0));
    inst.nodes.push_back({i, x, y, demand, ready, ready + width, 10.0});
  }
  return inst;
}

}  // namespace qrvrp::testing
