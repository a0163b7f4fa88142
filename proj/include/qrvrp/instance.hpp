#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qrvrp/rng.hpp"

namespace qrvrp {

struct Node {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;   // nominal (Solomon) demand
  double ready = 0.0;    // earliest service start
  double due = 0.0;      // latest service start
  double service = 0.0;  // service duration
};

/// A Solomon benchmark instance. Node 0 is the depot; ids are 0..n contiguous.
struct SolomonInstance {
  std::string name;
  int listed_vehicle_count = 0;  // informational, fleet size is free
  double capacity = 0.0;
  std::vector<Node> nodes;

  int customer_count() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Cost and travel time between nodes (they coincide).
using TravelMatrix = Eigen::MatrixXd;

inline constexpr int kFeatureDim = 6;
inline constexpr int kMixtureComponents = 5;
using FeatureVector = Eigen::Matrix<double, kFeatureDim, 1>;
using MixtureWeights = Eigen::Matrix<double, kMixtureComponents, 1>;

/// Offsets of the five demand modes around the nominal demand.
inline constexpr double kModeOffsets[kMixtureComponents] = {-10.0, -5.0, 0.0, 5.0, 10.0};

/// Solomon instance with halved capacity, per-customer features and the
/// mixture demand model. `features` and `mixture` are indexed by node id;
/// entry 0 (depot) is all zeros.
struct AugmentedInstance {
  SolomonInstance base;
  std::vector<FeatureVector> features;
  std::vector<MixtureWeights> mixture;
  std::uint64_t seed = 0;

  int customer_count() const { return base.customer_count(); }
  double capacity() const { return base.capacity; }
};

enum class HistorySetting { all, half, quar };

std::string to_string(HistorySetting s);
HistorySetting parse_history_setting(std::string_view text);

/// Demand observations for one customer together with its feature vector, so
/// that a history stays usable after the instance is truncated.
struct CustomerHistory {
  FeatureVector features = FeatureVector::Zero();
  std::vector<double> values;
};

/// Indexed by original customer id (entry 0 unused).
struct DemandHistory {
  HistorySetting setting = HistorySetting::all;
  int observations = 0;
  std::vector<CustomerHistory> customers;

  std::size_t record_count() const;
};

SolomonInstance parse_solomon(std::string_view text);
SolomonInstance load_solomon(const std::string& path);

TravelMatrix build_travel_matrix(const SolomonInstance& instance);

/// Softmax over features 1..5 (feature 0 is ignored).
MixtureWeights mixture_weights(const FeatureVector& features);

AugmentedInstance augment(const SolomonInstance& instance, std::uint64_t seed);

/// One draw from the truncated mixture f_0 + N(offset_k, 1) conditioned on >= 0.
double sample_demand(const AugmentedInstance& aug, int customer, Stream& rng);

/// Observations for every customer in the setting's history set, keyed by
/// (seed, customer, draw) so the result does not depend on evaluation order.
DemandHistory generate_history(const AugmentedInstance& aug, HistorySetting setting,
                               int observations, std::uint64_t seed);

/// Depot plus customers 1..m.
AugmentedInstance take_first(const AugmentedInstance& aug, int m);

}  // namespace qrvrp
