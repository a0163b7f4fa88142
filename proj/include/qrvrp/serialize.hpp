#pragma once

#include <string>

#include "json.hpp"
#include "qrvrp/instance.hpp"
#include "qrvrp/predict.hpp"
#include "qrvrp/routing.hpp"
#include "qrvrp/simulate.hpp"

namespace qrvrp {

using Json = nlohmann::ordered_json;

Json to_json(const AugmentedInstance& aug);
AugmentedInstance augmented_from_json(const Json& j);

Json to_json(const DemandHistory& history);
DemandHistory history_from_json(const Json& j);

Json to_json(const Model& model);
Model model_from_json(const Json& j);

Json to_json(const DemandPrediction& prediction);
DemandPrediction prediction_from_json(const Json& j);

/// Routes plus the planning mode, budget and travel cost they were built for.
Json to_json(const Solution& solution, const RoutingProblem& problem);
Solution solution_from_json(const Json& j);

Json to_json(const EvaluationReport& report);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

}  // namespace qrvrp
