#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrvrp/error.hpp"
#include "qrvrp/instance.hpp"
#include "qrvrp/predict.hpp"
#include "qrvrp/serialize.hpp"

namespace qrvrp {

/// D-δ-ε or R-δ-ε̄-ε̂-Γγ. Deterministic names use `target` only.
struct ModelName {
  PlanningMode family = PlanningMode::deterministic;
  PredictorKind predictor = PredictorKind::linear;
  PredictionTarget target;  // ε, or ε̄ for robust names
  PredictionTarget worst;   // ε̂
  int gamma = 0;

  /// Canonical form, with G for Γ.
  std::string str() const;
  /// One target for D names, (base, worst) for R names.
  std::vector<PredictionTarget> targets() const;

  bool operator==(const ModelName&) const = default;
};

class ModelNameError : public Error {
 public:
  ModelNameError(const std::string& text, std::size_t position, const std::string& what);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

inline constexpr const char* kModelGrammar =
    "D-(I|L|N)-(M|50|55|60|65|70|75|80|85|90|95) or R-(I|L|N)-(M|50|55)-(90|95)-(G|Γ)(1|2)";

ModelName parse_model_name(std::string_view text);

/// All 69 names: D names then R names, predictors in I, L, N order.
std::vector<ModelName> all_model_names();

/// Individual predictions need every routed customer to have more than one observation.
bool model_available(const ModelName& model, HistorySetting setting, int observations);

enum class SolverChoice { alns, exact_export };

struct GridConfig {
  std::vector<std::string> instances;  // Solomon files
  int customers = 25;
  std::vector<HistorySetting> settings{HistorySetting::all, HistorySetting::half, HistorySetting::quar};
  std::vector<int> observations{1, 10, 30};
  int replications = 5;
  std::vector<ModelName> models;
  SolverChoice solver = SolverChoice::alns;
  double time_limit = 60.0;
  long iteration_budget = 0;  // > 0 makes ALNS stop by iteration count
  int scenarios = 10000;
  std::uint64_t master_seed = 0;
  int threads = 1;
  std::string lp_dir;          // exact-export: where LP files go and .sol files are read from
  bool report_timing = true;   // false leaves solve_seconds empty

  void validate() const;
  static GridConfig from_json(const Json& j);
  Json to_json() const;
};

struct ResultRow {
  std::string instance;
  HistorySetting setting = HistorySetting::all;
  int n_obs = 0;
  int replication = 0;
  std::string model;
  std::optional<double> initial_cost;
  std::optional<double> mean_total_cost;
  std::optional<double> std_total_cost;
  std::optional<double> mean_tw_violation_frac;
  std::optional<double> normalized_score;
  std::optional<double> solve_seconds;
  std::string status;
};

/// Seeds for every stage, derived from the master seed and cell coordinates.
struct CellSeeds {
  std::uint64_t augment;   // per (instance, replication)
  std::uint64_t scenario;  // per (instance, replication), shared by all models
  std::uint64_t history;   // per (instance, replication, setting, n)
  std::uint64_t training;  // per (instance, replication, setting, n, predictor)
  std::uint64_t solver;    // per cell
};

CellSeeds cell_seeds(std::uint64_t master, const std::string& instance, int replication, HistorySetting setting,
                     int observations, const ModelName& model);

/// One cell end to end. Errors are recorded in `status`.
ResultRow run_cell(const SolomonInstance& instance, HistorySetting setting, int observations, int replication,
                   const ModelName& model, const GridConfig& config);

/// Every cell of the grid in config order (instance, setting, n, replication,
/// model). Training and scenarios are shared within a cell group; scores are
/// normalized per (instance, replication) against the best all/n=30 row.
std::vector<ResultRow> run_grid(const GridConfig& config,
                                const std::function<void(const ResultRow&)>& progress = {});

/// Fills normalized_score in place; rows without an all/n=30 base keep it empty.
void normalize_rows(std::vector<ResultRow>& rows);

inline constexpr const char* kCsvHeader =
    "instance,setting,n_obs,replication,model,initial_cost,mean_total_cost,std_total_cost,"
    "mean_tw_violation_frac,normalized_score,solve_seconds,status";

void write_csv(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> read_csv(std::istream& in);

struct SummaryEntry {
  HistorySetting setting = HistorySetting::all;
  int n_obs = 0;
  int rank = 0;
  std::string model;
  int rows = 0;
  double mean_score = 0.0;  // normalized score, or raw mean cost when no base exists
  double std_score = 0.0;
  std::optional<double> mean_violation_increase;  // % against D-δ-95 of the same predictor
  std::optional<double> std_violation_increase;
};

/// Per (setting, n): models ranked by ascending mean score, keeping the best
/// `top_k` (all when 0). Only rows with status "ok" contribute.
std::vector<SummaryEntry> summarize(std::span<const ResultRow> rows, int top_k = 0);

void write_summary_csv(std::ostream& out, std::span<const SummaryEntry> entries);

}  // namespace qrvrp
