#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qrvrp/alns.hpp"
#include "qrvrp/experiment.hpp"
#include "qrvrp/lp_export.hpp"
#include "qrvrp/serialize.hpp"
#include "qrvrp/simulate.hpp"

using namespace qrvrp;

namespace {

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<PredictionTarget> parse_targets(const std::string& list) {
  std::vector<PredictionTarget> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(PredictionTarget::from_label(item));
  return out;
}

// Drops trailing customers so the instance matches a prediction or solution.
AugmentedInstance fit_instance(const AugmentedInstance& aug, int customers) {
  if (customers == aug.customer_count()) return aug;
  return take_first(aug, customers);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual quantile predictions for capacitated vehicle routing with time windows"};
  app.require_subcommand(1);
  app.footer(std::string("Model names: ") + kModelGrammar +
             "\n  D = deterministic, R = robust; I/L/N = individual, linear, neural predictor;\n"
             "  M = mean, 50..95 = quantile level in percent; G1/G2 = budget of uncertainty.\n"
             "  Examples: D-N-60, R-L-M-95-G1");

  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "Random seed")->default_val(0); };
  TrainerConfig trainer;
  auto add_trainer = [&](CLI::App* sub) {
    sub->add_option("--step-size", trainer.step_size, "Adam step size")->capture_default_str();
    sub->add_option("--max-iterations", trainer.max_iterations, "Training iterations")->capture_default_str();
    sub->add_option("--patience", trainer.patience, "Early-stopping patience")->capture_default_str();
  };

  // augment
  std::string solomon_path, out_path;
  int customers = 0;
  auto* aug_cmd = app.add_subcommand("augment", "Parse a Solomon file, halve capacity and draw customer features");
  aug_cmd->add_option("--instance", solomon_path, "Solomon instance file")->required()->check(CLI::ExistingFile);
  aug_cmd->add_option("--customers", customers, "Keep only the first m customers (0 = all)");
  aug_cmd->add_option("--out", out_path, "Output JSON (stdout if omitted)");
  add_seed(aug_cmd);

  // history
  std::string aug_path, setting = "all";
  int observations = 30;
  auto* hist_cmd = app.add_subcommand("history", "Sample demand history from the true demand distribution");
  hist_cmd->add_option("--instance", aug_path, "Augmented instance JSON")->required()->check(CLI::ExistingFile);
  hist_cmd->add_option("--setting", setting, "all | half | quar")->check(CLI::IsMember({"all", "half", "quar"}));
  hist_cmd->add_option("--observations", observations, "Observations per customer with history");
  hist_cmd->add_option("--out", out_path, "Output JSON");
  add_seed(hist_cmd);

  // train
  std::string history_path, predictor = "L", target = "M";
  auto* train_cmd = app.add_subcommand("train", "Fit a linear or neural mean/quantile model on a history");
  train_cmd->add_option("--history", history_path, "History JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--predictor", predictor, "L | N")->check(CLI::IsMember({"L", "N"}));
  train_cmd->add_option("--target", target, "M or a quantile level in percent");
  train_cmd->add_option("--out", out_path, "Output JSON");
  add_trainer(train_cmd);
  add_seed(train_cmd);

  // predict
  std::string targets = "M", model_name;
  std::vector<std::string> model_paths;
  auto* pred_cmd = app.add_subcommand("predict", "Produce planning demands (one target: det, two: robust)");
  pred_cmd->add_option("--instance", aug_path, "Augmented instance JSON")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--history", history_path, "History JSON (trains models on the fly)");
  pred_cmd->add_option("--predictor", predictor, "I | L | N")->check(CLI::IsMember({"I", "L", "N"}));
  pred_cmd->add_option("--targets", targets, "Comma-separated targets, e.g. M or 55,90");
  pred_cmd->add_option("--model-name", model_name, "Model name; sets predictor and targets");
  pred_cmd->add_option("--models", model_paths, "Trained model JSON files instead of --history")
      ->check(CLI::ExistingFile);
  pred_cmd->add_option("--customers", customers, "Predict only the first m customers (0 = all)");
  pred_cmd->add_option("--out", out_path, "Output JSON");
  add_trainer(pred_cmd);
  add_seed(pred_cmd);

  // solve
  std::string predictions_path, mode = "det", diagnostics_path;
  int gamma = 0;
  double time_limit = 60.0;
  long iterations = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Run ALNS on the deterministic or robust problem");
  solve_cmd->add_option("--instance", aug_path, "Augmented instance JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--predictions", predictions_path, "Predictions JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--mode", mode, "det | robust")->check(CLI::IsMember({"det", "robust"}));
  solve_cmd->add_option("--gamma", gamma, "Budget of uncertainty (robust)");
  solve_cmd->add_option("--time-limit", time_limit, "Wall-clock limit in seconds");
  solve_cmd->add_option("--iterations", iterations, "Iteration budget; replaces the time limit when > 0");
  solve_cmd->add_option("--diagnostics", diagnostics_path, "Per-iteration CSV");
  solve_cmd->add_option("--out", out_path, "Output JSON");
  add_seed(solve_cmd);

  // export-lp
  auto* lp_cmd = app.add_subcommand("export-lp", "Write the MIP in CPLEX LP format for an external solver");
  lp_cmd->add_option("--instance", aug_path, "Augmented instance JSON")->required()->check(CLI::ExistingFile);
  lp_cmd->add_option("--predictions", predictions_path, "Predictions JSON")->required()->check(CLI::ExistingFile);
  lp_cmd->add_option("--gamma", gamma, "Budget of uncertainty (robust)");
  lp_cmd->add_option("--out", out_path, "Output LP file");
  add_seed(lp_cmd);

  // simulate
  std::string solution_path, records_path;
  int scenarios = 10000;
  auto* sim_cmd = app.add_subcommand("simulate", "Evaluate a solution under sampled demand scenarios");
  sim_cmd->add_option("--solution", solution_path, "Solution JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--instance", aug_path, "Augmented instance JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--scenarios", scenarios, "Number of scenarios");
  sim_cmd->add_option("--records", records_path, "Per-scenario CSV");
  sim_cmd->add_option("--out", out_path, "Output JSON");
  add_seed(sim_cmd);

  // grid
  std::string config_path;
  int threads = 0;
  bool quiet = false, seed_given = false;
  auto* grid_cmd = app.add_subcommand("grid", "Run an experiment grid and write the results CSV");
  grid_cmd->add_option("--config", config_path, "Grid config JSON")->required()->check(CLI::ExistingFile);
  grid_cmd->add_option("--threads", threads, "Worker threads (overrides the config)");
  grid_cmd->add_option("--out", out_path, "Output CSV");
  grid_cmd->add_flag("--quiet", quiet, "No progress on stderr");
  grid_cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&](const std::uint64_t& v) {
        seed = v;
        seed_given = true;
      },
      "Master seed (overrides the config)");

  // summarize
  std::string results_path;
  int top = 10;
  auto* sum_cmd = app.add_subcommand("summarize", "Rank models per setting from a results CSV");
  sum_cmd->add_option("--results", results_path, "Results CSV")->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("--top", top, "Models kept per setting (0 = all)");
  sum_cmd->add_option("--out", out_path, "Output CSV");
  add_seed(sum_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (aug_cmd->parsed()) {
      AugmentedInstance aug = augment(load_solomon(solomon_path), seed);
      if (customers > 0) aug = take_first(aug, customers);
      emit(out_path, dump(to_json(aug)));
    } else if (hist_cmd->parsed()) {
      const AugmentedInstance aug = augmented_from_json(read_json(aug_path));
      const DemandHistory h = generate_history(aug, parse_history_setting(setting), observations, seed);
      emit(out_path, dump(to_json(h)));
    } else if (train_cmd->parsed()) {
      const TrainingDataset data = dataset_from_history(history_from_json(read_json(history_path)));
      TrainerConfig tc = trainer;
      tc.seed = seed;
      const Model m = train_model(predictor_from_char(predictor[0]), data, PredictionTarget::from_label(target), tc);
      emit(out_path, dump(to_json(m)));
    } else if (pred_cmd->parsed()) {
      AugmentedInstance aug = augmented_from_json(read_json(aug_path));
      if (customers > 0) aug = take_first(aug, customers);
      std::vector<PredictionTarget> ts = parse_targets(targets);
      PredictorKind kind = predictor_from_char(predictor[0]);
      if (!model_name.empty()) {
        const ModelName m = parse_model_name(model_name);
        ts = m.targets();
        kind = m.predictor;
      }
      DemandPrediction p;
      if (!model_paths.empty()) {
        if (model_paths.size() > 2) throw Error("predict: at most two models");
        std::vector<Eigen::VectorXd> values;
        std::string provenance = "models";
        for (const auto& path : model_paths) {
          const Model m = model_from_json(read_json(path));
          values.push_back(predict_customers(m, aug));
          provenance += ":" + std::visit([](const auto& x) { return x.target.label(); }, m);
        }
        p = values.size() == 1 ? assemble_deterministic(values[0], provenance)
                               : assemble_robust(values[0], values[1], provenance);
      } else {
        if (history_path.empty()) throw Error("predict: need --history or --models");
        TrainerConfig tc = trainer;
        tc.seed = seed;
        p = build_predictions(kind, aug, history_from_json(read_json(history_path)), ts, tc);
      }
      emit(out_path, dump(to_json(p)));
    } else if (solve_cmd->parsed()) {
      const DemandPrediction p = prediction_from_json(read_json(predictions_path));
      if (to_string(p.mode) != mode) throw Error("solve: --mode " + mode + " but predictions are " + to_string(p.mode));
      const AugmentedInstance aug = fit_instance(augmented_from_json(read_json(aug_path)), p.customer_count());
      const RoutingProblem problem = RoutingProblem::from_prediction(aug, p, gamma);
      AlnsConfig ac;
      ac.time_limit = time_limit;
      ac.max_iterations = iterations;
      ac.seed = seed;
      std::ofstream diag;
      if (!diagnostics_path.empty()) {
        diag.open(diagnostics_path);
        ac.diagnostics = &diag;
      }
      const AlnsRun run = run_alns(problem, ac);
      Json j = to_json(run.best, problem);
      j["iterations"] = run.iterations;
      j["initial_cost"] = run.initial_cost;
      emit(out_path, dump(j));
    } else if (lp_cmd->parsed()) {
      const DemandPrediction p = prediction_from_json(read_json(predictions_path));
      const AugmentedInstance aug = fit_instance(augmented_from_json(read_json(aug_path)), p.customer_count());
      emit(out_path, export_lp(RoutingProblem::from_prediction(aug, p, gamma)));
    } else if (sim_cmd->parsed()) {
      const Solution s = solution_from_json(read_json(solution_path));
      const AugmentedInstance aug = fit_instance(augmented_from_json(read_json(aug_path)), s.customer_count());
      const ScenarioMatrix m = sample_scenarios(aug, scenarios, seed);
      const EvaluationReport r = evaluate(s, m, ReplayContext::from_instance(aug), !records_path.empty());
      if (!records_path.empty()) {
        std::ostringstream csv;
        csv << "scenario,total_cost,recourse,detours,violation_fraction\n";
        for (std::size_t k = 0; k < r.records.size(); ++k) {
          const auto& rec = r.records[k];
          csv << k << ',' << rec.total_cost << ',' << rec.recourse << ',' << rec.detours << ','
              << rec.violation_fraction << '\n';
        }
        emit(records_path, csv.str());
      }
      emit(out_path, dump(to_json(r)));
    } else if (grid_cmd->parsed()) {
      GridConfig config = GridConfig::from_json(read_json(config_path));
      if (seed_given) config.master_seed = seed;
      if (threads > 0) config.threads = threads;
      const auto rows = run_grid(config, [&](const ResultRow& r) {
        if (!quiet)
          std::cerr << r.instance << ' ' << to_string(r.setting) << ' ' << r.n_obs << ' ' << r.replication << ' '
                    << r.model << ' ' << r.status << '\n';
      });
      std::ostringstream csv;
      write_csv(csv, rows);
      emit(out_path, csv.str());
    } else if (sum_cmd->parsed()) {
      std::ifstream in(results_path);
      const auto rows = read_csv(in);
      const auto summary = summarize(rows, top);
      std::ostringstream csv;
      write_summary_csv(csv, summary);
      emit(out_path, csv.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
