// Copyright 2026 The provrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// provrec: ingest provenance records, train the latent-factor model, and
// evaluate or query it from the command line.
//
// Exit codes: 0 ok, 1 bad usage, 2 input failure, 3 internal error.

#include "provrec/provrec.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kInternal = 3 };

/// Shortest decimal that round-trips, used for default values in help text
/// and run metadata.
std::string exact(double v) { return json(v).dump(); }

/// Every option of `cmd` with its effective value, for run metadata.
json flag_set(const CLI::App& cmd) {
  json flags = json::object();
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->get_expected_max() == 0) {
      flags[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      auto values = opt->reduced_results();
      flags[name] = values.size() == 1 ? json(values.front()) : json(values);
    } else {
      flags[name] = opt->get_default_str().empty() ? json(nullptr) : json(opt->get_default_str());
    }
  }
  return flags;
}

json run_metadata(const CLI::App& cmd, std::optional<std::uint64_t> seed) {
  return {{"tool", "provrec"},
          {"version", provrec::kVersion},
          {"command", cmd.get_name()},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"flags", flag_set(cmd)}};
}

/// Run metadata as a single '#'-prefixed comment line for delimited outputs.
std::string comment_line(const json& run) { return "provrec " + run.dump(); }

void emit_table(const std::string& out_path, const std::string& table) {
  if (out_path.empty())
    std::cout << table;
  else
    provrec::io::write_file_atomic(out_path, table);
}

provrec::ConflictPolicy conflict_policy(const std::string& s) {
  auto p = provrec::parse_conflict_policy(s);
  if (!p) throw provrec::InvalidArgument("unknown conflict policy '" + s + "'");
  return *p;
}

struct TrainFlags {
  provrec::TrainConfig config;
  double init_scale = 0.0;  // 0 selects 1/sqrt(rank)
  unsigned jobs = 1;
  std::string conflict = "any-success";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--rank,-k", config.rank, "Latent dimension k")->capture_default_str();
    cmd->add_option("--lambda", config.lambda, "Regularization weight")->default_str(exact(config.lambda));
    cmd->add_option("--max-iterations", config.max_iterations, "Maximum ALS iterations")->capture_default_str();
    cmd->add_option("--tolerance", config.tolerance, "Relative objective decrease for early stop (0 disables)")
        ->default_str(exact(config.tolerance));
    cmd->add_option("--init-scale", init_scale, "Upper bound of the uniform initial factors (0: 1/sqrt(k))")
        ->default_str(exact(init_scale));
    cmd->add_flag("--weighted-lambda", config.weighted_lambda, "Scale lambda by each row's observation count");
    cmd->add_option("--conflict-policy", conflict, "any-success | majority | latest-timestamp")->capture_default_str();
    cmd->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  }

  provrec::TrainConfig resolved(std::uint64_t seed) const {
    auto c = config;
    c.seed = seed;
    if (init_scale != 0.0) c.init_scale = init_scale;
    c.validate();
    return c;
  }
};

std::string fmt(double v) { return provrec::format_score(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipeline/dataset execution recommender built on execution provenance"};
  app.set_version_flag("--version", provrec::kVersion);
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Turn provenance records and dataset manifests into triplets");
  std::string records_path, manifests_path, triplets_out, report_out, matrix_out;
  std::string tie_policy = "emit-all", ingest_conflict = "any-success";
  bool with_timestamps = false;
  ingest->add_option("--records", records_path, "Line-delimited JSON provenance records")->required();
  ingest->add_option("--manifests", manifests_path, "Manifest table with header dataset_id,hash")->required();
  ingest->add_option("--out", triplets_out, "Triplets output (pipeline_id,dataset_id,outcome)")->required();
  ingest->add_option("--report", report_out, "Attribution report output (default: <out>.report.json)");
  ingest->add_option("--tie-policy", tie_policy, "emit-all | emit-none")->capture_default_str();
  ingest->add_flag("--with-timestamps", with_timestamps, "Add a timestamp column to the triplets");
  ingest->add_option("--matrix-out", matrix_out, "Also write the aggregated utility matrix");
  ingest->add_option("--conflict-policy", ingest_conflict, "Used with --matrix-out")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Fit the latent-factor model by alternating least squares");
  std::string train_matrix, model_out;
  std::uint64_t train_seed = 42;
  TrainFlags train_flags;
  train->add_option("--matrix", train_matrix, "Utility matrix (pipeline_id,dataset_id,rating)")->required();
  train->add_option("--out", model_out, "Model output")->required();
  train->add_option("--seed", train_seed, "Random seed")->capture_default_str();
  train_flags.add_to(train);

  // predict
  auto* predict = app.add_subcommand("predict", "Score pipeline/dataset pairs with a trained model");
  std::string predict_model, predict_pipeline, predict_dataset, predict_out;
  double predict_threshold = provrec::kDefaultThreshold;
  predict->add_option("--model", predict_model, "Trained model")->required();
  predict->add_option("--pipeline", predict_pipeline, "Restrict to one pipeline");
  predict->add_option("--dataset", predict_dataset, "Restrict to one dataset");
  predict->add_option("--threshold", predict_threshold, "Rounding threshold")->default_str(exact(predict_threshold));
  predict->add_option("--out", predict_out, "Write the table here instead of standard output");

  // recommend
  auto* recommend = app.add_subcommand("recommend", "Rank pipelines for a dataset, or datasets for a pipeline");
  std::string rec_model, rec_dataset, rec_pipeline, rec_out;
  std::size_t top_n = 10;
  double rec_threshold = provrec::kDefaultThreshold;
  recommend->add_option("--model", rec_model, "Trained model")->required();
  auto* rec_d = recommend->add_option("--dataset", rec_dataset, "Recommend pipelines for this dataset");
  auto* rec_p = recommend->add_option("--pipeline", rec_pipeline, "Recommend datasets for this pipeline");
  rec_d->excludes(rec_p);
  recommend->add_option("--top-n", top_n, "Maximum number of results")->capture_default_str();
  recommend->add_option("--threshold", rec_threshold, "Minimum score to recommend")->default_str(exact(rec_threshold));
  recommend->add_option("--out", rec_out, "Write the table here instead of standard output");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "k-fold cross validation, ROC/AUC and expert baseline");
  std::string eval_matrix, survey_path, eval_out, roc_out, baseline_roc_out, scores_out;
  std::size_t k_folds = 10;
  std::uint64_t eval_seed = 42;
  std::vector<double> eval_thresholds;
  bool no_stratify = false;
  TrainFlags eval_flags;
  evaluate->add_option("--matrix", eval_matrix, "Utility matrix")->required();
  evaluate->add_option("--survey", survey_path,
                       "Expert survey (pipeline_id,dataset_id,expert_id,prediction,confidence)");
  evaluate->add_option("--out", eval_out, "Evaluation report output (JSON)")->required();
  evaluate->add_option("--roc-out", roc_out, "Pooled ROC table output");
  evaluate->add_option("--baseline-roc-out", baseline_roc_out, "Expert baseline ROC table output");
  evaluate->add_option("--scores-out", scores_out, "Held-out scores output (score,label,...)");
  evaluate->add_option("--k-folds", k_folds, "Number of folds")->capture_default_str();
  evaluate->add_option("--seed", eval_seed, "Seed for fold assignment and training")->capture_default_str();
  evaluate->add_option("--thresholds", eval_thresholds, "Threshold sweep (default: every distinct score)")
      ->delimiter(',');
  evaluate->add_flag("--no-stratify", no_stratify, "Plain random folds instead of rating-stratified ones");
  eval_flags.add_to(evaluate);

  // roc
  auto* roc = app.add_subcommand("roc", "ROC curve and AUC of a scored table");
  std::string roc_scores, roc_table_out;
  std::vector<double> roc_thresholds;
  roc->add_option("--scores", roc_scores, "Table whose first columns are score,label")->required();
  roc->add_option("--thresholds", roc_thresholds, "Threshold sweep (default: every distinct score)")->delimiter(',');
  roc->add_option("--out", roc_table_out, "Write the ROC table here instead of standard output");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a block-structured synthetic utility matrix");
  provrec::SyntheticParams synth_params;
  std::string synth_out, truth_out;
  synth->add_option("--pipelines", synth_params.n_pipelines, "Number of pipelines")->capture_default_str();
  synth->add_option("--datasets", synth_params.n_datasets, "Number of datasets")->capture_default_str();
  synth->add_option("--blocks", synth_params.n_blocks, "Number of compatibility blocks")->capture_default_str();
  synth->add_option("--density", synth_params.density, "Observed fraction of cells")
      ->default_str(exact(synth_params.density));
  synth->add_option("--noise", synth_params.noise_rate, "Label flip probability")
      ->default_str(exact(synth_params.noise_rate));
  synth->add_option("--seed", synth_params.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Matrix output (a .meta.json sidecar is written next to it)")->required();
  synth->add_option("--truth-out", truth_out, "Block assignments output (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest) {
      provrec::TiePolicy policy;
      if (tie_policy == "emit-all")
        policy = provrec::TiePolicy::emit_all;
      else if (tie_policy == "emit-none")
        policy = provrec::TiePolicy::emit_none;
      else
        throw provrec::InvalidArgument("unknown tie policy '" + tie_policy + "'");
      const auto conflict = conflict_policy(ingest_conflict);
      const auto run = run_metadata(*ingest, std::nullopt);

      auto parsed = provrec::parse_records(provrec::io::read_file(records_path));
      auto manifests = provrec::parse_manifests(provrec::io::read_file(manifests_path), manifests_path);
      auto batch = provrec::to_triplets(parsed.records, manifests, policy);
      batch.report.rejected = parsed.rejected.size();
      batch.report.rejections = parsed.rejected;

      provrec::io::write_file_atomic(triplets_out,
                                     provrec::format_triplets(batch.triplets, with_timestamps, comment_line(run)));
      auto report = provrec::report_to_json(batch.report);
      report["run"] = run;
      provrec::io::write_file_atomic(report_out.empty() ? triplets_out + ".report.json" : report_out,
                                     report.dump(2) + "\n");
      if (!matrix_out.empty())
        provrec::save_matrix(matrix_out, provrec::aggregate(batch.triplets, conflict), run, comment_line(run));
      const auto& r = batch.report;
      std::cout << "records " << r.records << "\nattributed " << r.attributed << "\nunattributable " << r.unattributable
                << "\ntied " << r.tied << "\nrejected " << r.rejected << "\n";
      if (r.records == 0) std::cout << "no provenance records found\n";
    } else if (*train) {
      const auto config = train_flags.resolved(train_seed);
      const auto run = run_metadata(*train, train_seed);
      auto matrix = provrec::load_matrix(train_matrix, conflict_policy(train_flags.conflict));
      auto model = provrec::als_fit(matrix, config, train_flags.jobs);
      provrec::save_model(model_out, model, run);
      std::cout << "iterations " << model.iterations << "\nobjective " << fmt(model.trace.back()) << "\n";
    } else if (*predict) {
      const auto run = run_metadata(*predict, std::nullopt);
      auto model = provrec::load_model(predict_model);
      std::vector<std::size_t> rows, cols;
      if (!predict_pipeline.empty())
        rows.push_back(provrec::pipeline_row(model, predict_pipeline));
      else
        for (std::size_t u = 0; u < model.pipelines.size(); ++u) rows.push_back(u);
      if (!predict_dataset.empty())
        cols.push_back(provrec::dataset_column(model, predict_dataset));
      else
        for (std::size_t i = 0; i < model.datasets.size(); ++i) cols.push_back(i);
      std::string table = provrec::csv::comment_block(comment_line(run));
      table += "pipeline_id,dataset_id,score,predicted_outcome,cold_start\n";
      for (auto u : rows)
        for (auto i : cols) {
          auto p = provrec::predict_raw(model, u, i);
          table += provrec::csv::escape(model.pipelines[u]) + ',' + provrec::csv::escape(model.datasets[i]) + ',' +
                   fmt(p.score) + ',' +
                   std::to_string(provrec::rating_value(provrec::classify(p.score, predict_threshold))) + ',' +
                   (p.cold_start ? "true" : "false") + '\n';
        }
      emit_table(predict_out, table);
    } else if (*recommend) {
      if (rec_dataset.empty() == rec_pipeline.empty())
        throw provrec::InvalidArgument("recommend needs exactly one of --dataset or --pipeline");
      const auto run = run_metadata(*recommend, std::nullopt);
      auto model = provrec::load_model(rec_model);
      auto recs = rec_dataset.empty() ? provrec::recommend_datasets(model, rec_pipeline, top_n, rec_threshold)
                                      : provrec::recommend_pipelines(model, rec_dataset, top_n, rec_threshold);
      emit_table(rec_out, provrec::format_recommendations(recs, comment_line(run)));
    } else if (*evaluate) {
      provrec::EvaluationConfig config;
      config.train = eval_flags.resolved(eval_seed);
      config.k_folds = k_folds;
      config.seed = eval_seed;
      config.thresholds = eval_thresholds;
      config.stratified = !no_stratify;
      if (k_folds == 0) throw provrec::InvalidArgument("--k-folds must be at least 1");
      const auto run = run_metadata(*evaluate, eval_seed);

      auto matrix = provrec::load_matrix(eval_matrix, conflict_policy(eval_flags.conflict));
      std::optional<provrec::ExpertSurvey> survey;
      if (!survey_path.empty()) survey = provrec::parse_survey(provrec::io::read_file(survey_path), survey_path);
      auto report = provrec::evaluate(matrix, config, survey ? &*survey : nullptr, eval_flags.jobs);

      provrec::io::write_file_atomic(eval_out, provrec::report_to_json(report, run).dump(2) + "\n");
      const auto comment = comment_line(run);
      if (!roc_out.empty()) provrec::io::write_file_atomic(roc_out, provrec::format_roc(report.cv.roc, comment));
      if (!baseline_roc_out.empty()) {
        if (!report.baseline) throw provrec::InvalidArgument("--baseline-roc-out requires --survey");
        provrec::io::write_file_atomic(baseline_roc_out, provrec::format_roc(report.baseline->roc, comment));
      }
      if (!scores_out.empty())
        provrec::io::write_file_atomic(scores_out, provrec::format_held_out(matrix, report.cv, comment));
      std::cout << "auc " << fmt(report.cv.auc) << "\nmean_fold_auc " << fmt(report.mean_fold_auc()) << "\n";
      if (report.baseline) std::cout << "baseline_auc " << fmt(report.baseline->auc) << "\n";
      if (report.confidence) std::cout << "confidence_p_value " << fmt(report.confidence->p_value) << "\n";
    } else if (*roc) {
      const auto run = run_metadata(*roc, std::nullopt);
      auto scored = provrec::parse_scored(provrec::io::read_file(roc_scores), roc_scores);
      auto points = roc_thresholds.empty() ? provrec::roc_curve(scored) : provrec::roc_curve(scored, roc_thresholds);
      emit_table(roc_table_out, provrec::format_roc(points, comment_line(run)));
      std::cerr << "auc " << fmt(provrec::auc(points)) << "\n";
    } else if (*synth) {
      const auto run = run_metadata(*synth, synth_params.seed);
      auto generated = provrec::generate_synthetic(synth_params);
      provrec::save_matrix(synth_out, generated.matrix, run, comment_line(run));
      if (!truth_out.empty()) {
        json truth = {{"pipeline_block", generated.pipeline_block},
                      {"dataset_block", generated.dataset_block},
                      {"flipped", generated.flipped},
                      {"run", run}};
        provrec::io::write_file_atomic(truth_out, truth.dump(2) + "\n");
      }
      std::cout << "entries " << generated.matrix.size() << "\nflipped " << generated.flipped << "\n";
    }
  } catch (const provrec::InvalidArgument& e) {
    std::cerr << "provrec: " << e.what() << "\n";
    return kUsage;
  } catch (const provrec::IoError& e) {
    std::cerr << "provrec: " << e.what() << "\n";
    return kInput;
  } catch (const provrec::ParseError& e) {
    std::cerr << "provrec: " << e.what() << "\n";
    return kInput;
  } catch (const provrec::UnknownId& e) {
    std::cerr << "provrec: " << e.what() << "\n";
    return kInput;
  } catch (const provrec::DataError& e) {
    std::cerr << "provrec: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "provrec: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
