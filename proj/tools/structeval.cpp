#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "structeval/cache.hpp"
#include "structeval/errors.hpp"
#include "structeval/estimate.hpp"
#include "structeval/infer.hpp"
#include "structeval/intervene.hpp"
#include "structeval/perturb.hpp"
#include "structeval/pipeline.hpp"
#include "structeval/rng.hpp"
#include "structeval/scm.hpp"
#include "structeval/svg.hpp"

namespace {

using namespace structeval;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitUpstream = 3;
constexpr int kExitUndefined = 4;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Transport:
      return kExitUpstream;
    case ErrorKind::Undefined:
      return kExitUndefined;
    default:
      return kExitConfig;
  }
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << content;
}

std::optional<Strategy> parse_strategy_flag(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return strategy_from_string(value);
}

void print_estimate(const EffectEstimate& e) {
  std::cout << "model=" << e.model << " dataset=" << e.dataset
            << " strategy=" << e.strategy << "\n";
  std::cout << "  accuracy=" << e.accuracy << " (n_correct=" << e.n_correct << "/"
            << e.n_origin << ")\n";
  if (!e.defined) {
    std::cout << "  estimate undefined: no correctly answered samples or an "
                 "empty treatment arm\n";
    return;
  }
  std::cout << "  te=" << e.te << " aice=" << e.aice << " adce=" << e.adce << "\n";
  std::cout << "  alpha=" << e.alpha << " beta=" << e.beta;
  if (e.ps) std::cout << " ps=" << *e.ps;
  if (e.pn) std::cout << " pn=" << *e.pn;
  std::cout << (e.monotone ? "" : "  [warning: non-monotone table]") << "\n";
  if (e.ci_level) {
    std::cout << "  ci(" << *e.ci_level << "):";
    for (const auto& [name, interval] : e.ci) {
      std::cout << " " << name << "=[" << interval.low << ", " << interval.high
                << "]";
    }
    std::cout << "\n";
  }
}

// --- pipeline ---------------------------------------------------------------

struct PipelineArgs {
  RunConfig run;
  std::string strategy_flag;
};

int cmd_pipeline(PipelineArgs& args) {
  args.run.strategy = parse_strategy_flag(args.strategy_flag);
  PipelineResult result = run_pipeline(args.run);
  std::cout << "stage 1: accuracy=" << result.stage1.accuracy
            << " correct=" << result.stage1.n_correct << "/" << result.stage1.n_total
            << " failed=" << result.stage1.n_failed << "\n";
  if (result.n_skipped > 0) {
    std::cout << "stage 2: skipped " << result.n_skipped
              << " sample/rep combinations (preconditions)\n";
  }
  print_estimate(result.estimate);
  std::cout << "artifacts in " << result.artifacts.estimate.parent_path().string()
            << "\n";
  return result.estimate.defined ? kExitOk : kExitUndefined;
}

// --- intervene ---------------------------------------------------------------

struct InterveneArgs {
  std::string dataset;
  std::string task_config;
  std::string strategy_flag;
  std::string origin_outcomes;
  std::string out_dir;
  ModelSpec agent;
  int reps = 0;
  uint64_t seed = 0;
};

int cmd_intervene(InterveneArgs& args) {
  std::vector<Sample> samples = read_dataset(args.dataset);
  TaskConfig task = load_task_config(args.task_config);
  if (auto s = parse_strategy_flag(args.strategy_flag)) task.strategy = *s;
  if (args.reps > 0) task.reps = args.reps;

  std::vector<Sample> pool = samples;
  if (!args.origin_outcomes.empty()) {
    pool = filter_correct(read_outcomes(args.origin_outcomes), samples).correct;
  }

  std::shared_ptr<ModelClient> agent;
  if (task.strategy == Strategy::Rephrase) {
    agent = make_model(args.agent, samples, task.mask, derive_seed(args.seed, "agent"));
  }
  InterventionSets sets =
      generate_intervention_sets(pool, task.strategy, task, task.reps, agent.get());

  std::filesystem::path out(args.out_dir);
  write_records(out / "interventions_t1.jsonl", sets.t1);
  write_records(out / "interventions_t0.jsonl", sets.t0);
  std::cout << "wrote " << sets.t1.size() << " T1 + " << sets.t0.size()
            << " T0 records";
  if (!sets.skipped.empty()) std::cout << " (skipped " << sets.skipped.size() << ")";
  std::cout << "\n";
  for (const SkippedSample& s : sets.skipped) {
    std::cerr << "skipped " << s.id << " rep " << s.rep_index << ": " << s.reason
              << "\n";
  }
  return kExitOk;
}

// --- infer -------------------------------------------------------------------

struct InferArgs {
  std::string dataset;
  std::string task_config;
  std::string records;
  std::string stage = "origin";
  std::string origin_outcomes;
  ModelSpec model;
  std::string cache_dir;
  std::string out_file;
  int concurrency = 4;
  uint64_t seed = 0;
};

int cmd_infer(InferArgs& args) {
  std::vector<Sample> samples = read_dataset(args.dataset);
  TaskConfig task = load_task_config(args.task_config);
  Stage stage = stage_from_string(args.stage);

  std::vector<StageItem> items;
  if (stage == Stage::Origin) {
    items = stage_items_from_samples(samples);
  } else {
    if (args.records.empty() || args.origin_outcomes.empty()) {
      throw Error(ErrorKind::Config,
                  "t1/t0 stages need --records and --origin-outcomes");
    }
    items = stage_items_from_interventions(read_interventions(args.records), samples,
                                           read_outcomes(args.origin_outcomes));
  }

  auto cache = std::make_shared<ResponseCache>(args.cache_dir);
  CachedModel model(
      make_model(args.model, samples, task.mask, derive_seed(args.seed, "model")),
      cache);
  std::vector<OutcomeRecord> outcomes =
      run_stage(items, model, ExtractionPolicy{task.answer_pattern},
                task.prompt_template, args.concurrency);
  write_records(args.out_file, outcomes);
  std::cout << "wrote " << outcomes.size() << " outcomes (upstream calls: "
            << model.upstream_calls() << ")\n";
  return kExitOk;
}

// --- estimate ------------------------------------------------------------------

struct EstimateArgs {
  std::string d_t1;
  std::string d_t0;
  std::string t1_outcomes;
  std::string t0_outcomes;
  std::string origin_outcomes;
  std::string dataset;
  std::string model_label = "unknown";
  std::string out_file;
  int bootstrap = 1000;
  double ci_level = 0.95;
  uint64_t seed = 0;
};

int cmd_estimate(EstimateArgs& args) {
  std::vector<Sample> samples = read_dataset(args.dataset);
  std::vector<InterventionRecord> t1_records = read_interventions(args.d_t1);
  std::vector<InterventionRecord> t0_records = read_interventions(args.d_t0);
  std::vector<OutcomeRecord> t1_outcomes = read_outcomes(args.t1_outcomes);
  std::vector<OutcomeRecord> t0_outcomes = read_outcomes(args.t0_outcomes);
  std::vector<OutcomeRecord> origin_outcomes = read_outcomes(args.origin_outcomes);

  FilterResult stage1 = filter_correct(origin_outcomes, samples);
  std::vector<PairGroup> groups =
      make_pair_groups(t1_records, t0_records, t1_outcomes, t0_outcomes);

  EstimateInputs inputs;
  inputs.model = args.model_label;
  inputs.dataset = std::filesystem::path(args.dataset).filename().string();
  inputs.strategy = t1_records.empty() ? "mask" : to_string(t1_records.front().strategy);
  inputs.accuracy = stage1.accuracy;
  inputs.n_origin = stage1.n_total;
  inputs.n_correct = stage1.n_correct;
  inputs.n_unmatched = stage1.n_unmatched;
  inputs.n_origin_failed = stage1.n_failed;

  EffectEstimate estimate =
      build_estimate(inputs, t1_outcomes, t0_outcomes, groups, args.bootstrap,
                     args.ci_level, derive_seed(args.seed, "estimate"));
  write_records(args.out_file, std::vector<EffectEstimate>{estimate});
  print_estimate(estimate);
  return estimate.defined ? kExitOk : kExitUndefined;
}

// --- perturb -------------------------------------------------------------------

struct PerturbArgs {
  std::string dataset;
  std::string out_file;
  std::string mode = "text";
  double eta = 0.0;
  uint64_t seed = 0;
};

int cmd_perturb(PerturbArgs& args) {
  std::vector<Sample> samples = read_dataset(args.dataset);
  NoiseConfig cfg;
  cfg.eta = args.eta;
  cfg.seed = args.seed;
  if (args.mode == "text") {
    cfg.mode = NoiseMode::Text;
    for (Sample& s : samples) {
      NoiseConfig per = cfg;
      per.seed = derive_seed(cfg.seed, s.id);
      s.question = text_noise(s.question, per);
    }
  } else if (args.mode == "label") {
    cfg.mode = NoiseMode::Label;
    samples = label_noise(samples, cfg);
  } else {
    throw Error(ErrorKind::Config, "--mode must be text or label");
  }
  write_records(args.out_file, samples);
  std::cout << "wrote " << samples.size() << " perturbed samples (mode="
            << args.mode << ", eta=" << args.eta << ")\n";
  return kExitOk;
}

// --- synthetic -------------------------------------------------------------------

struct SyntheticArgs {
  std::string c1_sweep = "0.2:2.0:0.2";
  double c2 = 1.0;
  int64_t train_n = 100000;
  int64_t test_n = 10000;
  uint64_t seed = 0;
  std::string out_dir;
  bool svg = false;
};

int cmd_synthetic(SyntheticArgs& args) {
  SweepConfig cfg;
  cfg.c2 = args.c2;
  cfg.n_train = args.train_n;
  cfg.n_test = args.test_n;
  cfg.seed = args.seed;
  {
    std::string spec = args.c1_sweep;
    size_t a = spec.find(':');
    size_t b = spec.rfind(':');
    if (a == std::string::npos || b == a) {
      throw Error(ErrorKind::Config, "--c1-sweep must look like A:B:STEP");
    }
    try {
      cfg.c1_begin = std::stod(spec.substr(0, a));
      cfg.c1_end = std::stod(spec.substr(a + 1, b - a - 1));
      cfg.c1_step = std::stod(spec.substr(b + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, "--c1-sweep must look like A:B:STEP");
    }
  }

  SweepResult result = run_sweep(cfg);
  std::filesystem::path out(args.out_dir);
  write_text(out / "sweep.csv", sweep_to_csv(result));
  std::cout << "wrote " << (out / "sweep.csv").string() << " (" << result.rows.size()
            << " sweep points)\n";

  if (args.svg) {
    std::vector<double> c1;
    for (const SweepRow& row : result.rows) c1.push_back(row.c1);
    SvgChart chart("Normalized causal effects on synthetic data", "c1",
                   "normalized effect");
    chart.add_line("true CE of d (AME)", c1, result.norm_true_ce_d);
    chart.add_line("estimated direct effect", c1, result.norm_adce);
    chart.add_line("true CE of s (AME)", c1, result.norm_true_ce_s);
    chart.add_line("estimated indirect effect", c1, result.norm_aice);
    write_text(out / "sweep.svg", chart.render());
    std::cout << "wrote " << (out / "sweep.svg").string() << "\n";
  }
  return kExitOk;
}

// --- report -------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> estimates;
  std::string out_dir;
  bool svg = false;
};

int cmd_report(ReportArgs& args) {
  std::vector<EffectEstimate> estimates;
  for (const std::string& path : args.estimates) {
    for (EffectEstimate& e : read_estimates(path)) estimates.push_back(std::move(e));
  }
  if (estimates.empty()) {
    throw Error(ErrorKind::Config, "no estimate files given");
  }

  std::string csv = "model,dataset,strategy,accuracy,te,aice,adce,defined\n";
  std::vector<std::pair<double, double>> points;
  for (const EffectEstimate& e : estimates) {
    csv += e.model + "," + e.dataset + "," + e.strategy + "," +
           std::to_string(e.accuracy) + "," + std::to_string(e.te) + "," +
           std::to_string(e.aice) + "," + std::to_string(e.adce) + "," +
           (e.defined ? "true" : "false") + "\n";
    if (e.defined) points.emplace_back(e.accuracy, e.adce);
  }
  std::filesystem::path out(args.out_dir);
  write_text(out / "report.csv", csv);
  std::cout << csv;

  if (points.size() < 2) {
    throw Error(ErrorKind::Degenerate,
                "regression needs >= 2 defined estimates (got " +
                    std::to_string(points.size()) + ")");
  }
  RegressionFit fit = regress_accuracy_adce(points);
  std::cout << "accuracy->adce regression: slope=" << fit.slope
            << " intercept=" << fit.intercept << " r2=" << fit.r2
            << " n=" << fit.n_points << "\n";
  write_text(out / "regression.csv",
             "slope,intercept,r2,n_points\n" + std::to_string(fit.slope) + "," +
                 std::to_string(fit.intercept) + "," + std::to_string(fit.r2) +
                 "," + std::to_string(fit.n_points) + "\n");

  if (args.svg) {
    std::vector<double> xs, ys, line_x, line_y;
    double x_min = points.front().first, x_max = points.front().first;
    for (const auto& [x, y] : points) {
      xs.push_back(x);
      ys.push_back(y);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
    line_x = {x_min, x_max};
    line_y = {fit.intercept + fit.slope * x_min, fit.intercept + fit.slope * x_max};
    SvgChart chart("Accuracy vs direct effect", "accuracy", "adce");
    chart.add_scatter("runs", xs, ys);
    chart.add_line("ols fit", line_x, line_y);
    write_text(out / "report.svg", chart.render());
    std::cout << "wrote " << (out / "report.svg").string() << "\n";
  }
  return kExitOk;
}

void add_model_flags(CLI::App* cmd, ModelSpec& spec) {
  cmd->add_option("--model", spec.model_name, "Model name sent to the endpoint");
  cmd->add_option("--endpoint", spec.endpoint,
                  "Chat-completion endpoint URL (http[s]://host[:port]/path)");
  cmd->add_option("--mock", spec.mock,
                  "Mock model: deep | surface | gibberish | scripted:PATH");
  cmd->add_option("--api-key-env", spec.api_key_env,
                  "Environment variable holding the API key")
      ->default_val("MODEL_API_KEY");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal evaluation of deep vs. surface structure reliance in "
               "black-box language models"};
  app.require_subcommand(1);

  PipelineArgs pipeline_args;
  auto* pipeline = app.add_subcommand(
      "pipeline", "Run the full four-stage evaluation end to end");
  pipeline->add_option("--dataset", pipeline_args.run.dataset, "Dataset JSONL file")
      ->required();
  pipeline->add_option("--task-config", pipeline_args.run.task_config,
                       "Task config file")->required();
  pipeline->add_option("--strategy", pipeline_args.strategy_flag,
                       "mask | rephrase | replace | swap (overrides task config)");
  add_model_flags(pipeline, pipeline_args.run.model);
  pipeline->add_option("--agent-model", pipeline_args.run.agent.model_name,
                       "Rephrase agent model name");
  pipeline->add_option("--agent-endpoint", pipeline_args.run.agent.endpoint,
                       "Rephrase agent endpoint (defaults to the evaluated model)");
  pipeline->add_option("--agent-mock", pipeline_args.run.agent.mock,
                       "Rephrase agent mock spec");
  pipeline->add_option("--cache", pipeline_args.run.cache_dir, "Response cache directory");
  pipeline->add_option("--out", pipeline_args.run.out_dir, "Artifact directory")
      ->required();
  int pipeline_reps = 0;
  pipeline->add_option("--reps", pipeline_reps, "Interventions per sample (overrides task config)");
  pipeline->add_option("--seed", pipeline_args.run.seed, "Run seed")->required();
  pipeline->add_option("--concurrency", pipeline_args.run.concurrency,
                       "In-flight request limit")->default_val(4);
  pipeline->add_option("--bootstrap", pipeline_args.run.bootstrap,
                       "Bootstrap resamples (0 disables intervals)")->default_val(1000);
  pipeline->add_option("--ci-level", pipeline_args.run.ci_level,
                       "Confidence level")->default_val(0.95);

  InterveneArgs intervene_args;
  auto* intervene = app.add_subcommand(
      "intervene", "Generate paired T1/T0 intervention records");
  intervene->add_option("--dataset", intervene_args.dataset, "Dataset JSONL file")
      ->required();
  intervene->add_option("--task-config", intervene_args.task_config, "Task config file")
      ->required();
  intervene->add_option("--strategy", intervene_args.strategy_flag,
                        "mask | rephrase | replace | swap");
  intervene->add_option("--origin-outcomes", intervene_args.origin_outcomes,
                        "Stage-1 outcomes; restricts generation to correct samples");
  intervene->add_option("--out", intervene_args.out_dir, "Output directory")->required();
  intervene->add_option("--reps", intervene_args.reps, "Interventions per sample");
  intervene->add_option("--seed", intervene_args.seed, "Run seed")->default_val(0);
  add_model_flags(intervene, intervene_args.agent);

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Query the model over one stage");
  infer->add_option("--dataset", infer_args.dataset, "Dataset JSONL file")->required();
  infer->add_option("--task-config", infer_args.task_config, "Task config file")
      ->required();
  infer->add_option("--records", infer_args.records,
                    "Intervention records (t1/t0 stages)");
  infer->add_option("--stage", infer_args.stage, "origin | t1 | t0")
      ->default_val("origin");
  infer->add_option("--origin-outcomes", infer_args.origin_outcomes,
                    "Origin outcomes (t1/t0 stages)");
  add_model_flags(infer, infer_args.model);
  infer->add_option("--cache", infer_args.cache_dir, "Response cache directory")
      ->required();
  infer->add_option("--out", infer_args.out_file, "Output outcomes file")->required();
  infer->add_option("--concurrency", infer_args.concurrency, "In-flight request limit")
      ->default_val(4);
  infer->add_option("--seed", infer_args.seed, "Run seed")->default_val(0);

  EstimateArgs estimate_args;
  auto* estimate = app.add_subcommand(
      "estimate", "Compute effect estimates from stage artifacts");
  estimate->add_option("--d-t1", estimate_args.d_t1, "T1 intervention records")
      ->required();
  estimate->add_option("--d-t0", estimate_args.d_t0, "T0 intervention records")
      ->required();
  estimate->add_option("--t1-outcomes", estimate_args.t1_outcomes, "T1 outcomes")
      ->required();
  estimate->add_option("--t0-outcomes", estimate_args.t0_outcomes, "T0 outcomes")
      ->required();
  estimate->add_option("--origin-outcomes", estimate_args.origin_outcomes,
                       "Origin outcomes")->required();
  estimate->add_option("--dataset", estimate_args.dataset, "Dataset JSONL file")
      ->required();
  estimate->add_option("--model", estimate_args.model_label, "Model label");
  estimate->add_option("--out", estimate_args.out_file, "Output estimate file")
      ->required();
  estimate->add_option("--bootstrap", estimate_args.bootstrap,
                       "Bootstrap resamples (0 disables intervals)")->default_val(1000);
  estimate->add_option("--ci-level", estimate_args.ci_level, "Confidence level")
      ->default_val(0.95);
  estimate->add_option("--seed", estimate_args.seed, "Run seed")->default_val(0);

  PerturbArgs perturb_args;
  auto* perturb = app.add_subcommand("perturb", "Inject text or label noise");
  perturb->add_option("--dataset", perturb_args.dataset, "Dataset JSONL file")
      ->required();
  perturb->add_option("--out", perturb_args.out_file, "Output dataset file")
      ->required();
  perturb->add_option("--eta", perturb_args.eta, "Noise level in [0, 1]")->required();
  perturb->add_option("--mode", perturb_args.mode, "text | label")->required();
  perturb->add_option("--seed", perturb_args.seed, "Run seed")->required();

  SyntheticArgs synthetic_args;
  auto* synthetic = app.add_subcommand(
      "synthetic", "Validate the estimators against the synthetic oracle world");
  synthetic->add_option("--c1-sweep", synthetic_args.c1_sweep, "Sweep grid A:B:STEP")
      ->default_val("0.2:2.0:0.2");
  synthetic->add_option("--c2", synthetic_args.c2, "Surface weight")->default_val(1.0);
  synthetic->add_option("--train-n", synthetic_args.train_n, "Training samples")
      ->default_val(100000);
  synthetic->add_option("--test-n", synthetic_args.test_n, "Test samples")
      ->default_val(10000);
  synthetic->add_option("--seed", synthetic_args.seed, "Run seed")->required();
  synthetic->add_option("--out", synthetic_args.out_dir, "Output directory")
      ->required();
  synthetic->add_flag("--svg", synthetic_args.svg, "Also write a line chart");

  ReportArgs report_args;
  auto* report = app.add_subcommand(
      "report", "Tabulate estimates and fit the accuracy-effect regression");
  report->add_option("estimates", report_args.estimates, "Estimate files")
      ->required()->expected(-1);
  report->add_option("--out", report_args.out_dir, "Output directory")->required();
  report->add_flag("--svg", report_args.svg, "Also write a scatter chart");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pipeline->parsed()) {
      if (pipeline_reps > 0) pipeline_args.run.reps = pipeline_reps;
      return cmd_pipeline(pipeline_args);
    }
    if (intervene->parsed()) return cmd_intervene(intervene_args);
    if (infer->parsed()) return cmd_infer(infer_args);
    if (estimate->parsed()) return cmd_estimate(estimate_args);
    if (perturb->parsed()) return cmd_perturb(perturb_args);
    if (synthetic->parsed()) return cmd_synthetic(synthetic_args);
    if (report->parsed()) return cmd_report(report_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
