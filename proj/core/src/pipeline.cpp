#include "structeval/pipeline.hpp"

#include "structeval/http_model.hpp"
#include "structeval/mock_models.hpp"
#include "structeval/rng.hpp"

namespace structeval {

std::shared_ptr<ModelClient> make_model(const ModelSpec& spec,
                                        const std::vector<Sample>& samples,
                                        const MaskTaskConfig& core_rule,
                                        uint64_t seed) {
  if (!spec.mock.empty()) {
    if (spec.mock == "deep") {
      MaskTaskConfig rule = core_rule;
      if (!rule.has_core_rule()) {
        rule.all_digit_tokens = true;
        rule.core_word_pool = {"times", "plus", "minus"};
      }
      return std::make_shared<DeepThinkerModel>(rule, seed);
    }
    if (spec.mock == "surface") {
      return std::make_shared<SurfaceLearnerModel>(samples, seed);
    }
    if (spec.mock == "gibberish") {
      return std::make_shared<GibberishModel>(seed);
    }
    if (spec.mock.rfind("scripted:", 0) == 0) {
      return ScriptedModel::from_file(spec.mock.substr(9));
    }
    throw Error(ErrorKind::Config, "unknown mock spec '" + spec.mock + "'");
  }
  if (spec.endpoint.empty()) {
    throw Error(ErrorKind::Config, "either --mock or --endpoint is required");
  }
  HttpModelConfig http;
  http.endpoint = spec.endpoint;
  http.model = spec.model_name.empty() ? "default" : spec.model_name;
  http.api_key_env = spec.api_key_env;
  return std::make_shared<HttpChatModel>(http);
}

PipelineArtifacts pipeline_artifact_paths(const std::filesystem::path& out_dir) {
  return {
      out_dir / "origin_outcomes.jsonl", out_dir / "interventions_t1.jsonl",
      out_dir / "interventions_t0.jsonl", out_dir / "t1_outcomes.jsonl",
      out_dir / "t0_outcomes.jsonl",      out_dir / "estimate.jsonl",
  };
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  std::vector<Sample> samples = read_dataset(cfg.dataset);
  TaskConfig task = load_task_config(cfg.task_config);
  if (cfg.strategy) task.strategy = *cfg.strategy;
  if (cfg.reps) task.reps = *cfg.reps;
  if (task.prompt_template.empty()) {
    throw Error(ErrorKind::Config, "task config has no prompt_template");
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  PipelineArtifacts artifacts = pipeline_artifact_paths(cfg.out_dir);

  auto cache = std::make_shared<ResponseCache>(
      cfg.cache_dir.empty() ? cfg.out_dir / "cache" : cfg.cache_dir);
  std::shared_ptr<ModelClient> raw_model =
      make_model(cfg.model, samples, task.mask, derive_seed(cfg.seed, "model"));
  CachedModel model(raw_model, cache);

  ExtractionPolicy policy{task.answer_pattern};

  // Stage 1: initial inference on the full dataset, then keep what the model
  // answered correctly.
  std::vector<OutcomeRecord> origin_outcomes = run_stage(
      stage_items_from_samples(samples), model, policy, task.prompt_template,
      cfg.concurrency);
  write_records(artifacts.origin_outcomes, origin_outcomes);
  FilterResult stage1 = filter_correct(origin_outcomes, samples);

  PipelineResult result;
  result.stage1 = stage1;
  result.artifacts = artifacts;

  EstimateInputs inputs;
  inputs.model = model.identity();
  inputs.dataset = cfg.dataset.filename().string();
  inputs.strategy = to_string(task.strategy);
  inputs.accuracy = stage1.accuracy;
  inputs.n_origin = stage1.n_total;
  inputs.n_correct = stage1.n_correct;
  inputs.n_unmatched = stage1.n_unmatched;
  inputs.n_origin_failed = stage1.n_failed;

  if (stage1.correct.empty()) {
    // Nothing to intervene on; emit an undefined estimate with the accuracy.
    write_records(artifacts.interventions_t1, std::vector<InterventionRecord>{});
    write_records(artifacts.interventions_t0, std::vector<InterventionRecord>{});
    write_records(artifacts.t1_outcomes, std::vector<OutcomeRecord>{});
    write_records(artifacts.t0_outcomes, std::vector<OutcomeRecord>{});
    result.estimate = build_estimate(inputs, {}, {}, {}, 0, cfg.ci_level,
                                     derive_seed(cfg.seed, "estimate"));
    write_records(artifacts.estimate, std::vector<EffectEstimate>{result.estimate});
    return result;
  }

  // Stage 2: paired intervention generation over the correct subset.
  std::shared_ptr<ModelClient> raw_agent = raw_model;
  std::shared_ptr<CachedModel> cached_agent;
  ModelClient* agent = &model;
  if (!cfg.agent.mock.empty() || !cfg.agent.endpoint.empty()) {
    raw_agent = make_model(cfg.agent, samples, task.mask,
                           derive_seed(cfg.seed, "agent"));
    cached_agent = std::make_shared<CachedModel>(raw_agent, cache);
    agent = cached_agent.get();
  }
  InterventionSets sets = generate_intervention_sets(
      stage1.correct, task.strategy, task, task.reps, agent);
  result.n_skipped = sets.skipped.size();
  write_records(artifacts.interventions_t1, sets.t1);
  write_records(artifacts.interventions_t0, sets.t0);

  // Stage 3: re-inference on both treatment arms.
  std::vector<OutcomeRecord> t1_outcomes = run_stage(
      stage_items_from_interventions(sets.t1, samples, origin_outcomes), model,
      policy, task.prompt_template, cfg.concurrency);
  write_records(artifacts.t1_outcomes, t1_outcomes);
  std::vector<OutcomeRecord> t0_outcomes = run_stage(
      stage_items_from_interventions(sets.t0, samples, origin_outcomes), model,
      policy, task.prompt_template, cfg.concurrency);
  write_records(artifacts.t0_outcomes, t0_outcomes);

  // Stage 4: change rates, direct/indirect effects, intervals.
  std::vector<PairGroup> groups =
      make_pair_groups(sets.t1, sets.t0, t1_outcomes, t0_outcomes);
  result.estimate =
      build_estimate(inputs, t1_outcomes, t0_outcomes, groups, cfg.bootstrap,
                     cfg.ci_level, derive_seed(cfg.seed, "estimate"));
  write_records(artifacts.estimate, std::vector<EffectEstimate>{result.estimate});
  return result;
}

} // namespace structeval
