#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "structeval/cache.hpp"
#include "structeval/estimate.hpp"
#include "structeval/infer.hpp"
#include "structeval/intervene.hpp"
#include "structeval/model.hpp"
#include "structeval/task_config.hpp"

namespace structeval {

// How to reach the evaluated model (or the rephrase agent): either a mock
// spec ("deep" | "surface" | "gibberish" | "scripted:PATH") or an HTTP
// endpoint plus model name.
struct ModelSpec {
  std::string mock;
  std::string endpoint;
  std::string model_name;
  std::string api_key_env = "MODEL_API_KEY";
};

// Builds the client. Mocks that need context get it: the surface learner
// memorizes the dataset, the deep thinker reads the task's core-token rule.
std::shared_ptr<ModelClient> make_model(const ModelSpec& spec,
                                        const std::vector<Sample>& samples,
                                        const MaskTaskConfig& core_rule,
                                        uint64_t seed);

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path task_config;
  std::optional<Strategy> strategy; // overrides the task config when set
  ModelSpec model;
  ModelSpec agent; // rephrase agent; falls back to `model` when empty
  std::filesystem::path cache_dir;
  std::filesystem::path out_dir;
  std::optional<int> reps; // overrides the task config when set
  uint64_t seed = 0;
  int concurrency = 4;
  int bootstrap = 1000;
  double ci_level = 0.95;
};

struct PipelineArtifacts {
  std::filesystem::path origin_outcomes;
  std::filesystem::path interventions_t1;
  std::filesystem::path interventions_t0;
  std::filesystem::path t1_outcomes;
  std::filesystem::path t0_outcomes;
  std::filesystem::path estimate;
};

PipelineArtifacts pipeline_artifact_paths(const std::filesystem::path& out_dir);

struct PipelineResult {
  EffectEstimate estimate;
  FilterResult stage1;
  size_t n_skipped = 0;
  PipelineArtifacts artifacts;
};

// End-to-end run: initial inference, correct-sample filtering, paired
// intervention generation, re-inference on both arms, effect estimation.
// Every artifact is written to out_dir; reruns with a warm cache are
// byte-identical.
PipelineResult run_pipeline(const RunConfig& cfg);

} // namespace structeval
