#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace structeval {

// Linear-Gaussian world where both structures are explicit scalars:
//   x ~ N(0,1), d = x + eps_d, s = x + eps_s,
//   y = 1 iff sigmoid(c1*d + c2*s + eps_y) > 0.5.
// Noise scales are standard deviations (0.5 ~ variance 0.25; 1.0 for eps_y).
struct ScmConfig {
  double c1 = 1.0;
  double c2 = 1.0;
  double sigma_d = 0.5;
  double sigma_s = 0.5;
  double sigma_y = 1.0;
  int64_t n_train = 100000;
  int64_t n_test = 10000;
  uint64_t seed = 0;
};

struct ScmSample {
  double x = 0.0;
  double d = 0.0;
  double s = 0.0;
  int y = 0;
};

struct ScmData {
  std::vector<ScmSample> train;
  std::vector<ScmSample> test;
};

ScmData generate_scm(const ScmConfig& cfg);

struct LogisticModel {
  double w_d = 0.0;
  double w_s = 0.0;
  double bias = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;

  double score(double d, double s) const { return w_d * d + w_s * s + bias; }
  double probability(double d, double s) const;
  int predict(double d, double s) const { return probability(d, s) > 0.5 ? 1 : 0; }
};

struct FitOptions {
  double learning_rate = 1.0;
  int max_iterations = 2000;
  double tolerance = 1e-10; // stop when the loss delta falls below this
};

// Mean log-loss and its analytic gradient, exposed separately so the
// finite-difference check can probe arbitrary parameter points.
double logistic_loss(const std::vector<ScmSample>& data, double w_d, double w_s,
                     double bias);
void logistic_gradient(const std::vector<ScmSample>& data, double w_d, double w_s,
                       double bias, double& g_wd, double& g_ws, double& g_bias);

// Full-batch gradient descent with a fixed step; the problem is 3-parameter
// convex so nothing fancier is needed.
LogisticModel fit_logistic(const std::vector<ScmSample>& train,
                           const FitOptions& options = {});

enum class ScmVariable { D, S };

// Average marginal effect: mean change of the predicted probability when the
// variable increases by one unit.
double average_marginal_effect(const LogisticModel& model,
                               const std::vector<ScmSample>& test,
                               ScmVariable variable);

struct SyntheticEffects {
  double te = 0.0;
  double aice = 0.0;
  double adce = 0.0;
};

// Indicator-form effects on thresholded predictions: TE flips d to 0 and
// jitters the surface (s' = s + eps with sd 0.5); AICE applies the same s'
// with d untouched. The same seed draws the same s', so the two arms share
// their counterfactual surface.
SyntheticEffects estimate_effects_synthetic(const LogisticModel& model,
                                            const std::vector<ScmSample>& test,
                                            uint64_t seed);

struct EffectDecomposition {
  double tde = 0.0;     // E[f(0, s') - f(d, s')]
  double pie = 0.0;     // E[f(d, s') - f(d, s)]
  double te_diff = 0.0; // E[f(0, s') - f(d, s)] = tde + pie exactly
};

// Probability-scale decomposition; constructible here because the
// counterfactual surface value is explicit in this world.
EffectDecomposition oracle_decomposition(const LogisticModel& model,
                                         const std::vector<ScmSample>& test,
                                         uint64_t seed);

// Min-max normalization onto [0, 1]; rejects constant series.
std::vector<double> normalize_minmax(const std::vector<double>& values);

struct SweepConfig {
  double c1_begin = 0.2;
  double c1_end = 2.0;
  double c1_step = 0.2;
  double c2 = 1.0;
  int64_t n_train = 100000;
  int64_t n_test = 10000;
  uint64_t seed = 0;
  FitOptions fit;
};

struct SweepRow {
  double c1 = 0.0;
  double true_ce_d = 0.0; // AME of d
  double true_ce_s = 0.0; // AME of s
  double te = 0.0;
  double aice = 0.0;
  double adce = 0.0;
  double tde = 0.0;
  double pie = 0.0;
  double te_diff = 0.0;
  double fit_loss = 0.0;
  double w_d = 0.0;
  double w_s = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<double> norm_true_ce_d;
  std::vector<double> norm_true_ce_s;
  std::vector<double> norm_adce;
  std::vector<double> norm_aice;
};

SweepResult run_sweep(const SweepConfig& cfg);

std::string sweep_to_csv(const SweepResult& result);

} // namespace structeval
