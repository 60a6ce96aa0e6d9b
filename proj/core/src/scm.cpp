#include "structeval/scm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "structeval/errors.hpp"
#include "structeval/rng.hpp"

namespace structeval {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<ScmSample> draw_samples(const ScmConfig& cfg, int64_t count, Rng& rng) {
  std::vector<ScmSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int64_t i = 0; i < count; ++i) {
    ScmSample sample;
    sample.x = rng.next_gaussian();
    sample.d = sample.x + cfg.sigma_d * rng.next_gaussian();
    sample.s = sample.x + cfg.sigma_s * rng.next_gaussian();
    const double noise = cfg.sigma_y * rng.next_gaussian();
    sample.y = sigmoid(cfg.c1 * sample.d + cfg.c2 * sample.s + noise) > 0.5 ? 1 : 0;
    out.push_back(sample);
  }
  return out;
}

std::vector<double> draw_surface_jitter(const std::vector<ScmSample>& test,
                                        uint64_t seed) {
  Rng rng(derive_seed(seed, "s_prime"));
  std::vector<double> s_prime;
  s_prime.reserve(test.size());
  for (const ScmSample& sample : test) {
    s_prime.push_back(sample.s + 0.5 * rng.next_gaussian());
  }
  return s_prime;
}

} // namespace

ScmData generate_scm(const ScmConfig& cfg) {
  if (cfg.sigma_d <= 0.0 || cfg.sigma_s <= 0.0 || cfg.sigma_y <= 0.0) {
    throw Error(ErrorKind::Config, "noise scales must be positive");
  }
  if (cfg.n_train <= 0 || cfg.n_test <= 0) {
    throw Error(ErrorKind::Config, "sample counts must be positive");
  }
  ScmData data;
  Rng train_rng(derive_seed(cfg.seed, "scm/train"));
  Rng test_rng(derive_seed(cfg.seed, "scm/test"));
  data.train = draw_samples(cfg, cfg.n_train, train_rng);
  data.test = draw_samples(cfg, cfg.n_test, test_rng);
  return data;
}

double LogisticModel::probability(double d, double s) const {
  return sigmoid(score(d, s));
}

double logistic_loss(const std::vector<ScmSample>& data, double w_d, double w_s,
                     double bias) {
  double total = 0.0;
  for (const ScmSample& sample : data) {
    const double z = w_d * sample.d + w_s * sample.s + bias;
    // log(1 + e^z) - y*z, computed in the stable branch.
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z))
                                    : std::log1p(std::exp(z));
    total += softplus - static_cast<double>(sample.y) * z;
  }
  return total / static_cast<double>(data.size());
}

void logistic_gradient(const std::vector<ScmSample>& data, double w_d, double w_s,
                       double bias, double& g_wd, double& g_ws, double& g_bias) {
  double sum_d = 0.0, sum_s = 0.0, sum_b = 0.0;
  for (const ScmSample& sample : data) {
    const double resid =
        sigmoid(w_d * sample.d + w_s * sample.s + bias) - sample.y;
    sum_d += resid * sample.d;
    sum_s += resid * sample.s;
    sum_b += resid;
  }
  const double n = static_cast<double>(data.size());
  g_wd = sum_d / n;
  g_ws = sum_s / n;
  g_bias = sum_b / n;
}

LogisticModel fit_logistic(const std::vector<ScmSample>& train,
                           const FitOptions& options) {
  if (train.empty()) throw Error(ErrorKind::Config, "empty training set");
  bool has_positive = false, has_negative = false;
  for (const ScmSample& sample : train) {
    (sample.y ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) {
    throw Error(ErrorKind::Degenerate, "training data contains a single class");
  }

  LogisticModel model;
  double loss = logistic_loss(train, model.w_d, model.w_s, model.bias);
  for (int it = 1; it <= options.max_iterations; ++it) {
    double g_wd, g_ws, g_bias;
    logistic_gradient(train, model.w_d, model.w_s, model.bias, g_wd, g_ws, g_bias);
    model.w_d -= options.learning_rate * g_wd;
    model.w_s -= options.learning_rate * g_ws;
    model.bias -= options.learning_rate * g_bias;
    const double next_loss = logistic_loss(train, model.w_d, model.w_s, model.bias);
    model.iterations = it;
    if (std::fabs(loss - next_loss) < options.tolerance) {
      model.converged = true;
      loss = next_loss;
      break;
    }
    loss = next_loss;
  }
  model.final_loss = loss;
  return model;
}

double average_marginal_effect(const LogisticModel& model,
                               const std::vector<ScmSample>& test,
                               ScmVariable variable) {
  if (test.empty()) throw Error(ErrorKind::Config, "empty test set");
  double total = 0.0;
  for (const ScmSample& sample : test) {
    const double base = model.probability(sample.d, sample.s);
    const double shifted = variable == ScmVariable::D
                               ? model.probability(sample.d + 1.0, sample.s)
                               : model.probability(sample.d, sample.s + 1.0);
    total += shifted - base;
  }
  return total / static_cast<double>(test.size());
}

SyntheticEffects estimate_effects_synthetic(const LogisticModel& model,
                                            const std::vector<ScmSample>& test,
                                            uint64_t seed) {
  if (test.empty()) throw Error(ErrorKind::Config, "empty test set");
  const std::vector<double> s_prime = draw_surface_jitter(test, seed);
  int64_t te_changed = 0;
  int64_t aice_changed = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    const int origin = model.predict(test[i].d, test[i].s);
    te_changed += model.predict(0.0, s_prime[i]) != origin;
    aice_changed += model.predict(test[i].d, s_prime[i]) != origin;
  }
  SyntheticEffects effects;
  effects.te = static_cast<double>(te_changed) / static_cast<double>(test.size());
  effects.aice = static_cast<double>(aice_changed) / static_cast<double>(test.size());
  effects.adce = effects.te - effects.aice;
  return effects;
}

EffectDecomposition oracle_decomposition(const LogisticModel& model,
                                         const std::vector<ScmSample>& test,
                                         uint64_t seed) {
  if (test.empty()) throw Error(ErrorKind::Config, "empty test set");
  const std::vector<double> s_prime = draw_surface_jitter(test, seed);
  double tde = 0.0, pie = 0.0, te_diff = 0.0;
  for (size_t i = 0; i < test.size(); ++i) {
    const double origin = model.probability(test[i].d, test[i].s);
    const double surface_only = model.probability(test[i].d, s_prime[i]);
    const double both = model.probability(0.0, s_prime[i]);
    tde += both - surface_only;
    pie += surface_only - origin;
    te_diff += both - origin;
  }
  const double n = static_cast<double>(test.size());
  return {tde / n, pie / n, te_diff / n};
}

std::vector<double> normalize_minmax(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::Degenerate, "min-max normalization needs >= 2 values");
  }
  double lo = values.front(), hi = values.front();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) {
    throw Error(ErrorKind::Degenerate, "cannot normalize a constant series");
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - lo) / (hi - lo));
  return out;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.c1_step <= 0.0 || cfg.c1_end < cfg.c1_begin) {
    throw Error(ErrorKind::Config, "bad sweep grid");
  }
  SweepResult result;
  int index = 0;
  for (double c1 = cfg.c1_begin; c1 <= cfg.c1_end + 1e-9; c1 += cfg.c1_step, ++index) {
    ScmConfig scm;
    scm.c1 = c1;
    scm.c2 = cfg.c2;
    scm.n_train = cfg.n_train;
    scm.n_test = cfg.n_test;
    scm.seed = derive_seed(cfg.seed, "sweep/" + std::to_string(index));

    ScmData data = generate_scm(scm);
    LogisticModel model = fit_logistic(data.train, cfg.fit);
    const uint64_t effect_seed = derive_seed(scm.seed, "effects");

    SweepRow row;
    row.c1 = c1;
    row.true_ce_d = average_marginal_effect(model, data.test, ScmVariable::D);
    row.true_ce_s = average_marginal_effect(model, data.test, ScmVariable::S);
    SyntheticEffects effects = estimate_effects_synthetic(model, data.test, effect_seed);
    row.te = effects.te;
    row.aice = effects.aice;
    row.adce = effects.adce;
    EffectDecomposition decomposition = oracle_decomposition(model, data.test, effect_seed);
    row.tde = decomposition.tde;
    row.pie = decomposition.pie;
    row.te_diff = decomposition.te_diff;
    row.fit_loss = model.final_loss;
    row.w_d = model.w_d;
    row.w_s = model.w_s;
    result.rows.push_back(row);
  }

  std::vector<double> ce_d, ce_s, adce_series, aice_series;
  for (const SweepRow& row : result.rows) {
    ce_d.push_back(row.true_ce_d);
    ce_s.push_back(row.true_ce_s);
    adce_series.push_back(row.adce);
    aice_series.push_back(row.aice);
  }
  if (result.rows.size() >= 2) {
    result.norm_true_ce_d = normalize_minmax(ce_d);
    result.norm_true_ce_s = normalize_minmax(ce_s);
    result.norm_adce = normalize_minmax(adce_series);
    result.norm_aice = normalize_minmax(aice_series);
  }
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "c1,true_ce_d,true_ce_s,te,aice,adce,tde,pie,te_diff,"
         "norm_true_ce_d,norm_true_ce_s,norm_adce,norm_aice\n";
  out.precision(10);
  for (size_t i = 0; i < result.rows.size(); ++i) {
    const SweepRow& row = result.rows[i];
    out << row.c1 << ',' << row.true_ce_d << ',' << row.true_ce_s << ',' << row.te
        << ',' << row.aice << ',' << row.adce << ',' << row.tde << ',' << row.pie
        << ',' << row.te_diff << ',';
    if (i < result.norm_true_ce_d.size()) {
      out << result.norm_true_ce_d[i] << ',' << result.norm_true_ce_s[i] << ','
          << result.norm_adce[i] << ',' << result.norm_aice[i];
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  return out.str();
}

} // namespace structeval
