#include "structeval/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "structeval/errors.hpp"
#include "structeval/rng.hpp"

namespace structeval {

ChangeRates change_rates(const std::vector<OutcomeRecord>& t1_outcomes,
                         const std::vector<OutcomeRecord>& t0_outcomes) {
  ChangeRates rates;
  for (const OutcomeRecord& o : t1_outcomes) {
    if (o.failed) { ++rates.n_t1_failed; continue; }
    if (!o.changed_vs_origin) { ++rates.n_t1_failed; continue; }
    *o.changed_vs_origin ? ++rates.counts.n11 : ++rates.counts.n10;
  }
  for (const OutcomeRecord& o : t0_outcomes) {
    if (o.failed) { ++rates.n_t0_failed; continue; }
    if (!o.changed_vs_origin) { ++rates.n_t0_failed; continue; }
    *o.changed_vs_origin ? ++rates.counts.n01 : ++rates.counts.n00;
  }
  if (rates.counts.arm_t1() > 0) {
    rates.te = static_cast<double>(rates.counts.n11) /
               static_cast<double>(rates.counts.arm_t1());
  }
  if (rates.counts.arm_t0() > 0) {
    rates.aice = static_cast<double>(rates.counts.n01) /
                 static_cast<double>(rates.counts.arm_t0());
  }
  return rates;
}

double adce(double te, double aice) {
  if (te < 0.0 || te > 1.0 || aice < 0.0 || aice > 1.0) {
    throw Error(ErrorKind::Undefined, "te and aice must be rates in [0, 1]");
  }
  return te - aice;
}

PsPnResult ps_pn(const PairedCounts& counts) {
  const double m1 = static_cast<double>(counts.arm_t1());
  const double m0 = static_cast<double>(counts.arm_t0());
  if (counts.arm_t1() <= 0 || counts.arm_t0() <= 0) {
    throw Error(ErrorKind::Undefined, "ps_pn needs both treatment arms non-empty");
  }
  const double n = static_cast<double>(counts.total());

  PsPnResult out;
  const double p1 = static_cast<double>(counts.n11) / m1; // P(changed | T=1)
  const double p0 = static_cast<double>(counts.n01) / m0; // P(changed | T=0)
  out.alpha = p1;
  out.beta = 1.0 - p0;
  out.monotone = p1 >= p0;

  const double p_unchanged = static_cast<double>(counts.n10 + counts.n00) / n;
  const double p_t0_unchanged = static_cast<double>(counts.n00) / n;
  const double p_t1_changed = static_cast<double>(counts.n11) / n;

  if (counts.n00 > 0) {
    out.pn = (p_unchanged - static_cast<double>(counts.n10) / m1) / p_t0_unchanged;
  }
  if (counts.n11 > 0) {
    out.ps = (static_cast<double>(counts.n00) / m0 - p_unchanged) / p_t1_changed;
  }
  return out;
}

IdentityCheck ps_pn_identity_check(const PairedCounts& counts) {
  if (!counts.balanced()) {
    throw Error(ErrorKind::Undefined,
                "identity check needs balanced arms (|T=1| = " +
                    std::to_string(counts.arm_t1()) + ", |T=0| = " +
                    std::to_string(counts.arm_t0()) +
                    "); the /2 weights assume P(T=1) = P(T=0) = 1/2");
  }
  PsPnResult r = ps_pn(counts);
  IdentityCheck check;
  const double p1 = static_cast<double>(counts.n11) / static_cast<double>(counts.arm_t1());
  const double p0 = static_cast<double>(counts.n01) / static_cast<double>(counts.arm_t0());
  check.lhs = p1 - p0;
  // Zero-probability cells contribute nothing even though the ratio inside
  // them is undefined.
  double term_ps = counts.n11 > 0 ? (r.alpha / 2.0) * *r.ps : 0.0;
  double term_pn = counts.n00 > 0 ? (r.beta / 2.0) * *r.pn : 0.0;
  check.rhs = term_ps + term_pn;
  check.gap = std::fabs(check.lhs - check.rhs);
  return check;
}

std::vector<PairGroup> make_pair_groups(
    const std::vector<InterventionRecord>& t1_records,
    const std::vector<InterventionRecord>& t0_records,
    const std::vector<OutcomeRecord>& t1_outcomes,
    const std::vector<OutcomeRecord>& t0_outcomes) {
  std::unordered_map<std::string, const InterventionRecord*> t1_by_pair;
  for (const InterventionRecord& r : t1_records) {
    if (!t1_by_pair.emplace(r.pair_id, &r).second) {
      throw Error(ErrorKind::Pairing, "duplicate T1 pair_id: " + r.pair_id);
    }
  }
  std::unordered_map<std::string, const InterventionRecord*> t0_by_pair;
  for (const InterventionRecord& r : t0_records) {
    if (!t0_by_pair.emplace(r.pair_id, &r).second) {
      throw Error(ErrorKind::Pairing, "duplicate T0 pair_id: " + r.pair_id);
    }
  }

  std::string missing;
  for (const auto& [pair_id, r] : t1_by_pair) {
    auto it = t0_by_pair.find(pair_id);
    if (it == t0_by_pair.end() || it->second->origin_id != r->origin_id ||
        it->second->rep_index != r->rep_index) {
      missing += missing.empty() ? pair_id : ", " + pair_id;
    }
  }
  for (const auto& [pair_id, r] : t0_by_pair) {
    (void)r;
    if (!t1_by_pair.count(pair_id)) {
      missing += missing.empty() ? pair_id : ", " + pair_id;
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::Pairing, "unpaired pair_ids: " + missing);
  }

  std::unordered_map<std::string, const OutcomeRecord*> t1_out, t0_out;
  for (const OutcomeRecord& o : t1_outcomes) t1_out[o.sample_ref] = &o;
  for (const OutcomeRecord& o : t0_outcomes) t0_out[o.sample_ref] = &o;

  // Grouped by origin in first-appearance order so the result is stable.
  std::vector<PairGroup> groups;
  std::unordered_map<std::string, size_t> index_of;
  for (const InterventionRecord& r : t1_records) {
    auto [it, inserted] = index_of.try_emplace(r.origin_id, groups.size());
    if (inserted) groups.push_back({r.origin_id, {}, {}});
    PairGroup& group = groups[it->second];

    auto o1 = t1_out.find(r.pair_id);
    auto o0 = t0_out.find(r.pair_id);
    if (o1 == t1_out.end() || o0 == t0_out.end()) {
      throw Error(ErrorKind::Pairing, "missing outcome for pair " + r.pair_id);
    }
    if (!o1->second->failed && o1->second->changed_vs_origin) {
      group.t1_changed.push_back(*o1->second->changed_vs_origin);
    }
    if (!o0->second->failed && o0->second->changed_vs_origin) {
      group.t0_changed.push_back(*o0->second->changed_vs_origin);
    }
  }
  return groups;
}

namespace {

double metric_over(const std::vector<const PairGroup*>& groups, RateMetric metric) {
  int64_t t1_changed = 0, t1_total = 0, t0_changed = 0, t0_total = 0;
  for (const PairGroup* g : groups) {
    for (bool c : g->t1_changed) { ++t1_total; t1_changed += c; }
    for (bool c : g->t0_changed) { ++t0_total; t0_changed += c; }
  }
  const double te = t1_total > 0 ? static_cast<double>(t1_changed) / t1_total : 0.0;
  const double ai = t0_total > 0 ? static_cast<double>(t0_changed) / t0_total : 0.0;
  switch (metric) {
    case RateMetric::Te: return te;
    case RateMetric::Aice: return ai;
    case RateMetric::Adce: return te - ai;
  }
  return 0.0;
}

} // namespace

ConfidenceInterval bootstrap_ci(const std::vector<PairGroup>& groups,
                                RateMetric metric, int resamples, double level,
                                uint64_t seed) {
  if (groups.size() < 2) {
    throw Error(ErrorKind::Undefined, "bootstrap needs at least 2 origin groups");
  }
  if (resamples < 100) {
    throw Error(ErrorKind::Config, "bootstrap needs at least 100 resamples");
  }
  if (level <= 0.0 || level >= 1.0) {
    throw Error(ErrorKind::Config, "confidence level must be in (0, 1)");
  }

  Rng rng(seed);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(resamples));
  std::vector<const PairGroup*> resample(groups.size());
  for (int b = 0; b < resamples; ++b) {
    for (size_t i = 0; i < groups.size(); ++i) {
      resample[i] = &groups[rng.next_below(groups.size())];
    }
    values.push_back(metric_over(resample, metric));
  }
  std::sort(values.begin(), values.end());

  auto percentile = [&](double q) {
    double pos = q * static_cast<double>(values.size() - 1);
    size_t idx = static_cast<size_t>(std::llround(pos));
    idx = std::min(idx, values.size() - 1);
    return values[idx];
  };
  const double tail = (1.0 - level) / 2.0;
  return {percentile(tail), percentile(1.0 - tail)};
}

RegressionFit regress_accuracy_adce(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::Degenerate, "regression needs at least 2 points");
  }
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) { sx += x; sy += y; }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx <= 0.0) {
    throw Error(ErrorKind::Degenerate,
                "regression needs accuracy variance > 0 (all x identical)");
  }
  RegressionFit fit;
  fit.n_points = static_cast<int64_t>(points.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (const auto& [x, y] : points) {
    const double resid = y - (fit.intercept + fit.slope * x);
    ss_res += resid * resid;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

EffectEstimate build_estimate(const EstimateInputs& inputs,
                              const std::vector<OutcomeRecord>& t1_outcomes,
                              const std::vector<OutcomeRecord>& t0_outcomes,
                              const std::vector<PairGroup>& groups,
                              int bootstrap_resamples, double ci_level,
                              uint64_t seed) {
  EffectEstimate e;
  e.model = inputs.model;
  e.dataset = inputs.dataset;
  e.strategy = inputs.strategy;
  e.accuracy = inputs.accuracy;
  e.n_origin = inputs.n_origin;
  e.n_correct = inputs.n_correct;
  e.n_unmatched = inputs.n_unmatched;

  ChangeRates rates = change_rates(t1_outcomes, t0_outcomes);
  e.n_t1 = rates.counts.arm_t1();
  e.n_t0 = rates.counts.arm_t0();
  e.n_failed = inputs.n_origin_failed + rates.n_t1_failed + rates.n_t0_failed;

  if (inputs.n_correct == 0 || !rates.te || !rates.aice) {
    e.defined = false;
    return e;
  }

  e.defined = true;
  e.te = *rates.te;
  e.aice = *rates.aice;
  e.adce = adce(e.te, e.aice);

  const int64_t larger = std::max(e.n_t1, e.n_t0);
  const int64_t gap = std::llabs(e.n_t1 - e.n_t0);
  e.imbalanced = larger > 0 && static_cast<double>(gap) / static_cast<double>(larger) > 0.05;

  PsPnResult psn = ps_pn(rates.counts);
  e.alpha = psn.alpha;
  e.beta = psn.beta;
  e.ps = psn.ps;
  e.pn = psn.pn;
  e.monotone = psn.monotone;

  if (bootstrap_resamples > 0 && groups.size() >= 2) {
    e.ci_level = ci_level;
    e.ci["te"] = bootstrap_ci(groups, RateMetric::Te, bootstrap_resamples, ci_level,
                              derive_seed(seed, "bootstrap/te"));
    e.ci["aice"] = bootstrap_ci(groups, RateMetric::Aice, bootstrap_resamples,
                                ci_level, derive_seed(seed, "bootstrap/aice"));
    e.ci["adce"] = bootstrap_ci(groups, RateMetric::Adce, bootstrap_resamples,
                                ci_level, derive_seed(seed, "bootstrap/adce"));
  }
  return e;
}

} // namespace structeval
