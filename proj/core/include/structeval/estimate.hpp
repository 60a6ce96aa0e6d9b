#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "structeval/record.hpp"

namespace structeval {

// Cell counts of the joint (treatment, changed-indicator) distribution.
// n11 = (T=1, changed), n10 = (T=1, unchanged), n01 / n00 the T=0 analogues.
struct PairedCounts {
  int64_t n11 = 0;
  int64_t n10 = 0;
  int64_t n01 = 0;
  int64_t n00 = 0;

  int64_t arm_t1() const { return n11 + n10; }
  int64_t arm_t0() const { return n01 + n00; }
  int64_t total() const { return arm_t1() + arm_t0(); }
  bool balanced() const { return arm_t1() == arm_t0(); }
};

struct ChangeRates {
  std::optional<double> te;   // P(changed | T=1)
  std::optional<double> aice; // P(changed | T=0)
  PairedCounts counts;
  int64_t n_t1_failed = 0;
  int64_t n_t0_failed = 0;
};

// Change rates over the two treatment arms. Failed outcomes and outcomes with
// no changed flag are excluded from both numerator and denominator; an empty
// arm leaves its rate unset.
ChangeRates change_rates(const std::vector<OutcomeRecord>& t1_outcomes,
                         const std::vector<OutcomeRecord>& t0_outcomes);

// Exact difference of the two change rates; the direct-effect estimate.
double adce(double te, double aice);

struct PsPnResult {
  std::optional<double> ps; // unset when P(T=1, changed) = 0
  std::optional<double> pn; // unset when P(T=0, unchanged) = 0
  double alpha = 0.0;       // P(changed | T=1)
  double beta = 0.0;        // P(unchanged | T=0)
  bool monotone = true;     // P(changed|T=1) >= P(changed|T=0)
};

// Probability of sufficiency / necessity of the treatment for an output
// change, point-identified from the observational cells (no confounders
// between T and the change indicator). Requires both arms non-empty; a
// non-monotone table is reported with monotone=false rather than refused.
PsPnResult ps_pn(const PairedCounts& counts);

struct IdentityCheck {
  double lhs = 0.0; // adce from the table
  double rhs = 0.0; // alpha/2 * ps + beta/2 * pn
  double gap = 0.0;
};

// Verifies adce = alpha/2*PS + beta/2*PN, which is exact (up to floating
// error) for balanced arms. Unbalanced tables are refused since the /2
// weights assume P(T=1) = P(T=0) = 1/2.
IdentityCheck ps_pn_identity_check(const PairedCounts& counts);

// One origin sample's intervention outcomes, kept together so resampling
// respects the pairing.
struct PairGroup {
  std::string origin_id;
  std::vector<bool> t1_changed;
  std::vector<bool> t0_changed;
};

std::vector<PairGroup> make_pair_groups(
    const std::vector<InterventionRecord>& t1_records,
    const std::vector<InterventionRecord>& t0_records,
    const std::vector<OutcomeRecord>& t1_outcomes,
    const std::vector<OutcomeRecord>& t0_outcomes);

enum class RateMetric { Te, Aice, Adce };

// Percentile bootstrap over origin groups (each group enters or leaves as a
// whole). Needs >= 2 groups and B >= 100.
ConfidenceInterval bootstrap_ci(const std::vector<PairGroup>& groups,
                                RateMetric metric, int resamples, double level,
                                uint64_t seed);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int64_t n_points = 0;
};

// Ordinary least squares of adce on accuracy (the cross-model trend line).
RegressionFit regress_accuracy_adce(const std::vector<std::pair<double, double>>& points);

struct EstimateInputs {
  std::string model;
  std::string dataset;
  std::string strategy;
  double accuracy = 0.0;
  int64_t n_origin = 0;
  int64_t n_correct = 0;
  int64_t n_unmatched = 0;
  int64_t n_origin_failed = 0;
};

// Assemble the full estimate from stage outputs; bootstrap intervals for
// te/aice/adce are attached when `bootstrap_resamples` > 0.
EffectEstimate build_estimate(const EstimateInputs& inputs,
                              const std::vector<OutcomeRecord>& t1_outcomes,
                              const std::vector<OutcomeRecord>& t0_outcomes,
                              const std::vector<PairGroup>& groups,
                              int bootstrap_resamples, double ci_level,
                              uint64_t seed);

} // namespace structeval
