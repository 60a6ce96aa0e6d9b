// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Everything runs offline (mocks + synthetic world only).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "structeval/estimate.hpp"
#include "structeval/intervene.hpp"
#include "structeval/perturb.hpp"
#include "structeval/record.hpp"
#include "structeval/rng.hpp"
#include "structeval/scm.hpp"
#include "test_support.hpp"

using namespace structeval;

namespace {

int failures = 0;
int criteria_run = 0;

void report(const std::string& name, bool pass, const std::string& detail = "") {
  ++criteria_run;
  std::printf("[%s] %d. %s%s%s\n", pass ? "PASS" : "FAIL", criteria_run, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// 1. ADCE = alpha/2*PS + beta/2*PN on >= 1000 random balanced monotone tables.
void criterion_identity() {
  auto start = std::chrono::steady_clock::now();
  Rng rng(20250811);
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const int64_t m = 1 + static_cast<int64_t>(rng.next_below(1000));
    const int64_t n11 = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(m + 1)));
    const int64_t n01 = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(n11 + 1)));
    IdentityCheck check = ps_pn_identity_check({n11, m - n11, n01, m - n01});
    worst = std::max(worst, check.gap);
    ++checked;
  }
  const double elapsed = seconds_since(start);
  report("PS/PN combination identity on randomized balanced monotone tables",
         checked >= 1000 && worst <= 1e-12 && elapsed < 5.0,
         "tables=" + std::to_string(checked) + " max_gap=" + std::to_string(worst) +
             " time=" + std::to_string(elapsed) + "s");
}

// 2. Mock extremes through the real pipeline on the 50-sample toy set.
void criterion_mock_extremes() {
  auto start = std::chrono::steady_clock::now();
  testsupport::TempDir tmp("acc_mocks");
  const std::string dataset =
      (testsupport::assets_dir() / "data" / "mult_toy.jsonl").string();
  const std::string config =
      (testsupport::assets_dir() / "tasks" / "mult_mask.conf").string();

  auto run = [&](const std::string& mock, const std::string& tag) {
    const auto out = tmp.path() / tag;
    testsupport::run_cli("pipeline --dataset '" + dataset + "' --task-config '" +
                         config + "' --mock " + mock + " --out '" + out.string() +
                         "' --seed 7 --bootstrap 0");
    return read_estimates(out / "estimate.jsonl").at(0);
  };

  EffectEstimate deep = run("deep", "deep");
  EffectEstimate surface = run("surface", "surface");
  EffectEstimate gibberish = run("gibberish", "gibberish");
  const double elapsed = seconds_since(start);

  const bool deep_ok = deep.defined && deep.te == 1.0 && deep.aice == 0.0 &&
                       deep.adce == 1.0 && deep.accuracy == 1.0;
  const bool surface_ok = surface.defined && surface.te == 1.0 &&
                          surface.aice == 1.0 && surface.adce == 0.0;
  const bool gibberish_ok =
      !gibberish.defined && gibberish.accuracy == 0.0 && gibberish.n_correct == 0;
  report("mock extremes (ideal deep / pure surface / random-weight behavior)",
         deep_ok && surface_ok && gibberish_ok && elapsed < 10.0,
         "deep(te,aice,adce)=(" + std::to_string(deep.te) + "," +
             std::to_string(deep.aice) + "," + std::to_string(deep.adce) +
             ") surface_adce=" + std::to_string(surface.adce) +
             " gibberish_defined=" + (gibberish.defined ? "true" : "false") +
             " time=" + std::to_string(elapsed) + "s");
}

// 3. Character-exact intervention strings.
void criterion_bit_exact_strings() {
  Sample sample{"q1", "What is 50 times 20?", "1000", std::nullopt, "mult"};
  MaskTaskConfig cfg;
  cfg.core_word_pool = {"times"};
  cfg.all_digit_tokens = true;

  bool ok = true;
  std::string detail;
  auto expect = [&](const std::string& got, const std::string& want) {
    if (got != want) {
      ok = false;
      detail += " got '" + got + "' want '" + want + "';";
    }
  };
  InterventionRecord mask_t1 = mask_core(sample, cfg, 0, 0);
  expect(mask_t1.question, "What is <Mask> times 20?");
  expect(mask_surface(sample, mask_t1, cfg).question, "What <Mask> 50 times 20?");
  InterventionRecord replace_t1 = replace_core(sample, cfg, 0, 0);
  expect(replace_t1.question, "What is * times 20?");
  expect(replace_surface(sample, replace_t1, cfg).question, "What * 50 times 20?");
  InterventionRecord swap_t1 = swap_core(sample, cfg, 0, 0);
  expect(swap_t1.question, "50 is What times 20?");
  expect(swap_surface(sample, cfg, swap_t1).question, "is What 50 times 20?");
  report("bit-exact mask/replace/swap intervention strings", ok, detail);
}

// 4. Synthetic oracle sweep at the default noise scales and sizes.
void criterion_synthetic_sweep() {
  auto start = std::chrono::steady_clock::now();
  SweepConfig cfg;
  cfg.c1_begin = 0.2;
  cfg.c1_end = 2.0;
  cfg.c1_step = 0.2;
  cfg.c2 = 1.0;
  cfg.n_train = 100000;
  cfg.n_test = 10000;
  cfg.seed = 42;
  SweepResult sweep = run_sweep(cfg);
  const double elapsed = seconds_since(start);

  bool ames_in_range = true;
  double worst_telescope = 0.0;
  for (const SweepRow& row : sweep.rows) {
    ames_in_range = ames_in_range && row.true_ce_d >= 0.0 && row.true_ce_d <= 0.25 &&
                    row.true_ce_s >= 0.0 && row.true_ce_s <= 0.25;
    worst_telescope =
        std::max(worst_telescope, std::fabs(row.te_diff - (row.tde + row.pie)));
  }

  auto spearman = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    auto ranks = [](const std::vector<double>& v) {
      std::vector<size_t> order(v.size());
      for (size_t i = 0; i < v.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](size_t a, size_t b) { return v[a] < v[b]; });
      std::vector<double> r(v.size());
      for (size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
      return r;
    };
    std::vector<double> rx = ranks(xs), ry = ranks(ys);
    double mx = 0, my = 0;
    for (size_t i = 0; i < rx.size(); ++i) { mx += rx[i]; my += ry[i]; }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double num = 0, dx = 0, dy = 0;
    for (size_t i = 0; i < rx.size(); ++i) {
      num += (rx[i] - mx) * (ry[i] - my);
      dx += (rx[i] - mx) * (rx[i] - mx);
      dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
  };

  std::vector<double> c1, adce_series, aice_series;
  for (const SweepRow& row : sweep.rows) {
    c1.push_back(row.c1);
    adce_series.push_back(row.adce);
    aice_series.push_back(row.aice);
  }
  const double rho_adce = spearman(c1, adce_series);
  const double rho_aice = spearman(c1, aice_series);

  double max_gap = 0.0;
  for (size_t i = 0; i < sweep.rows.size(); ++i) {
    max_gap = std::max(max_gap,
                       std::fabs(sweep.norm_adce[i] - sweep.norm_true_ce_d[i]));
  }

  // Side check on the same sweep: the symmetric point c1 = c2 = 1 recovers a
  // weight ratio within 10% of 1.
  double ratio = 0.0;
  for (const SweepRow& row : sweep.rows) {
    if (std::fabs(row.c1 - 1.0) < 1e-9) ratio = row.w_d / row.w_s;
  }

  const bool pass = ames_in_range && rho_adce >= 0.9 && rho_aice <= -0.9 &&
                    max_gap <= 0.15 && worst_telescope <= 1e-12 &&
                    std::fabs(ratio - 1.0) <= 0.1 && elapsed < 120.0;
  report("synthetic oracle sweep (AME range, trends, normalized gap, decomposition)",
         pass,
         "rho_adce=" + std::to_string(rho_adce) + " rho_aice=" + std::to_string(rho_aice) +
             " max_norm_gap=" + std::to_string(max_gap) + " telescope=" +
             std::to_string(worst_telescope) + " w_ratio=" + std::to_string(ratio) +
             " time=" + std::to_string(elapsed) + "s");
}

// 5. Analytic gradient vs central finite differences at 100 random points.
void criterion_gradient_check() {
  ScmConfig scm;
  scm.c1 = 1.2;
  scm.c2 = 0.8;
  scm.n_train = 400;
  scm.n_test = 10;
  scm.seed = 99;
  std::vector<ScmSample> probe = generate_scm(scm).train;

  Rng rng(555);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    double w[3] = {4.0 * rng.next_double() - 2.0, 4.0 * rng.next_double() - 2.0,
                   2.0 * rng.next_double() - 1.0};
    double g[3];
    logistic_gradient(probe, w[0], w[1], w[2], g[0], g[1], g[2]);
    for (int p = 0; p < 3; ++p) {
      const double h = 1e-5 * std::max(1.0, std::fabs(w[p]));
      double lo[3] = {w[0], w[1], w[2]}, hi[3] = {w[0], w[1], w[2]};
      lo[p] -= h;
      hi[p] += h;
      const double fd = (logistic_loss(probe, hi[0], hi[1], hi[2]) -
                         logistic_loss(probe, lo[0], lo[1], lo[2])) /
                        (2.0 * h);
      const double rel =
          std::fabs(fd - g[p]) / std::max({1.0, std::fabs(fd), std::fabs(g[p])});
      worst = std::max(worst, rel);
    }
  }
  report("logistic-fit analytic gradient vs central finite differences",
         worst <= 1e-5, "worst_rel_err=" + std::to_string(worst));
}

// 6. Noise protocol: text-noise laws and binomial label-flip counts.
void criterion_noise_protocol() {
  bool ok = true;
  std::string detail;

  const std::string sentence =
      "Kyle bought the best-selling book for nineteen dollars and fifty cents";
  if (text_noise(sentence, {0.0, NoiseMode::Text, 3}) != sentence) {
    ok = false;
    detail += " eta0-not-identity;";
  }
  for (uint64_t seed = 0; seed < 25 && ok; ++seed) {
    std::string noisy = text_noise(sentence, {1.0, NoiseMode::Text, seed});
    std::istringstream a(sentence), b(noisy);
    std::vector<std::string> wa, wb;
    std::string w;
    while (a >> w) wa.push_back(w);
    while (b >> w) wb.push_back(w);
    if (wa.size() != wb.size()) {
      ok = false;
      detail += " word-dropped-unexpectedly;";
      break;
    }
    for (size_t i = 0; i < wa.size(); ++i) {
      const long delta =
          static_cast<long>(wb[i].size()) - static_cast<long>(wa[i].size());
      if (wb[i] == wa[i] || delta < -1 || delta > 1) {
        ok = false;
        detail += " word '" + wa[i] + "' -> '" + wb[i] + "';";
        break;
      }
    }
  }

  // Label flips ~ Binomial(n, eta) within 3 sigma at each level.
  std::vector<Sample> samples;
  for (int i = 0; i < 10000; ++i) {
    Sample s;
    s.id = "s" + std::to_string(i);
    s.question = "q?";
    s.options = {{"a", "b", "c", "d"}};
    s.gold_answer = (*s.options)[static_cast<size_t>(i % 4)];
    s.task = "choice";
    samples.push_back(std::move(s));
  }
  for (double eta : {0.2, 0.5, 0.9}) {
    auto noisy = label_noise(samples, {eta, NoiseMode::Label, 2024});
    double flips = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
      flips += noisy[i].gold_answer != samples[i].gold_answer;
    }
    const double mean = 10000.0 * eta;
    const double sigma = std::sqrt(10000.0 * eta * (1.0 - eta));
    if (std::fabs(flips - mean) > 3.0 * sigma) {
      ok = false;
      detail += " eta=" + std::to_string(eta) + " flips=" + std::to_string(flips) + ";";
    }
  }
  report("noise protocol (eta laws for text noise, 3-sigma binomial label flips)",
         ok, detail);
}

// 7. Two warm-cache pipeline runs produce byte-identical artifacts.
void criterion_pipeline_determinism() {
  testsupport::TempDir tmp("acc_determinism");
  const std::string dataset =
      (testsupport::assets_dir() / "data" / "mult_toy.jsonl").string();
  const std::string config =
      (testsupport::assets_dir() / "tasks" / "mult_mask.conf").string();
  const std::string command =
      "pipeline --dataset '" + dataset + "' --task-config '" + config +
      "' --mock deep --cache '" + (tmp.path() / "cache").string() + "' --out '" +
      (tmp.path() / "run").string() + "' --seed 123 --bootstrap 400 --concurrency 4";

  bool ok = testsupport::run_cli(command) == 0;
  std::map<std::string, std::string> snapshot;
  if (ok) {
    for (const auto& entry :
         std::filesystem::directory_iterator(tmp.path() / "run")) {
      if (entry.is_regular_file()) {
        snapshot[entry.path().filename().string()] = testsupport::slurp(entry.path());
      }
    }
    ok = testsupport::run_cli(command) == 0;
  }
  std::string detail;
  if (ok) {
    for (const auto& [name, content] : snapshot) {
      if (testsupport::slurp(tmp.path() / "run" / name) != content) {
        ok = false;
        detail += " " + name + " differs;";
      }
    }
    detail += " artifacts=" + std::to_string(snapshot.size());
  }
  report("pipeline determinism across warm-cache reruns", ok, detail);
}

// 8. Regression fidelity: exact on collinear points, 3 SE on noisy lines.
void criterion_regression() {
  bool ok = true;
  std::string detail;

  std::vector<std::pair<double, double>> collinear;
  for (double x : {0.05, 0.2, 0.4, 0.55, 0.75, 0.95}) {
    collinear.emplace_back(x, 2.0 * x - 0.5);
  }
  RegressionFit exact = regress_accuracy_adce(collinear);
  if (std::fabs(exact.slope - 2.0) > 1e-9 || std::fabs(exact.intercept + 0.5) > 1e-9 ||
      exact.r2 < 1.0 - 1e-9) {
    ok = false;
    detail += " collinear fit off (slope=" + std::to_string(exact.slope) + ");";
  }

  Rng rng(808);
  int misses = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const double slope = 1.5, intercept = -0.3, noise = 0.04;
    std::vector<std::pair<double, double>> points;
    for (int i = 0; i < 12; ++i) {
      const double x = 0.1 + 0.8 * static_cast<double>(i) / 11.0;
      points.emplace_back(x, intercept + slope * x + noise * rng.next_gaussian());
    }
    RegressionFit fit = regress_accuracy_adce(points);
    double mx = 0;
    for (auto& [x, y] : points) mx += x;
    mx /= 12.0;
    double sxx = 0, ss_res = 0;
    for (auto& [x, y] : points) {
      sxx += (x - mx) * (x - mx);
      const double resid = y - fit.intercept - fit.slope * x;
      ss_res += resid * resid;
    }
    const double se = std::sqrt(ss_res / 10.0 / sxx);
    if (std::fabs(fit.slope - slope) > 3.0 * se) ++misses;
  }
  // 3 SE misses happen with probability ~0.3% per draw; allow a couple.
  if (misses > 3) {
    ok = false;
    detail += " noisy-line misses=" + std::to_string(misses) + ";";
  }
  report("accuracy-effect regression fidelity (exact + Monte-Carlo)", ok, detail);
}

} // namespace

int main() {
  std::printf("acceptance suite: offline criteria over mocks and the synthetic "
              "oracle world\n");
  criterion_identity();
  criterion_mock_extremes();
  criterion_bit_exact_strings();
  criterion_synthetic_sweep();
  criterion_gradient_check();
  criterion_noise_protocol();
  criterion_pipeline_determinism();
  criterion_regression();
  std::printf("%d/%d criteria passed\n", criteria_run - failures, criteria_run);
  return failures == 0 ? 0 : 1;
}
