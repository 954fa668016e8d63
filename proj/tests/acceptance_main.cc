// Copyright 2026 The Preflab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: twelve release criteria, one PASS/FAIL line each.
// Tolerances are pinned here on purpose; run with a list of criterion
// numbers to execute a subset (default: all).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "preflab/corpus.h"
#include "preflab/error.h"
#include "preflab/evalsuite.h"
#include "preflab/experiment.h"
#include "preflab/objectives.h"
#include "preflab/policy.h"
#include "preflab/rationale_client.h"
#include "preflab/rng.h"
#include "preflab/synthworld.h"
#include "preflab/theory.h"
#include "preflab/trainer.h"

namespace {

using preflab::MixSeed;
using preflab::Rng;

double Now() {
  using namespace std::chrono;
  return duration_cast<duration<double>>(steady_clock::now().time_since_epoch()).count();
}

std::string Fmt(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

double Median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

int64_t Median3i(std::vector<int64_t> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

// ---------------------------------------------------------------------------
// Criterion 1: closed-form conditional mutual information vs Monte Carlo on a
// 5x5x5 grid of (q, alpha, beta) in [0.05, 0.95]^3, 1e6 samples per point,
// |closed - mc| < max(5e-3, 3*std_err), total runtime under 2 minutes.
// ---------------------------------------------------------------------------
bool Criterion1(std::string* detail) {
  const double t0 = Now();
  const std::vector<double> grid = {0.05, 0.275, 0.5, 0.725, 0.95};
  const uint64_t kSamples = 1000000;
  const uint64_t kSeed = 20260825;
  bool ok = true;
  double worst = 0.0;  // gap / allowance, should stay below 1
  uint64_t point = 0;
  for (double q : grid) {
    for (double a : grid) {
      for (double b : grid) {
        preflab::theory::PreferenceLaw law{q, 0.0};
        preflab::theory::RationaleChannel chan{a, b};
        const double closed = preflab::theory::CondMutualInfo(law, chan);
        const auto mc =
            preflab::theory::McMutualInfo(law, chan, kSamples, MixSeed(kSeed, point++));
        const double gap = std::fabs(closed - mc.estimate);
        const double allow = std::max(5e-3, 3.0 * mc.std_err);
        worst = std::max(worst, gap / allow);
        if (!(gap < allow)) ok = false;
      }
    }
  }
  const double secs = Now() - t0;
  if (!(secs < 120.0)) ok = false;
  *detail = Fmt("closed form vs 1e6-sample Monte Carlo on 125 grid points, "
                "worst gap/allowance %.3f, %.1f s (cap 120 s)",
                worst, secs);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 2: channel endpoints. beta = alpha = 0.5 gives zero information;
// beta = 1, alpha = 0 gives the full preference entropy H(q). Both to 1e-12
// for q in {0.1, ..., 0.9}.
// ---------------------------------------------------------------------------
bool Criterion2(std::string* detail) {
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double q = 0.1 * i;
    preflab::theory::PreferenceLaw law{q, 0.0};
    const double zero =
        preflab::theory::CondMutualInfo(law, preflab::theory::RationaleChannel{0.5, 0.5});
    const double full =
        preflab::theory::CondMutualInfo(law, preflab::theory::RationaleChannel{0.0, 1.0});
    worst = std::max(worst, std::fabs(zero));
    worst = std::max(worst, std::fabs(full - preflab::theory::BinaryEntropy(q)));
  }
  *detail = Fmt("uninformative channel -> 0 and noiseless channel -> H(q), "
                "max abs deviation %.3e (tol 1e-12)",
                worst);
  return worst < 1e-12;
}

// ---------------------------------------------------------------------------
// Criterion 3: the moderate-regime curve is non-decreasing in gamma on a
// 51-point grid for q in {0.55, 0.7, 0.9}, and the emitted sweep CSV matches
// the criterion-2 endpoint values at gamma = 0 and gamma = 0.5.
// ---------------------------------------------------------------------------
double CsvCmiField(const std::string& csv, size_t row_index) {
  std::istringstream in(csv);
  std::string line;
  for (size_t i = 0; i <= row_index; ++i) {
    if (!std::getline(in, line)) throw preflab::Error(preflab::ErrorCode::kParse, "short csv");
  }
  const size_t c1 = line.find(',');
  const size_t c2 = line.find(',', c1 + 1);
  return std::stod(line.substr(c1 + 1, c2 - c1 - 1));
}

bool Criterion3(std::string* detail) {
  bool monotone = true;
  double worst_endpoint = 0.0;
  std::vector<double> gammas(51);
  for (int i = 0; i <= 50; ++i) gammas[i] = 0.5 * i / 50.0;
  for (double q : {0.55, 0.7, 0.9}) {
    preflab::theory::PreferenceLaw law{q, 0.0};
    std::vector<double> cmi(51);
    for (int i = 0; i <= 50; ++i) cmi[i] = preflab::theory::CmiModerate(law, gammas[i]);
    for (int i = 0; i < 50; ++i) {
      if (!(cmi[i + 1] >= cmi[i])) monotone = false;
    }
    if (!(cmi[50] > cmi[0])) monotone = false;
    const std::string csv =
        preflab::theory::SweepToCsv(preflab::theory::RegimeSweep(law, gammas));
    // Rows print with nine decimals, so half an ulp of the text is 5e-10.
    worst_endpoint = std::max(worst_endpoint, std::fabs(CsvCmiField(csv, 1) - 0.0));
    worst_endpoint = std::max(
        worst_endpoint, std::fabs(CsvCmiField(csv, 51) - preflab::theory::BinaryEntropy(q)));
  }
  *detail = Fmt("51-point gamma sweep non-decreasing for q in {0.55, 0.7, 0.9}; "
                "csv endpoints off by %.3e (tol 1e-9)",
                worst_endpoint);
  return monotone && worst_endpoint < 1e-9;
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic batch gradients vs central finite differences for all
// five objectives on both architectures; max relative error over 64 random
// coordinates below 1e-4 (denominator max(|fd|, |grad|, 1e-3)).
// ---------------------------------------------------------------------------
bool Criterion4(std::string* detail) {
  preflab::synthworld::WorldConfig wc;
  wc.seed = 314;
  const preflab::policy::Vocab vocab = preflab::synthworld::WorldVocab(wc);
  const preflab::corpus::Dataset batch = preflab::synthworld::MakeDataset(wc, 4);

  const std::vector<preflab::policy::PolicyArch> archs = {
      preflab::policy::PolicyArch::Ngram(2), preflab::policy::PolicyArch::Decoder(8, 2, 1, 48)};
  const std::vector<preflab::objectives::ObjectiveKind> kinds = {
      preflab::objectives::ObjectiveKind::kSft, preflab::objectives::ObjectiveKind::kDpo,
      preflab::objectives::ObjectiveKind::kRdpo, preflab::objectives::ObjectiveKind::kOrpo,
      preflab::objectives::ObjectiveKind::kRorpo};

  double worst = 0.0;
  uint64_t stream = 0;
  for (const auto& arch : archs) {
    preflab::policy::PolicyModel model = preflab::policy::PolicyModel::Random(arch, vocab, 7);
    const preflab::policy::PolicyModel ref = preflab::policy::PolicyModel::Random(arch, vocab, 8);
    for (const auto kind : kinds) {
      preflab::objectives::ObjectiveConfig cfg;
      cfg.kind = kind;
      cfg.beta_dpo = 0.1;
      cfg.gamma_rat = 2.0;
      cfg.lambda_orpo = 1.0;
      const bool needs_ref = kind == preflab::objectives::ObjectiveKind::kDpo ||
                             kind == preflab::objectives::ObjectiveKind::kRdpo;
      const preflab::policy::PolicyModel* ref_ptr = needs_ref ? &ref : nullptr;

      std::vector<double> grad(model.num_params(), 0.0);
      preflab::objectives::BatchLossGrad(model, ref_ptr, batch, cfg, &grad);

      Rng coords(MixSeed(5150, stream++));
      // Step sits in the central-difference sweet spot for doubles here:
      // layer norm over dim-8 activations gives third derivatives near 1e5,
      // so 1e-4 leaks visible truncation error while rounding stays ~1e-11.
      const double h = 1e-5;
      for (int k = 0; k < 64; ++k) {
        const size_t i = coords.NextBelow(model.num_params());
        const double saved = model.params()[i];
        model.mutable_params()[i] = saved + h;
        const double up = preflab::objectives::BatchLoss(model, ref_ptr, batch, cfg).total;
        model.mutable_params()[i] = saved - h;
        const double dn = preflab::objectives::BatchLoss(model, ref_ptr, batch, cfg).total;
        model.mutable_params()[i] = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double rel =
            std::fabs(fd - grad[i]) / std::max({std::fabs(fd), std::fabs(grad[i]), 1e-3});
        worst = std::max(worst, rel);
      }
    }
  }
  *detail = Fmt("five objectives x two architectures, 64 coordinates each, "
                "max relative error %.3e (tol 1e-4)",
                worst);
  return worst < 1e-4;
}

// ---------------------------------------------------------------------------
// Criterion 5: with the rationale weight at zero the augmented objectives run
// the exact base trajectories: identical per-step losses and bitwise-equal
// parameters after 100 optimizer steps.
// ---------------------------------------------------------------------------
bool PairedTrajectories(preflab::objectives::ObjectiveKind aug,
                        preflab::objectives::ObjectiveKind base, bool with_ref,
                        double* max_diff, bool* histories_equal) {
  preflab::synthworld::WorldConfig wc;
  wc.seed = 3301;
  const preflab::policy::Vocab vocab = preflab::synthworld::WorldVocab(wc);
  const preflab::corpus::Dataset data = preflab::synthworld::MakeDataset(wc, 25);
  const auto arch = preflab::policy::PolicyArch::Decoder(8, 2, 1, 48);
  const preflab::policy::PolicyModel start = preflab::policy::PolicyModel::Random(arch, vocab, 11);

  preflab::trainer::TrainConfig tc;
  tc.epochs = 20;  // 25 records / batch 5 -> 5 steps per epoch -> 100 steps
  tc.batch_size = 5;
  tc.learning_rate = 0.02;
  tc.optimizer = preflab::trainer::OptimizerKind::kAdam;
  tc.seed = 77;

  auto run = [&](preflab::objectives::ObjectiveKind kind, double gamma) {
    preflab::policy::PolicyModel m = start;
    preflab::trainer::TrainConfig cfg = tc;
    cfg.objective.kind = kind;
    cfg.objective.gamma_rat = gamma;
    preflab::trainer::TrainResult res =
        with_ref ? preflab::trainer::TrainWithFrozenRef(&m, data, cfg)
                 : preflab::trainer::Train(&m, nullptr, data, cfg);
    return std::make_pair(std::move(m), std::move(res));
  };

  auto [m_aug, r_aug] = run(aug, 0.0);
  auto [m_base, r_base] = run(base, 0.0);

  *max_diff = 0.0;
  for (size_t i = 0; i < m_aug.num_params(); ++i) {
    *max_diff = std::max(*max_diff, std::fabs(m_aug.params()[i] - m_base.params()[i]));
  }
  *histories_equal = r_aug.history.size() == 100 && r_base.history.size() == 100;
  for (size_t i = 0; *histories_equal && i < r_aug.history.size(); ++i) {
    if (r_aug.history[i].total != r_base.history[i].total ||
        r_aug.history[i].preference_term != r_base.history[i].preference_term) {
      *histories_equal = false;
    }
  }
  return *max_diff == 0.0 && *histories_equal;
}

bool Criterion5(std::string* detail) {
  double d1 = 0.0, d2 = 0.0;
  bool h1 = false, h2 = false;
  const bool ok1 = PairedTrajectories(preflab::objectives::ObjectiveKind::kRdpo,
                                      preflab::objectives::ObjectiveKind::kDpo, true, &d1, &h1);
  const bool ok2 = PairedTrajectories(preflab::objectives::ObjectiveKind::kRorpo,
                                      preflab::objectives::ObjectiveKind::kOrpo, false, &d2, &h2);
  *detail = Fmt("gamma=0 reductions over 100 Adam steps: rdpo-dpo max param diff %.1e, "
                "rorpo-orpo max param diff %.1e, per-step losses %s",
                d1, d2, (h1 && h2) ? "identical" : "DIFFER");
  return ok1 && ok2;
}

// ---------------------------------------------------------------------------
// Criterion 6: generalization-bound arithmetic. The worked example lands on
// 0.126491 within 1e-6, and when delta + eta1 equals I(theta;S|Z) bitwise the
// two bounds agree exactly.
// ---------------------------------------------------------------------------
bool Criterion6(std::string* detail) {
  preflab::theory::BoundInputs b;
  b.sigma = 1.0;
  b.n = 100.0;
  b.i_theta_z = 0.5;
  b.delta_cap = 0.1;
  b.eta1 = 0.2;
  const double with_r = preflab::theory::GenBoundWithRationale(b);
  const double gap = std::fabs(with_r - 0.126491);

  bool crossover = true;
  const double pairs[][2] = {{0.1, 0.2}, {0.17, 0.03}, {0.25, 0.0}, {0.0, 0.0}};
  for (const auto& p : pairs) {
    preflab::theory::BoundInputs c;
    c.sigma = 0.7;
    c.n = 37.0;
    c.i_theta_z = 0.325;
    c.delta_cap = p[0];
    c.eta1 = p[1];
    c.i_theta_s_given_z = p[0] + p[1];
    if (preflab::theory::GenBoundWithRationale(c) !=
        preflab::theory::GenBoundWithoutRationale(c)) {
      crossover = false;
    }
  }
  *detail = Fmt("worked example %.9f vs 0.126491 (gap %.2e, tol 1e-6); "
                "crossover equality at delta+eta1 = I(theta;S|Z) %s",
                with_r, gap, crossover ? "exact" : "BROKEN");
  return gap <= 1e-6 && crossover;
}

// ---------------------------------------------------------------------------
// Criterion 7: the two error-probability bounds reproduce their worked values
// (0.569337 and 0.206517) within 1e-6, and the lower bound never exceeds the
// upper bound when both are informative on a random input grid.
// ---------------------------------------------------------------------------
bool Criterion7(std::string* detail) {
  const double ln2 = std::log(2.0);
  const auto fano = preflab::theory::FanoLowerBound(ln2, 0.1, 0.0, 0.05, 2);
  const auto errup = preflab::theory::ErrUpperBound(ln2, 0.6, 0.05);
  const double fano_gap = std::fabs(fano.value - 0.569337);
  const double err_gap = std::fabs(errup.value - 0.206517);

  Rng rng(4242);
  int compared = 0;
  bool ordered = true;
  for (int i = 0; i < 5000; ++i) {
    // Ranges tilted so both bounds land inside their informative regions
    // often enough to exercise the ordering, not just vacuous clamps.
    const double h_z = (0.5 + 0.5 * rng.NextUnit()) * ln2;
    const double i_r = rng.NextUnit() * 0.6;
    const double i_zr = rng.NextUnit() * 0.12;
    const double edge = 0.005 + 0.075 * rng.NextUnit();
    const double tol = rng.NextBernoulli(0.5) ? edge : 1.0 - edge;
    const double h_rz = rng.NextUnit() * 0.12;
    const auto lo = preflab::theory::FanoLowerBound(h_z, i_r, i_zr, tol, 2);
    const auto up = preflab::theory::ErrUpperBound(h_z, i_r, h_rz);
    if (lo.value <= 0.0 || up.value <= 0.0 || up.value >= 0.5) continue;  // vacuous side
    ++compared;
    if (lo.value > up.value) ordered = false;
  }
  *detail = Fmt("fano %.9f vs 0.569337 (gap %.2e), err upper %.9f vs 0.206517 "
                "(gap %.2e, tol 1e-6); lower<=upper on %d non-vacuous random inputs %s",
                fano.value, fano_gap, errup.value, err_gap, compared,
                ordered ? "holds" : "VIOLATED");
  return fano_gap <= 1e-6 && err_gap <= 1e-6 && ordered && compared > 100;
}

// ---------------------------------------------------------------------------
// Criteria 8-11 share one experiment pipeline per criterion; results are
// cached so the determinism criterion can replay them byte-for-byte.
// ---------------------------------------------------------------------------
std::map<std::string, std::string>& CsvCache() {
  static std::map<std::string, std::string> cache;
  return cache;
}

preflab::experiment::ExperimentConfig BaseExperimentConfig() {
  preflab::experiment::ExperimentConfig cfg;
  cfg.world.channel_beta = 0.95;
  cfg.world.channel_alpha = 0.05;
  cfg.world.style = preflab::synthworld::RationaleStyle::kFeatureNamed;
  cfg.model.arch = preflab::policy::PolicyArch::Decoder(16, 2, 1, 64);
  cfg.sft.objective.kind = preflab::objectives::ObjectiveKind::kSft;
  cfg.sft.epochs = 8;
  cfg.sft.batch_size = 8;
  cfg.sft.learning_rate = 0.01;
  cfg.train.objective.kind = preflab::objectives::ObjectiveKind::kRdpo;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 8;
  cfg.sft_records = 256;
  cfg.pool_records = 1600;
  cfg.eval.n_prompts = 200;
  cfg.eval.temperature = 1.0;
  cfg.eval.draw_threshold = 0.0;
  return cfg;
}

const std::vector<size_t>& CurveSizes() {
  static const std::vector<size_t> sizes = {100, 200, 400, 800, 1600};
  return sizes;
}

// Each experiment needs a different coupling regime between the rationale
// term and response behavior. The judge samples both models with shared
// per-prompt seeds, so near-identical models draw almost every prompt;
// eval max_len controls how quickly sampled paths decorrelate.
preflab::evalsuite::Curve EfficiencyRun(uint64_t seed) {
  // Light rationale weight under plain SGD keeps small-n rdpo healthy.
  preflab::experiment::ExperimentConfig cfg = BaseExperimentConfig();
  cfg.train.optimizer = preflab::trainer::OptimizerKind::kSgd;
  cfg.train.learning_rate = 0.6;
  cfg.train.objective.beta_dpo = 0.5;
  cfg.train.objective.gamma_rat = 0.05;
  cfg.train.objective.normalize_rationale_nll = true;
  cfg.eval.max_len = 8;
  return preflab::experiment::RunEfficiency(
      cfg,
      {preflab::objectives::ObjectiveKind::kDpo, preflab::objectives::ObjectiveKind::kRdpo},
      CurveSizes(), seed);
}

preflab::evalsuite::Curve CorruptionRun(uint64_t seed) {
  // Heavier rationale weight so corrupted texts actually displace the
  // model; long eval sequences keep the draw rate low.
  preflab::experiment::ExperimentConfig cfg = BaseExperimentConfig();
  cfg.train.optimizer = preflab::trainer::OptimizerKind::kSgd;
  cfg.train.learning_rate = 0.6;
  cfg.train.objective.beta_dpo = 0.5;
  cfg.train.objective.gamma_rat = 0.7;
  cfg.train.objective.normalize_rationale_nll = true;
  cfg.eval.max_len = 20;
  return preflab::experiment::RunCorruption(cfg, {"permute", "opposite"}, seed);
}

preflab::evalsuite::Curve HeadToHeadRun(uint64_t seed) {
  // Adaptive steps tolerate coin-flip rationale noise at full pool size,
  // leaving two comparably strong models that still differ per prompt.
  preflab::experiment::ExperimentConfig cfg = BaseExperimentConfig();
  cfg.world.channel_beta = 0.5;
  cfg.world.channel_alpha = 0.5;
  cfg.train.optimizer = preflab::trainer::OptimizerKind::kAdam;
  cfg.train.learning_rate = 0.005;
  cfg.train.objective.beta_dpo = 0.1;
  cfg.train.objective.gamma_rat = 1.0;
  cfg.train.objective.normalize_rationale_nll = false;
  cfg.eval.max_len = 16;
  cfg.eval.n_prompts = 500;
  return preflab::experiment::RunHeadToHead(cfg, seed);
}

const std::vector<uint64_t>& ExperimentSeeds() {
  static const std::vector<uint64_t> seeds = {1, 2, 3};
  return seeds;
}

// ---------------------------------------------------------------------------
// Criterion 8: sample-efficiency direction. On the informative world the
// smallest train size where rdpo reaches 0.60 winrate against the SFT model
// is no larger than dpo's, for the median of three seeds, under 15 minutes.
// ---------------------------------------------------------------------------
bool Criterion8(std::string* detail) {
  const double t0 = Now();
  const int64_t kNotReached = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> first_rdpo, first_dpo;
  for (uint64_t seed : ExperimentSeeds()) {
    const preflab::evalsuite::Curve curve = EfficiencyRun(seed);
    CsvCache()["efficiency:" + std::to_string(seed)] = preflab::evalsuite::CurveCsv(curve);
    const int64_t fr = preflab::evalsuite::FirstSizeReaching(curve, "rdpo", 0.60);
    const int64_t fd = preflab::evalsuite::FirstSizeReaching(curve, "dpo", 0.60);
    first_rdpo.push_back(fr < 0 ? kNotReached : fr);
    first_dpo.push_back(fd < 0 ? kNotReached : fd);
  }
  const int64_t med_r = Median3i(first_rdpo);
  const int64_t med_d = Median3i(first_dpo);
  const double secs = Now() - t0;
  const bool reached = med_r < kNotReached;
  const bool ok = reached && med_r <= med_d && secs < 900.0;
  auto show = [&](int64_t v) {
    return v >= kNotReached ? std::string("never") : std::to_string(v);
  };
  std::string ratio = med_d >= kNotReached
                          ? "dpo never reaches 0.60"
                          : Fmt("data ratio %.2fx", reached ? double(med_d) / double(med_r) : 0.0);
  *detail = Fmt("median first size at 0.60 winrate vs sft: rdpo %s, dpo %s (%s; "
                "reported, not asserted beyond <=), %.0f s (cap 900 s)",
                show(med_r).c_str(), show(med_d).c_str(), ratio.c_str(), secs);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 9: corruption direction. Rationale training on original
// rationales beats permuted rationales (winrate excluding draws > 0.5) and
// beats opposite rationales (winrate > 0.5), median of three seeds.
// ---------------------------------------------------------------------------
bool Criterion9(std::string* detail) {
  std::vector<double> perm_ex, opp_plain, opp_ex;
  for (uint64_t seed : ExperimentSeeds()) {
    const preflab::evalsuite::Curve curve = CorruptionRun(seed);
    CsvCache()["corruption:" + std::to_string(seed)] = preflab::evalsuite::CurveCsv(curve);
    for (const auto& pt : curve) {
      if (pt.experiment == "original_vs_permute") {
        perm_ex.push_back(pt.result.WinrateExcludingDraws());
      } else if (pt.experiment == "original_vs_opposite") {
        opp_plain.push_back(pt.result.winrate);
        opp_ex.push_back(pt.result.WinrateExcludingDraws());
      }
    }
  }
  const double mp = Median3(perm_ex);
  const double mo = Median3(opp_plain);
  *detail = Fmt("original vs permuted winrate (excl. draws) %.3f (> 0.5); original vs "
                "opposite winrate %.3f (> 0.5, excl.-draw %.3f recorded)",
                mp, mo, Median3(opp_ex));
  return mp > 0.5 && mo > 0.5;
}

// ---------------------------------------------------------------------------
// Criterion 10: uninformative-rationale null. With a coin-flip channel the
// rationale objective earns no systematic edge over its base: head-to-head
// winrate within [0.35, 0.65] over 500 prompts, median of three seeds.
// ---------------------------------------------------------------------------
bool Criterion10(std::string* detail) {
  std::vector<double> rates;
  for (uint64_t seed : ExperimentSeeds()) {
    const preflab::evalsuite::Curve curve = HeadToHeadRun(seed);
    CsvCache()["headtohead:" + std::to_string(seed)] = preflab::evalsuite::CurveCsv(curve);
    rates.push_back(curve.at(0).result.winrate);
  }
  const double med = Median3(rates);
  *detail = Fmt("rdpo vs dpo winrate on coin-flip rationales: per-seed %.3f/%.3f/%.3f, "
                "median %.3f (band [0.35, 0.65])",
                rates[0], rates[1], rates[2], med);
  return med >= 0.35 && med <= 0.65;
}

// ---------------------------------------------------------------------------
// Criterion 11: determinism. Re-running the three experiment pipelines with
// the same seeds reproduces every CSV byte-for-byte.
// ---------------------------------------------------------------------------
bool Criterion11(std::string* detail) {
  struct Job {
    const char* prefix;
    std::function<preflab::evalsuite::Curve(uint64_t)> run;
  };
  const std::vector<Job> jobs = {{"efficiency", EfficiencyRun},
                                 {"corruption", CorruptionRun},
                                 {"headtohead", HeadToHeadRun}};
  int checked = 0;
  bool ok = true;
  for (const auto& job : jobs) {
    for (uint64_t seed : ExperimentSeeds()) {
      const std::string key = std::string(job.prefix) + ":" + std::to_string(seed);
      auto it = CsvCache().find(key);
      if (it == CsvCache().end()) {
        it = CsvCache().emplace(key, preflab::evalsuite::CurveCsv(job.run(seed))).first;
      }
      const std::string replay = preflab::evalsuite::CurveCsv(job.run(seed));
      ++checked;
      if (replay != it->second) ok = false;
    }
  }
  *detail = Fmt("replayed %d pipeline runs (3 experiments x 3 seeds); CSVs %s", checked,
                ok ? "byte-identical" : "DIVERGED");
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 12: client contract against an in-process loopback mock. Position
// shuffling neutralizes a slot-biased judge (50% +- 3 sigma over 1000 trials),
// a second cached run issues zero requests, and the in-flight request count
// never exceeds the configured cap.
// ---------------------------------------------------------------------------
class MockServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit MockServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   ++hits_;
                   handler_(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw preflab::Error(preflab::ErrorCode::kHttp, "mock bind failed");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  std::string Endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

  int hits() const { return hits_.load(); }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = -1;
  std::atomic<int> hits_{0};
  std::thread thread_;
};

void MockReply(httplib::Response& res, const std::string& content) {
  nlohmann::json body = {
      {"choices", nlohmann::json::array({{{"message", {{"content", content}}}}})}};
  res.set_content(body.dump(), "application/json");
}

struct TempDir {
  std::string path;
  explicit TempDir(const std::string& name) : path("/tmp/preflab_acceptance_" + name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

bool Criterion12(std::string* detail) {
  // Slot bias: the judge always votes for whatever sits in slot 1.
  int votes1 = 0, votes2 = 0, abstains = 0;
  {
    MockServer biased([](const httplib::Request&, httplib::Response& res) {
      MockReply(res, "Response 1");
    });
    preflab::client::ApiConfig cfg;
    cfg.endpoint = biased.Endpoint();
    cfg.retry.max_attempts = 2;
    cfg.retry.backoff_base_s = 0.01;
    const auto agg = preflab::client::JudgePair(cfg, "user: pick one", "left answer",
                                                "right answer", 1000, true, 20260825, nullptr);
    votes1 = static_cast<int>(agg.votes_response1);
    votes2 = static_cast<int>(agg.votes_response2);
    abstains = static_cast<int>(agg.abstains);
  }
  const double three_sigma = 3.0 * std::sqrt(1000.0 * 0.25);
  const bool bias_ok =
      abstains == 0 && votes1 + votes2 == 1000 && std::fabs(votes1 - 500.0) < three_sigma;

  // Cache: a second identical run is served entirely from disk.
  bool cache_ok = false;
  {
    TempDir dir("cache");
    MockServer echo([](const httplib::Request& req, httplib::Response& res) {
      (void)req;
      MockReply(res, "because it is better");
    });
    preflab::client::ApiConfig cfg;
    cfg.endpoint = echo.Endpoint();
    cfg.cache_dir = dir.path;
    cfg.retry.max_attempts = 2;
    cfg.retry.backoff_base_s = 0.01;
    preflab::corpus::Dataset ds;
    for (int i = 0; i < 4; ++i) {
      preflab::corpus::PreferenceRecord rec;
      rec.prompt = "prompt " + std::to_string(i);
      rec.chosen = "good " + std::to_string(i);
      rec.rejected = "bad " + std::to_string(i);
      ds.push_back(rec);
    }
    preflab::client::ClientStats first, second;
    const preflab::corpus::Dataset filled = preflab::client::GenerateRationales(
        cfg, ds, preflab::corpus::RationaleKind::kGeneral, false, &first);
    (void)filled;
    const preflab::corpus::Dataset refilled = preflab::client::GenerateRationales(
        cfg, ds, preflab::corpus::RationaleKind::kGeneral, false, &second);
    (void)refilled;
    cache_ok = first.requests == 4 && second.requests == 0 && second.cache_hits == 4 &&
               echo.hits() == 4;
  }

  // Concurrency: twelve slow requests through a cap of three in flight.
  int peak = 0;
  bool conc_ok = false;
  {
    std::atomic<int> in_flight{0};
    std::atomic<int> observed_peak{0};
    MockServer slow([&](const httplib::Request&, httplib::Response& res) {
      const int now = ++in_flight;
      int prev = observed_peak.load();
      while (now > prev && !observed_peak.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(15));
      --in_flight;
      MockReply(res, "steady answer");
    });
    preflab::client::ApiConfig cfg;
    cfg.endpoint = slow.Endpoint();
    cfg.max_in_flight = 3;
    cfg.retry.max_attempts = 2;
    cfg.retry.backoff_base_s = 0.01;
    preflab::corpus::Dataset ds;
    for (int i = 0; i < 12; ++i) {
      preflab::corpus::PreferenceRecord rec;
      rec.prompt = "p" + std::to_string(i);
      rec.chosen = "c" + std::to_string(i);
      rec.rejected = "r" + std::to_string(i);
      ds.push_back(rec);
    }
    preflab::client::ClientStats stats;
    const preflab::corpus::Dataset out = preflab::client::GenerateRationales(
        cfg, ds, preflab::corpus::RationaleKind::kDetailed, false, &stats);
    (void)out;
    peak = observed_peak.load();
    conc_ok = stats.requests == 12 && stats.failures == 0 && peak <= 3 && peak >= 1;
  }

  *detail = Fmt("shuffled biased judge split %d/%d (3-sigma %.1f); cached rerun issued 0 "
                "requests; peak in-flight %d of cap 3",
                votes1, votes2, three_sigma, peak);
  return bias_ok && cache_ok && conc_ok;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int number;
    const char* title;
    std::function<bool(std::string*)> fn;
  };
  const std::vector<Entry> entries = {
      {1, "closed-form information vs Monte Carlo", Criterion1},
      {2, "channel endpoint identities", Criterion2},
      {3, "moderate-regime monotonicity and sweep csv", Criterion3},
      {4, "objective gradients vs finite differences", Criterion4},
      {5, "zero-weight reduction identities", Criterion5},
      {6, "generalization bound arithmetic", Criterion6},
      {7, "error-probability bound examples and ordering", Criterion7},
      {8, "sample-efficiency direction", Criterion8},
      {9, "rationale-corruption direction", Criterion9},
      {10, "uninformative-rationale null", Criterion10},
      {11, "experiment determinism", Criterion11},
      {12, "client contract against loopback mock", Criterion12},
  };

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& entry : entries) {
    if (!wanted.empty() && wanted.count(entry.number) == 0) continue;
    ++ran;
    bool ok = false;
    std::string detail;
    try {
      ok = entry.fn(&detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = Fmt("exception: %s", e.what());
    }
    if (!ok) ++failed;
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", entry.number, entry.title,
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
