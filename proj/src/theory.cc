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

#include "preflab/theory.h"

#include <cmath>
#include <cstdio>

#include "preflab/error.h"
#include "preflab/rng.h"

namespace preflab::theory {

namespace {

void CheckProb(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(name) + " must lie in [0,1], got " + std::to_string(p));
  }
}

double Clamp01(double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); }

}  // namespace

double BinaryEntropy(double p) {
  CheckProb(p, "p");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

double EffectivePreference(const PreferenceLaw& law) {
  CheckProb(law.p, "p");
  double q = law.p + law.eps;
  if (!(q >= 0.0 && q <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument,
         "p + eps = " + std::to_string(q) + " falls outside [0,1]");
  }
  return q;
}

RationalePosteriors Posteriors(const PreferenceLaw& law, const RationaleChannel& channel) {
  CheckProb(channel.alpha, "alpha");
  CheckProb(channel.beta, "beta");
  double q = EffectivePreference(law);
  double p_r1 = channel.beta * q + channel.alpha * (1.0 - q);
  if (p_r1 <= 0.0 || p_r1 >= 1.0) {
    Fail(ErrorCode::kDegenerateChannel,
         "P(R=1|S) = " + std::to_string(p_r1) + "; posteriors undefined");
  }
  RationalePosteriors post;
  post.p_r1 = p_r1;
  post.q1 = Clamp01(channel.beta * q / p_r1);
  post.q0 = Clamp01((1.0 - channel.beta) * q / (1.0 - p_r1));
  return post;
}

double CondMutualInfo(const PreferenceLaw& law, const RationaleChannel& channel) {
  double q = EffectivePreference(law);
  RationalePosteriors post = Posteriors(law, channel);
  double cmi = BinaryEntropy(q) - post.p_r1 * BinaryEntropy(post.q1) -
               (1.0 - post.p_r1) * BinaryEntropy(post.q0);
  // Mutual information is non-negative; tolerate only FP residue.
  if (cmi < 0.0) {
    if (cmi < -1e-12) {
      Fail(ErrorCode::kNumeric, "conditional MI evaluated to " + std::to_string(cmi));
    }
    cmi = 0.0;
  }
  return cmi;
}

double CmiModerate(const PreferenceLaw& law, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 0.5)) {
    Fail(ErrorCode::kInvalidArgument, "gamma must lie in [0, 0.5]");
  }
  RationaleChannel channel;
  channel.beta = 0.5 + gamma;
  channel.alpha = 0.5 - gamma;
  return CondMutualInfo(law, channel);
}

McEstimate McMutualInfo(const PreferenceLaw& law, const RationaleChannel& channel,
                        uint64_t n_samples, uint64_t seed) {
  CheckProb(channel.alpha, "alpha");
  CheckProb(channel.beta, "beta");
  double q = EffectivePreference(law);
  if (n_samples == 0) {
    Fail(ErrorCode::kInvalidArgument, "n_samples must be positive");
  }
  Rng rng(seed);
  uint64_t counts[2][2] = {{0, 0}, {0, 0}};
  for (uint64_t i = 0; i < n_samples; ++i) {
    int z = rng.NextBernoulli(q) ? 1 : 0;
    double pr1 = z ? channel.beta : channel.alpha;
    int r = rng.NextBernoulli(pr1) ? 1 : 0;
    ++counts[z][r];
  }
  double n = static_cast<double>(n_samples);
  double pz[2], pr[2], pj[2][2];
  pz[1] = (counts[1][0] + counts[1][1]) / n;
  pz[0] = 1.0 - pz[1];
  pr[1] = (counts[0][1] + counts[1][1]) / n;
  pr[0] = 1.0 - pr[1];
  double est = 0.0;
  double second_moment = 0.0;
  for (int z = 0; z < 2; ++z) {
    for (int r = 0; r < 2; ++r) {
      pj[z][r] = counts[z][r] / n;
      if (pj[z][r] == 0.0) continue;
      double g = std::log(pj[z][r] / (pz[z] * pr[r]));
      est += pj[z][r] * g;
      second_moment += pj[z][r] * g * g;
    }
  }
  McEstimate out;
  out.estimate = est;
  double var = second_moment - est * est;
  if (var < 0.0) var = 0.0;
  out.std_err = std::sqrt(var / n);
  return out;
}

std::vector<SweepRow> RegimeSweep(const PreferenceLaw& law, const std::vector<double>& gammas) {
  std::vector<SweepRow> rows;
  rows.reserve(gammas.size());
  for (double g : gammas) {
    if (!(g >= 0.0 && g <= 0.5)) {
      Fail(ErrorCode::kInvalidArgument, "sweep gamma must lie in [0, 0.5]");
    }
    RationaleChannel channel{0.5 - g, 0.5 + g};
    RationalePosteriors post = Posteriors(law, channel);
    SweepRow row;
    row.gamma = g;
    row.entropy_term_1 = post.p_r1 * BinaryEntropy(post.q1);
    row.entropy_term_2 = (1.0 - post.p_r1) * BinaryEntropy(post.q0);
    row.cmi = CondMutualInfo(law, channel);
    rows.push_back(row);
  }
  return rows;
}

std::string SweepToCsv(const std::vector<SweepRow>& rows) {
  std::string out = "gamma,cmi,entropy_term_1,entropy_term_2\n";
  char buf[160];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.9f,%.9f\n", r.gamma, r.cmi,
                  r.entropy_term_1, r.entropy_term_2);
    out += buf;
  }
  return out;
}

BoundValue FanoLowerBound(double h_z, double i_r_theta, double i_z_theta_given_r,
                          double err_tol, uint64_t n_outcomes) {
  if (n_outcomes < 2) {
    Fail(ErrorCode::kInvalidArgument, "n_outcomes must be at least 2");
  }
  CheckProb(err_tol, "err_tol");
  if (h_z < 0.0 || i_r_theta < 0.0 || i_z_theta_given_r < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "entropies and informations must be non-negative");
  }
  double raw = (h_z - i_r_theta - i_z_theta_given_r - BinaryEntropy(err_tol)) /
               std::log(static_cast<double>(n_outcomes));
  BoundValue v;
  v.raw = raw;
  v.value = raw < 0.0 ? 0.0 : raw;
  return v;
}

BoundValue ErrUpperBound(double h_z, double i_r_theta, double h_r_given_z) {
  if (h_z < 0.0 || i_r_theta < 0.0 || h_r_given_z < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "entropies and informations must be non-negative");
  }
  double raw = (h_z - i_r_theta + h_r_given_z) / std::log(2.0);
  BoundValue v;
  v.raw = raw;
  v.value = raw < 0.0 ? 0.0 : (raw > 0.5 ? 0.5 : raw);
  return v;
}

namespace {

void CheckBoundInputs(const BoundInputs& b) {
  if (!(b.sigma > 0.0) || !(b.n > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "sigma and n must be positive");
  }
  if (b.i_theta_z < 0.0 || b.i_theta_s_given_z < 0.0 || b.delta_cap < 0.0 || b.eta1 < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "information terms must be non-negative");
  }
}

}  // namespace

double GenBoundWithRationale(const BoundInputs& b) {
  CheckBoundInputs(b);
  // (delta_cap + eta1) is grouped first so that this bound and the
  // without-rationale bound agree bit-for-bit when
  // i_theta_s_given_z == delta_cap + eta1.
  return std::sqrt(2.0 * b.sigma * b.sigma / b.n * (b.i_theta_z + (b.delta_cap + b.eta1)));
}

double GenBoundWithoutRationale(const BoundInputs& b) {
  CheckBoundInputs(b);
  return std::sqrt(2.0 * b.sigma * b.sigma / b.n * (b.i_theta_z + b.i_theta_s_given_z));
}

std::string BoundsCsv(const BoundInputs& base, const std::vector<double>& sample_counts) {
  std::string out = "n,bound_ra,bound_un\n";
  char row[96];
  for (double n : sample_counts) {
    BoundInputs b = base;
    b.n = n;
    std::snprintf(row, sizeof(row), "%g,%.9f,%.9f\n", n, GenBoundWithRationale(b),
                  GenBoundWithoutRationale(b));
    out += row;
  }
  return out;
}

}  // namespace preflab::theory
