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

#ifndef PREFLAB_THEORY_H_
#define PREFLAB_THEORY_H_

#include <cstdint>
#include <string>
#include <vector>

namespace preflab::theory {

// All information quantities are in nats.
//
// Model: a pair comparison S fixes q = P(Z=1|S), where Z=1 means the first
// response is preferred. A binary rationale signal R is emitted through an
// asymmetric channel: P(R=1|Z=1) = beta, P(R=1|Z=0) = alpha. The conditional
// mutual information I(Z;R|S) measures how much one rationale bit reveals
// about the preference label beyond the comparison itself.

struct PreferenceLaw {
  double p = 0.5;    // base preference probability
  double eps = 0.0;  // additive bias; q = p + eps must land in [0,1]
};

struct RationaleChannel {
  double alpha = 0.0;  // P(R=1 | Z=0)
  double beta = 1.0;   // P(R=1 | Z=1)
};

struct RationalePosteriors {
  double p_r1;  // P(R=1 | S)
  double q1;    // P(Z=1 | S, R=1)
  double q0;    // P(Z=1 | S, R=0)
};

struct McEstimate {
  double estimate;
  double std_err;
};

// Lower/upper bound values are clamped to their meaningful range; `raw`
// carries the unclamped arithmetic for reporting.
struct BoundValue {
  double value;
  double raw;
};

// Inputs for the generalization bounds. sigma is the subgaussian scale, n the
// sample count, i_theta_z = I(theta;Z), i_theta_s_given_z = I(theta;S|Z),
// delta_cap and eta1 enter the rationale-aware bound; eta2 is carried for
// reporting only and appears in no formula.
struct BoundInputs {
  double sigma = 1.0;
  double n = 1.0;
  double i_theta_z = 0.0;
  double i_theta_s_given_z = 0.0;
  double delta_cap = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
};

struct SweepRow {
  double gamma;
  double cmi;
  double entropy_term_1;  // weighted: P(R=1|S)   * H(P(Z=1|S,R=1))
  double entropy_term_2;  // weighted: P(R=0|S)   * H(P(Z=1|S,R=0))
};

// H(p) = -p ln p - (1-p) ln(1-p), with 0 ln 0 = 0. Errors on p outside [0,1].
double BinaryEntropy(double p);

// q = p + eps, validated into [0,1] (rejected, not clipped).
double EffectivePreference(const PreferenceLaw& law);

// Exact posteriors of the two-point channel. Errors with degenerate-channel
// when P(R=1|S) is 0 or 1 (a posterior would be conditioned on a null event).
RationalePosteriors Posteriors(const PreferenceLaw& law, const RationaleChannel& channel);

// Closed-form I(Z;R|S) for one comparison:
//   I = H(q) - P(R=1|S) H(q1) - P(R=0|S) H(q0).
double CondMutualInfo(const PreferenceLaw& law, const RationaleChannel& channel);

// Moderate-informativeness channel beta = 0.5 + gamma, alpha = 0.5 - gamma,
// gamma in [0, 0.5].
double CmiModerate(const PreferenceLaw& law, double gamma);

// Monte-Carlo estimate of I(Z;R|S) by sampling Z ~ Bernoulli(q) and R|Z from
// the channel, then plugging empirical cell frequencies into the KL form.
// std_err is the delta-method standard error of the plug-in estimate.
McEstimate McMutualInfo(const PreferenceLaw& law, const RationaleChannel& channel,
                        uint64_t n_samples, uint64_t seed);

std::vector<SweepRow> RegimeSweep(const PreferenceLaw& law, const std::vector<double>& gammas);

// CSV with header gamma,cmi,entropy_term_1,entropy_term_2.
std::string SweepToCsv(const std::vector<SweepRow>& rows);

// Identification error lower bound (Fano form), clamped at 0:
//   P_e >= (H(Z) - I(R;theta) - I(Z;theta|R) - H(err_tol)) / ln(n_outcomes).
BoundValue FanoLowerBound(double h_z, double i_r_theta, double i_z_theta_given_r,
                          double err_tol, uint64_t n_outcomes);

// Error upper bound, clamped into [0, 0.5]:
//   P_e <= (H(Z) - I(R;theta) + H(R|Z)) / ln 2.
BoundValue ErrUpperBound(double h_z, double i_r_theta, double h_r_given_z);

// sqrt( (2 sigma^2 / n) * (I(theta;Z) + (delta_cap + eta1)) ).
double GenBoundWithRationale(const BoundInputs& b);

// CSV "n,bound_ra,bound_un": both generalization bounds swept over sample
// counts with the remaining inputs held fixed.
std::string BoundsCsv(const BoundInputs& base, const std::vector<double>& sample_counts);

// sqrt( (2 sigma^2 / n) * (I(theta;Z) + I(theta;S|Z)) ).
double GenBoundWithoutRationale(const BoundInputs& b);

}  // namespace preflab::theory

#endif  // PREFLAB_THEORY_H_
