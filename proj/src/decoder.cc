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

// Pre-LN causal transformer, forward and exact reverse-mode backward.
//
//   x   = emb[tok] + pos
//   per layer:  a = LN1(x); x += MultiHeadAttention(a)
//               m = LN2(x); x += ReLU(m W1 + b1) W2 + b2
//   logits = LNf(x) Wu
//
// The backward pass mirrors the forward exactly; gradients are accumulated
// into a caller-owned flat buffer so batch losses can chain-rule per-sequence
// contributions with arbitrary scalar weights.

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "policy_internal.h"
#include "preflab/error.h"
#include "preflab/rng.h"

namespace preflab::policy::internal {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<Mat>;
using CMapM = Eigen::Map<const Mat>;
using RowV = Eigen::RowVectorXd;
using MapR = Eigen::Map<RowV>;
using CMapR = Eigen::Map<const RowV>;

constexpr double kLnEps = 1e-5;

struct LayerOffsets {
  size_t wq, bq, wk, bk, wv, bv, wo, bo;
  size_t ln1g, ln1b;
  size_t w1, b1, w2, b2;
  size_t ln2g, ln2b;
};

struct Layout {
  int32_t v, d, h, n_layers, c, f;
  size_t emb, pos;
  std::vector<LayerOffsets> layers;
  size_t lnfg, lnfb, unemb;
  size_t total;
};

Layout MakeLayout(const DecoderArch& arch, int32_t vocab_size) {
  Layout lo;
  lo.v = vocab_size;
  lo.d = arch.dim;
  lo.h = arch.heads;
  lo.n_layers = arch.layers;
  lo.c = arch.context_len;
  lo.f = 4 * arch.dim;
  size_t d = static_cast<size_t>(lo.d);
  size_t f = static_cast<size_t>(lo.f);
  size_t v = static_cast<size_t>(lo.v);
  size_t at = 0;
  lo.emb = at;
  at += v * d;
  lo.pos = at;
  at += static_cast<size_t>(lo.c) * d;
  for (int32_t l = 0; l < lo.n_layers; ++l) {
    LayerOffsets L;
    L.wq = at; at += d * d;
    L.bq = at; at += d;
    L.wk = at; at += d * d;
    L.bk = at; at += d;
    L.wv = at; at += d * d;
    L.bv = at; at += d;
    L.wo = at; at += d * d;
    L.bo = at; at += d;
    L.ln1g = at; at += d;
    L.ln1b = at; at += d;
    L.w1 = at; at += d * f;
    L.b1 = at; at += f;
    L.w2 = at; at += f * d;
    L.b2 = at; at += d;
    L.ln2g = at; at += d;
    L.ln2b = at; at += d;
    lo.layers.push_back(L);
  }
  lo.lnfg = at; at += d;
  lo.lnfb = at; at += d;
  lo.unemb = at; at += d * v;
  lo.total = at;
  return lo;
}

struct LnCache {
  Mat xhat;              // normalized rows
  Eigen::VectorXd rstd;  // 1 / sqrt(var + eps) per row
};

// y = g .* xhat + b, row-wise over T x d input.
Mat LayerNormFwd(const Mat& x, CMapR g, CMapR b, LnCache* cache) {
  Eigen::Index t = x.rows(), d = x.cols();
  cache->xhat.resize(t, d);
  cache->rstd.resize(t);
  Mat y(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    double mean = x.row(i).mean();
    double var = (x.row(i).array() - mean).square().mean();
    double rstd = 1.0 / std::sqrt(var + kLnEps);
    cache->rstd(i) = rstd;
    cache->xhat.row(i) = (x.row(i).array() - mean) * rstd;
    y.row(i) = cache->xhat.row(i).cwiseProduct(g) + b;
  }
  return y;
}

// Returns dx; accumulates dg/db.
Mat LayerNormBwd(const Mat& dy, const LnCache& cache, CMapR g, MapR dg, MapR db) {
  Eigen::Index t = dy.rows(), d = dy.cols();
  Mat dx(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    RowV dxhat = dy.row(i).cwiseProduct(g);
    double m1 = dxhat.mean();
    double m2 = dxhat.cwiseProduct(cache.xhat.row(i)).mean();
    dx.row(i) =
        (dxhat.array() - m1 - cache.xhat.row(i).array() * m2) * cache.rstd(i);
    dg += dy.row(i).cwiseProduct(cache.xhat.row(i));
    db += dy.row(i);
  }
  return dx;
}

struct LayerCache {
  Mat x_in;  // block input (pre-LN1)
  LnCache ln1;
  Mat a;                   // LN1 output
  Mat q, k, v;             // T x d
  std::vector<Mat> probs;  // per head, T x T lower-triangular rows
  Mat concat;              // attention context, T x d
  Mat x_mid;               // after attention residual (pre-LN2)
  LnCache ln2;
  Mat m;       // LN2 output
  Mat h_pre;   // T x f
  Mat h_post;  // relu(h_pre)
};

struct Cache {
  Mat x0;
  std::vector<LayerCache> layers;
  Mat x_last;  // output of final block (pre-LNf)
  LnCache lnf;
  Mat fout;    // LNf output
  Mat logits;  // T x v
};

void Forward(const Layout& lo, const double* p, const std::vector<TokenId>& seq, Cache* c) {
  Eigen::Index t = static_cast<Eigen::Index>(seq.size());
  int32_t d = lo.d;
  int32_t dh = d / lo.h;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  CMapM emb(p + lo.emb, lo.v, d);
  CMapM pos(p + lo.pos, lo.c, d);

  c->x0.resize(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    c->x0.row(i) = emb.row(seq[static_cast<size_t>(i)]) + pos.row(i);
  }
  Mat x = c->x0;
  c->layers.resize(static_cast<size_t>(lo.n_layers));
  for (int32_t l = 0; l < lo.n_layers; ++l) {
    const LayerOffsets& L = lo.layers[static_cast<size_t>(l)];
    LayerCache& lc = c->layers[static_cast<size_t>(l)];
    lc.x_in = x;
    lc.a = LayerNormFwd(x, CMapR(p + L.ln1g, d), CMapR(p + L.ln1b, d), &lc.ln1);

    CMapM wq(p + L.wq, d, d), wk(p + L.wk, d, d), wv(p + L.wv, d, d), wo(p + L.wo, d, d);
    CMapR bq(p + L.bq, d), bk(p + L.bk, d), bv(p + L.bv, d), bo(p + L.bo, d);
    lc.q = (lc.a * wq).rowwise() + bq;
    lc.k = (lc.a * wk).rowwise() + bk;
    lc.v = (lc.a * wv).rowwise() + bv;

    lc.concat.setZero(t, d);
    lc.probs.assign(static_cast<size_t>(lo.h), Mat());
    for (int32_t h = 0; h < lo.h; ++h) {
      auto qh = lc.q.middleCols(h * dh, dh);
      auto kh = lc.k.middleCols(h * dh, dh);
      auto vh = lc.v.middleCols(h * dh, dh);
      Mat& probs = lc.probs[static_cast<size_t>(h)];
      probs.setZero(t, t);
      for (Eigen::Index i = 0; i < t; ++i) {
        double mx = -1e300;
        for (Eigen::Index j = 0; j <= i; ++j) {
          double s = qh.row(i).dot(kh.row(j)) * scale;
          probs(i, j) = s;
          mx = std::max(mx, s);
        }
        double total = 0.0;
        for (Eigen::Index j = 0; j <= i; ++j) {
          probs(i, j) = std::exp(probs(i, j) - mx);
          total += probs(i, j);
        }
        for (Eigen::Index j = 0; j <= i; ++j) probs(i, j) /= total;
      }
      lc.concat.middleCols(h * dh, dh) = probs * vh;
    }
    x = lc.x_in + ((lc.concat * wo).rowwise() + bo);
    lc.x_mid = x;

    lc.m = LayerNormFwd(x, CMapR(p + L.ln2g, d), CMapR(p + L.ln2b, d), &lc.ln2);
    CMapM w1(p + L.w1, d, lo.f), w2(p + L.w2, lo.f, d);
    CMapR b1(p + L.b1, lo.f), b2(p + L.b2, d);
    lc.h_pre = (lc.m * w1).rowwise() + b1;
    lc.h_post = lc.h_pre.cwiseMax(0.0);
    x = lc.x_mid + ((lc.h_post * w2).rowwise() + b2);
  }
  c->x_last = x;
  c->fout = LayerNormFwd(x, CMapR(p + lo.lnfg, d), CMapR(p + lo.lnfb, d), &c->lnf);
  CMapM unemb(p + lo.unemb, d, lo.v);
  c->logits = c->fout * unemb;
}

// dlogits is T x v (rows for non-predicted positions must be zero).
void Backward(const Layout& lo, const double* p, const std::vector<TokenId>& seq, const Cache& c,
              const Mat& dlogits, double* g) {
  Eigen::Index t = static_cast<Eigen::Index>(seq.size());
  int32_t d = lo.d;
  int32_t dh = d / lo.h;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  CMapM unemb(p + lo.unemb, d, lo.v);
  MapM dunemb(g + lo.unemb, d, lo.v);
  dunemb += c.fout.transpose() * dlogits;
  Mat dfout = dlogits * unemb.transpose();

  Mat dx = LayerNormBwd(dfout, c.lnf, CMapR(p + lo.lnfg, d), MapR(g + lo.lnfg, d),
                        MapR(g + lo.lnfb, d));

  for (int32_t l = lo.n_layers - 1; l >= 0; --l) {
    const LayerOffsets& L = lo.layers[static_cast<size_t>(l)];
    const LayerCache& lc = c.layers[static_cast<size_t>(l)];

    // MLP block: x_out = x_mid + relu(LN2(x_mid) W1 + b1) W2 + b2
    CMapM w1(p + L.w1, d, lo.f), w2(p + L.w2, lo.f, d);
    Mat dh_post = dx * w2.transpose();
    MapM dw2(g + L.w2, lo.f, d);
    dw2 += lc.h_post.transpose() * dx;
    MapR db2(g + L.b2, d);
    db2 += dx.colwise().sum();
    Mat dh_pre = (lc.h_pre.array() > 0.0).select(dh_post, 0.0);
    MapM dw1(g + L.w1, d, lo.f);
    dw1 += lc.m.transpose() * dh_pre;
    MapR db1(g + L.b1, lo.f);
    db1 += dh_pre.colwise().sum();
    Mat dm = dh_pre * w1.transpose();
    Mat dx_mid = LayerNormBwd(dm, lc.ln2, CMapR(p + L.ln2g, d), MapR(g + L.ln2g, d),
                              MapR(g + L.ln2b, d));
    dx_mid += dx;  // residual

    // Attention block: x_mid = x_in + (concat Wo + bo)
    CMapM wq(p + L.wq, d, d), wk(p + L.wk, d, d), wv(p + L.wv, d, d), wo(p + L.wo, d, d);
    Mat dconcat = dx_mid * wo.transpose();
    MapM dwo(g + L.wo, d, d);
    dwo += lc.concat.transpose() * dx_mid;
    MapR dbo(g + L.bo, d);
    dbo += dx_mid.colwise().sum();

    Mat dq = Mat::Zero(t, d), dk = Mat::Zero(t, d), dv = Mat::Zero(t, d);
    for (int32_t h = 0; h < lo.h; ++h) {
      auto qh = lc.q.middleCols(h * dh, dh);
      auto kh = lc.k.middleCols(h * dh, dh);
      auto vh = lc.v.middleCols(h * dh, dh);
      const Mat& probs = lc.probs[static_cast<size_t>(h)];
      auto dctx = dconcat.middleCols(h * dh, dh);
      Mat dprobs = dctx * vh.transpose();
      dv.middleCols(h * dh, dh) = probs.transpose() * dctx;
      Mat dscores = Mat::Zero(t, t);
      for (Eigen::Index i = 0; i < t; ++i) {
        double dot = 0.0;
        for (Eigen::Index j = 0; j <= i; ++j) dot += dprobs(i, j) * probs(i, j);
        for (Eigen::Index j = 0; j <= i; ++j) {
          dscores(i, j) = probs(i, j) * (dprobs(i, j) - dot);
        }
      }
      dq.middleCols(h * dh, dh) = dscores * kh * scale;
      dk.middleCols(h * dh, dh) = dscores.transpose() * qh * scale;
    }

    Mat da = dq * wq.transpose() + dk * wk.transpose() + dv * wv.transpose();
    MapM dwq(g + L.wq, d, d), dwk(g + L.wk, d, d), dwv(g + L.wv, d, d);
    dwq += lc.a.transpose() * dq;
    dwk += lc.a.transpose() * dk;
    dwv += lc.a.transpose() * dv;
    MapR dbq(g + L.bq, d), dbk(g + L.bk, d), dbv(g + L.bv, d);
    dbq += dq.colwise().sum();
    dbk += dk.colwise().sum();
    dbv += dv.colwise().sum();

    Mat dx_in = LayerNormBwd(da, lc.ln1, CMapR(p + L.ln1g, d), MapR(g + L.ln1g, d),
                             MapR(g + L.ln1b, d));
    dx = dx_in + dx_mid;  // residual
  }

  MapM demb(g + lo.emb, lo.v, d);
  MapM dpos(g + lo.pos, lo.c, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    demb.row(seq[static_cast<size_t>(i)]) += dx.row(i);
    dpos.row(i) += dx.row(i);
  }
}

}  // namespace

size_t DecoderParamCount(const DecoderArch& arch, int32_t vocab_size) {
  return MakeLayout(arch, vocab_size).total;
}

void DecoderRandomInit(const DecoderArch& arch, int32_t vocab_size, uint64_t seed,
                       std::vector<double>* params) {
  Layout lo = MakeLayout(arch, vocab_size);
  Rng rng(seed);
  auto gauss_block = [&](size_t off, size_t n) {
    for (size_t i = 0; i < n; ++i) (*params)[off + i] = 0.02 * rng.NextGaussian();
  };
  auto ones_block = [&](size_t off, size_t n) {
    for (size_t i = 0; i < n; ++i) (*params)[off + i] = 1.0;
  };
  size_t d = static_cast<size_t>(lo.d), f = static_cast<size_t>(lo.f),
         v = static_cast<size_t>(lo.v);
  gauss_block(lo.emb, v * d);
  gauss_block(lo.pos, static_cast<size_t>(lo.c) * d);
  for (const LayerOffsets& L : lo.layers) {
    gauss_block(L.wq, d * d);
    gauss_block(L.wk, d * d);
    gauss_block(L.wv, d * d);
    gauss_block(L.wo, d * d);
    gauss_block(L.w1, d * f);
    gauss_block(L.w2, f * d);
    ones_block(L.ln1g, d);
    ones_block(L.ln2g, d);
  }
  ones_block(lo.lnfg, d);
  gauss_block(lo.unemb, d * v);
}

double DecoderLogprob(const DecoderArch& arch, int32_t vocab_size,
                      const std::vector<double>& params, const std::vector<TokenId>& seq,
                      size_t first_pred) {
  Layout lo = MakeLayout(arch, vocab_size);
  Cache c;
  Forward(lo, params.data(), seq, &c);
  double total = 0.0;
  for (size_t pos = first_pred; pos < seq.size(); ++pos) {
    const double* row = c.logits.row(static_cast<Eigen::Index>(pos - 1)).data();
    total += row[seq[pos]] - LogSumExp(row, vocab_size);
  }
  return total;
}

void DecoderLogprobGrad(const DecoderArch& arch, int32_t vocab_size,
                        const std::vector<double>& params, const std::vector<TokenId>& seq,
                        size_t first_pred, double scale, std::vector<double>* grad) {
  Layout lo = MakeLayout(arch, vocab_size);
  Cache c;
  Forward(lo, params.data(), seq, &c);
  Mat dlogits = Mat::Zero(static_cast<Eigen::Index>(seq.size()), vocab_size);
  for (size_t pos = first_pred; pos < seq.size(); ++pos) {
    Eigen::Index row = static_cast<Eigen::Index>(pos - 1);
    const double* lrow = c.logits.row(row).data();
    double lse = LogSumExp(lrow, vocab_size);
    for (int32_t i = 0; i < vocab_size; ++i) {
      dlogits(row, i) -= scale * std::exp(lrow[i] - lse);
    }
    dlogits(row, seq[pos]) += scale;
  }
  Backward(lo, params.data(), seq, c, dlogits, grad->data());
}

void DecoderNextLogits(const DecoderArch& arch, int32_t vocab_size,
                       const std::vector<double>& params, const std::vector<TokenId>& seq,
                       std::vector<double>* logits) {
  Layout lo = MakeLayout(arch, vocab_size);
  Cache c;
  Forward(lo, params.data(), seq, &c);
  Eigen::Index last = static_cast<Eigen::Index>(seq.size()) - 1;
  logits->resize(static_cast<size_t>(vocab_size));
  for (int32_t i = 0; i < vocab_size; ++i) (*logits)[i] = c.logits(last, i);
}

}  // namespace preflab::policy::internal
