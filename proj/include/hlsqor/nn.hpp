// From-scratch message-passing network: feature encoder, three propagation
// layers (gcn or sage variant), sum+max pooled readout, MLP heads. Reverse-mode
// gradients are hand-derived per layer and checked against finite differences
// in the test suite. Double precision, seeded, single-threaded training.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlsqor/features.hpp"

namespace hlsqor {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }

  void zero() { std::fill(d.begin(), d.end(), 0.0); }
};

// y (n x k) = a (n x m) * w^T (m x k), w stored k x m.
inline void matmul_wt(const Mat& a, const Mat& w, Mat& y) {
  y = Mat(a.rows, w.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < w.rows; ++k) {
      double acc = 0;
      const double* ar = &a.d[static_cast<size_t>(i) * a.cols];
      const double* wr = &w.d[static_cast<size_t>(k) * w.cols];
      for (int j = 0; j < a.cols; ++j) acc += ar[j] * wr[j];
      y.at(i, k) = acc;
    }
}

// w_grad (k x m) += dy^T (k x n) * a (n x m)
inline void acc_wgrad(const Mat& dy, const Mat& a, Mat& wg) {
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < dy.cols; ++k) {
      double g = dy.at(i, k);
      if (g == 0) continue;
      double* wr = &wg.d[static_cast<size_t>(k) * wg.cols];
      const double* ar = &a.d[static_cast<size_t>(i) * a.cols];
      for (int j = 0; j < a.cols; ++j) wr[j] += g * ar[j];
    }
}

// da (n x m) += dy (n x k) * w (k x m)
inline void acc_dinput(const Mat& dy, const Mat& w, Mat& da) {
  for (int i = 0; i < dy.rows; ++i)
    for (int k = 0; k < dy.cols; ++k) {
      double g = dy.at(i, k);
      if (g == 0) continue;
      const double* wr = &w.d[static_cast<size_t>(k) * w.cols];
      double* ar = &da.d[static_cast<size_t>(i) * da.cols];
      for (int j = 0; j < w.cols; ++j) ar[j] += g * wr[j];
    }
}

enum class GnnVariant { Gcn, Sage };

inline const char* variant_name(GnnVariant v) {
  return v == GnnVariant::Gcn ? "gcn" : "sage";
}

inline GnnVariant variant_from_name(const std::string& s) {
  if (s == "gcn") return GnnVariant::Gcn;
  if (s == "sage") return GnnVariant::Sage;
  throw std::runtime_error("unknown GNN variant '" + s + "'");
}

inline constexpr int kPropagationLayers = 3;
inline constexpr int kRefineInputs = 4;  // il, log tc, log ii, pipelined
// Graph-level summary features: log1p of the per-graph totals of each raw
// numeric node field. Resource targets are sums over nodes, so these keep the
// feature-to-target relation affine in log1p space.
inline constexpr int kGraphFeatureCount = kNumericFeatureCount;

// One trained model: trunk + scalar head; latency models for inner loops add
// a refinement MLP that combines the IL head output with loop-level features.
struct ModelParams {
  GnnVariant variant = GnnVariant::Sage;
  int hidden = 32;
  bool has_refine = false;

  Mat enc_w, enc_b;                               // H x 25, 1 x H
  Mat prop_w[kPropagationLayers];                 // gcn: H x H; sage: self
  Mat prop_wn[kPropagationLayers];                // sage neighbor weights
  Mat prop_b[kPropagationLayers];                 // 1 x H
  Mat head_w1, head_b1, head_w2, head_b2;         // H x (2H+2F), 1 x H, 1 x H, 1 x 1
  Mat refine_w1, refine_b1, refine_w2, refine_b2; // H x 4, 1 x H, 1 x H, 1 x 1

  std::vector<Mat*> tensors() {
    std::vector<Mat*> t{&enc_w, &enc_b};
    for (int k = 0; k < kPropagationLayers; ++k) {
      t.push_back(&prop_w[k]);
      if (variant == GnnVariant::Sage) t.push_back(&prop_wn[k]);
      t.push_back(&prop_b[k]);
    }
    t.insert(t.end(), {&head_w1, &head_b1, &head_w2, &head_b2});
    if (has_refine)
      t.insert(t.end(), {&refine_w1, &refine_b1, &refine_w2, &refine_b2});
    return t;
  }
  std::vector<const Mat*> tensors() const {
    auto t = const_cast<ModelParams*>(this)->tensors();
    return {t.begin(), t.end()};
  }
};

// Platform-independent uniform in [-a, a).
inline double seeded_uniform(std::mt19937_64& rng, double a) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
  return (2.0 * u - 1.0) * a;
}

inline void glorot_init(Mat& m, int fan_in, int fan_out, std::mt19937_64& rng) {
  double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& x : m.d) x = seeded_uniform(rng, a);
}

inline ModelParams init_model(GnnVariant variant, int hidden, bool has_refine,
                              uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.variant = variant;
  p.hidden = hidden;
  p.has_refine = has_refine;
  int H = hidden, F = kEncodedLength;
  p.enc_w = Mat(H, F);
  glorot_init(p.enc_w, F, H, rng);
  p.enc_b = Mat(1, H);
  for (int k = 0; k < kPropagationLayers; ++k) {
    p.prop_w[k] = Mat(H, H);
    glorot_init(p.prop_w[k], H, H, rng);
    p.prop_wn[k] = Mat(H, H);
    if (variant == GnnVariant::Sage) glorot_init(p.prop_wn[k], H, H, rng);
    p.prop_b[k] = Mat(1, H);
  }
  p.head_w1 = Mat(H, 2 * H + 2 * F + kGraphFeatureCount);
  glorot_init(p.head_w1, 2 * H + 2 * F + kGraphFeatureCount, H, rng);
  p.head_b1 = Mat(1, H);
  p.head_w2 = Mat(1, H);
  glorot_init(p.head_w2, H, 1, rng);
  p.head_b2 = Mat(1, 1);
  p.refine_w1 = Mat(H, kRefineInputs);
  p.refine_b1 = Mat(1, H);
  p.refine_w2 = Mat(1, H);
  p.refine_b2 = Mat(1, 1);
  if (has_refine) {
    glorot_init(p.refine_w1, kRefineInputs, H, rng);
    glorot_init(p.refine_w2, H, 1, rng);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Graph input.

struct GraphInput {
  int n = 0;
  Mat x;  // n x 25 encoded features
  std::vector<double> gfeat = std::vector<double>(kGraphFeatureCount, 0.0);
  std::vector<std::pair<int, int>> und_edges;  // unique undirected pairs, no self loops
  // Loop-level features (inner samples): raw TC / II and the pipelined flag.
  double tripcount = 1, ii = 0, pipelined = 0;
  // Labels in natural units; il only meaningful for inner samples.
  double label = 0, label_il = 0;

  std::vector<std::vector<int>> neighbors() const {
    std::vector<std::vector<int>> nb(static_cast<size_t>(n));
    for (auto& [a, b] : und_edges) {
      nb[static_cast<size_t>(a)].push_back(b);
      nb[static_cast<size_t>(b)].push_back(a);
    }
    return nb;
  }
};

inline GraphInput make_graph_input(const Cdfg& g, const NormStats& norm) {
  GraphInput in;
  in.n = static_cast<int>(g.nodes.size());
  in.x = Mat(in.n, kEncodedLength);
  for (auto& nd : g.nodes) {
    auto v = encode(nd.feat, nd.optype, norm);
    for (int j = 0; j < kEncodedLength; ++j) in.x.at(nd.id, j) = v[static_cast<size_t>(j)];
    auto raw = numeric_fields(nd.feat);
    for (int k = 0; k < kGraphFeatureCount; ++k) in.gfeat[static_cast<size_t>(k)] += raw[static_cast<size_t>(k)];
  }
  for (auto& v : in.gfeat) v = std::log1p(std::max(0.0, v));
  std::set<std::pair<int, int>> seen;
  for (auto& e : g.edges) {
    int a = std::min(e.src, e.dst), b = std::max(e.src, e.dst);
    if (a == b) continue;
    if (seen.insert({a, b}).second) in.und_edges.emplace_back(a, b);
  }
  return in;
}

// ---------------------------------------------------------------------------
// Forward / backward.

struct ForwardCache {
  std::vector<std::vector<int>> nb;
  Mat z_enc, a_enc;
  Mat msg[kPropagationLayers];   // aggregated input (gcn) or neighbor mean (sage)
  Mat z_prop[kPropagationLayers];
  Mat a_prop[kPropagationLayers];
  std::vector<double> readout;   // 2H pooled hidden + 2F pooled input skip
  std::vector<double> sum_raw;   // H raw hidden sums (pre-compression)
  std::vector<int> argmax;       // H
  std::vector<double> h1;        // head hidden (post-relu)
  std::vector<double> z1;        // head hidden (pre-relu)
  double y = 0;                  // head output
  std::vector<double> u;         // refine input
  std::vector<double> h2, z2;    // refine hidden
  double z = 0;                  // refine output
};

struct ModelOutput {
  double head = 0;    // IL for inner latency models, target otherwise (log1p space)
  double refined = 0; // loop latency (log1p space) when has_refine
};

namespace nn_detail {

inline void relu_inplace(Mat& z, Mat& a) {
  a = z;
  for (auto& v : a.d) v = v > 0 ? v : 0;
}

// GCN aggregation with symmetric degree scaling over {v} u N(v):
//   msg_v = sum_{u in N(v) u {v}} h_u / sqrt((d_u+1)(d_v+1))
inline void gcn_aggregate(const GraphInput& g, const ForwardCache& c, const Mat& h,
                          Mat& out) {
  out = Mat(h.rows, h.cols);
  std::vector<double> inv(static_cast<size_t>(g.n));
  for (int i = 0; i < g.n; ++i)
    inv[static_cast<size_t>(i)] =
        1.0 / std::sqrt(static_cast<double>(c.nb[static_cast<size_t>(i)].size()) + 1.0);
  for (int i = 0; i < g.n; ++i) {
    double ci = inv[static_cast<size_t>(i)];
    for (int j = 0; j < h.cols; ++j) out.at(i, j) = ci * ci * h.at(i, j);
    for (int u : c.nb[static_cast<size_t>(i)]) {
      double cu = ci * inv[static_cast<size_t>(u)];
      for (int j = 0; j < h.cols; ++j) out.at(i, j) += cu * h.at(u, j);
    }
  }
}

inline void sage_mean(const GraphInput& g, const ForwardCache& c, const Mat& h, Mat& out) {
  out = Mat(h.rows, h.cols);
  for (int i = 0; i < g.n; ++i) {
    auto& nbi = c.nb[static_cast<size_t>(i)];
    if (nbi.empty()) continue;
    double inv = 1.0 / static_cast<double>(nbi.size());
    for (int u : nbi)
      for (int j = 0; j < h.cols; ++j) out.at(i, j) += inv * h.at(u, j);
  }
}

// The mean/gcn aggregations are symmetric enough to reuse for the transpose:
// gcn matrix is symmetric; sage mean needs the transpose explicitly.
inline void sage_mean_transpose(const GraphInput& g, const ForwardCache& c, const Mat& d,
                                Mat& out) {
  out = Mat(d.rows, d.cols);
  for (int i = 0; i < g.n; ++i) {
    auto& nbi = c.nb[static_cast<size_t>(i)];
    if (nbi.empty()) continue;
    double inv = 1.0 / static_cast<double>(nbi.size());
    for (int u : nbi)
      for (int j = 0; j < d.cols; ++j) out.at(u, j) += inv * d.at(i, j);
  }
}

}  // namespace nn_detail

inline ModelOutput forward(const GraphInput& g, const ModelParams& p, ForwardCache& c) {
  if (g.x.cols != kEncodedLength) throw std::runtime_error("forward: bad feature width");
  for (double v : g.x.d)
    if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite input feature");
  for (double v : g.gfeat)
    if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite graph feature");
  int H = p.hidden;
  c.nb = g.neighbors();

  matmul_wt(g.x, p.enc_w, c.z_enc);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < H; ++j) c.z_enc.at(i, j) += p.enc_b.at(0, j);
  nn_detail::relu_inplace(c.z_enc, c.a_enc);

  const Mat* prev = &c.a_enc;
  for (int k = 0; k < kPropagationLayers; ++k) {
    if (p.variant == GnnVariant::Gcn) {
      nn_detail::gcn_aggregate(g, c, *prev, c.msg[k]);
      matmul_wt(c.msg[k], p.prop_w[k], c.z_prop[k]);
    } else {
      nn_detail::sage_mean(g, c, *prev, c.msg[k]);
      matmul_wt(*prev, p.prop_w[k], c.z_prop[k]);
      Mat zn;
      matmul_wt(c.msg[k], p.prop_wn[k], zn);
      for (size_t t = 0; t < c.z_prop[k].d.size(); ++t) c.z_prop[k].d[t] += zn.d[t];
    }
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < H; ++j) c.z_prop[k].at(i, j) += p.prop_b[k].at(0, j);
    nn_detail::relu_inplace(c.z_prop[k], c.a_prop[k]);
    prev = &c.a_prop[k];
  }

  // Readout: concat(sum pool, max pool) of the final hidden state, plus the
  // same pooling of the raw input features so additive targets stay directly
  // visible to the head.
  const Mat& hn = *prev;
  const int F = kEncodedLength;
  const int R = 2 * H + 2 * F + kGraphFeatureCount;
  if (int(g.gfeat.size()) != kGraphFeatureCount)
    throw std::runtime_error("forward: bad graph feature width");
  c.readout.assign(static_cast<size_t>(R), 0.0);
  c.sum_raw.assign(static_cast<size_t>(H), 0.0);
  c.argmax.assign(static_cast<size_t>(H), 0);
  for (int j = 0; j < H; ++j) {
    double s = 0, m = -std::numeric_limits<double>::infinity();
    int am = 0;
    for (int i = 0; i < g.n; ++i) {
      double v = hn.at(i, j);
      s += v;
      if (v > m) {
        m = v;
        am = i;
      }
    }
    // Sum pools are log-compressed so readout magnitude stays independent of
    // graph size; targets live in log1p space, keeping the relation affine.
    c.sum_raw[static_cast<size_t>(j)] = s;
    c.readout[static_cast<size_t>(j)] = (s >= 0 ? 1.0 : -1.0) * std::log1p(std::abs(s));
    c.readout[static_cast<size_t>(H + j)] = g.n > 0 ? m : 0.0;
    c.argmax[static_cast<size_t>(j)] = am;
  }
  for (int j = 0; j < F; ++j) {
    double s = 0, m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n; ++i) {
      double v = g.x.at(i, j);
      s += v;
      if (v > m) m = v;
    }
    double sc = (s >= 0 ? 1.0 : -1.0) * std::log1p(std::abs(s));
    c.readout[static_cast<size_t>(2 * H + j)] = sc;
    c.readout[static_cast<size_t>(2 * H + F + j)] = g.n > 0 ? m : 0.0;
  }
  for (int j = 0; j < kGraphFeatureCount; ++j)
    c.readout[static_cast<size_t>(2 * H + 2 * F + j)] = g.gfeat[static_cast<size_t>(j)];

  // Head MLP.
  c.z1.assign(static_cast<size_t>(H), 0.0);
  for (int i = 0; i < H; ++i) {
    double acc = p.head_b1.at(0, i);
    for (int j = 0; j < R; ++j) acc += p.head_w1.at(i, j) * c.readout[static_cast<size_t>(j)];
    c.z1[static_cast<size_t>(i)] = acc;
  }
  c.h1 = c.z1;
  for (auto& v : c.h1) v = v > 0 ? v : 0;
  c.y = p.head_b2.at(0, 0);
  for (int i = 0; i < H; ++i) c.y += p.head_w2.at(0, i) * c.h1[static_cast<size_t>(i)];

  ModelOutput out;
  out.head = c.y;
  if (!std::isfinite(c.y)) throw std::runtime_error("forward: non-finite head output");

  if (p.has_refine) {
    c.u = {c.y, std::log1p(g.tripcount), std::log1p(g.ii), g.pipelined};
    c.z2.assign(static_cast<size_t>(H), 0.0);
    for (int i = 0; i < H; ++i) {
      double acc = p.refine_b1.at(0, i);
      for (int j = 0; j < kRefineInputs; ++j) acc += p.refine_w1.at(i, j) * c.u[static_cast<size_t>(j)];
      c.z2[static_cast<size_t>(i)] = acc;
    }
    c.h2 = c.z2;
    for (auto& v : c.h2) v = v > 0 ? v : 0;
    c.z = p.refine_b2.at(0, 0);
    for (int i = 0; i < H; ++i) c.z += p.refine_w2.at(0, i) * c.h2[static_cast<size_t>(i)];
    out.refined = c.z;
    if (!std::isfinite(c.z)) throw std::runtime_error("forward: non-finite refine output");
  }
  return out;
}

// Accumulates gradients into `grad` given dL/dy and dL/dz on this graph.
inline void backward(const GraphInput& g, const ModelParams& p, const ForwardCache& c,
                     double dy_in, double dz, ModelParams& grad) {
  int H = p.hidden;
  double dy = dy_in;

  if (p.has_refine) {
    // z = R2 * relu(R1 u + b1) + b2, u = [y, ...]
    std::vector<double> dh2(static_cast<size_t>(H));
    for (int i = 0; i < H; ++i) {
      grad.refine_w2.at(0, i) += dz * c.h2[static_cast<size_t>(i)];
      dh2[static_cast<size_t>(i)] = dz * p.refine_w2.at(0, i);
      if (c.z2[static_cast<size_t>(i)] <= 0) dh2[static_cast<size_t>(i)] = 0;
    }
    grad.refine_b2.at(0, 0) += dz;
    double du0 = 0;
    for (int i = 0; i < H; ++i) {
      grad.refine_b1.at(0, i) += dh2[static_cast<size_t>(i)];
      for (int j = 0; j < kRefineInputs; ++j)
        grad.refine_w1.at(i, j) += dh2[static_cast<size_t>(i)] * c.u[static_cast<size_t>(j)];
      du0 += dh2[static_cast<size_t>(i)] * p.refine_w1.at(i, 0);
    }
    dy += du0;
  }

  // Head.
  std::vector<double> dh1(static_cast<size_t>(H));
  for (int i = 0; i < H; ++i) {
    grad.head_w2.at(0, i) += dy * c.h1[static_cast<size_t>(i)];
    dh1[static_cast<size_t>(i)] = dy * p.head_w2.at(0, i);
    if (c.z1[static_cast<size_t>(i)] <= 0) dh1[static_cast<size_t>(i)] = 0;
  }
  grad.head_b2.at(0, 0) += dy;
  // The pooled-input skip and graph-feature entries (j >= 2H) only contribute
  // weight gradients; the input features themselves are constants.
  const int R = 2 * H + 2 * kEncodedLength + kGraphFeatureCount;
  std::vector<double> dread(static_cast<size_t>(2 * H), 0.0);
  for (int i = 0; i < H; ++i) {
    grad.head_b1.at(0, i) += dh1[static_cast<size_t>(i)];
    for (int j = 0; j < R; ++j) {
      grad.head_w1.at(i, j) += dh1[static_cast<size_t>(i)] * c.readout[static_cast<size_t>(j)];
      if (j < 2 * H)
        dread[static_cast<size_t>(j)] += dh1[static_cast<size_t>(i)] * p.head_w1.at(i, j);
    }
  }

  // Readout; the compressed sum pool contributes d/ds sign(s)·log1p(|s|).
  Mat dhn(g.n, H);
  for (int j = 0; j < H; ++j) {
    double ds = dread[static_cast<size_t>(j)] /
                (1.0 + std::abs(c.sum_raw[static_cast<size_t>(j)]));
    for (int i = 0; i < g.n; ++i) dhn.at(i, j) += ds;
    dhn.at(c.argmax[static_cast<size_t>(j)], j) += dread[static_cast<size_t>(H + j)];
  }

  // Propagation layers, reversed.
  Mat da = dhn;
  for (int k = kPropagationLayers - 1; k >= 0; --k) {
    Mat dz_prop = da;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < H; ++j)
        if (c.z_prop[k].at(i, j) <= 0) dz_prop.at(i, j) = 0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < H; ++j) grad.prop_b[k].at(0, j) += dz_prop.at(i, j);

    const Mat& prev = k == 0 ? c.a_enc : c.a_prop[k - 1];
    Mat dprev(g.n, H);
    if (p.variant == GnnVariant::Gcn) {
      acc_wgrad(dz_prop, c.msg[k], grad.prop_w[k]);
      Mat dmsg(g.n, H);
      acc_dinput(dz_prop, p.prop_w[k], dmsg);
      nn_detail::gcn_aggregate(g, c, dmsg, dprev);  // symmetric operator
    } else {
      acc_wgrad(dz_prop, prev, grad.prop_w[k]);
      acc_wgrad(dz_prop, c.msg[k], grad.prop_wn[k]);
      acc_dinput(dz_prop, p.prop_w[k], dprev);
      Mat dmsg(g.n, H);
      acc_dinput(dz_prop, p.prop_wn[k], dmsg);
      Mat dnbr;
      nn_detail::sage_mean_transpose(g, c, dmsg, dnbr);
      for (size_t t = 0; t < dprev.d.size(); ++t) dprev.d[t] += dnbr.d[t];
    }
    da = std::move(dprev);
  }

  // Encoder.
  Mat dz_enc = da;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < H; ++j)
      if (c.z_enc.at(i, j) <= 0) dz_enc.at(i, j) = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < H; ++j) grad.enc_b.at(0, j) += dz_enc.at(i, j);
  acc_wgrad(dz_enc, g.x, grad.enc_w);
}

// ---------------------------------------------------------------------------
// Loss and training.

inline ModelParams zeros_like(const ModelParams& p) {
  ModelParams g = p;
  for (auto* m : g.tensors()) m->zero();
  return g;
}

struct LossTerms {
  double loss = 0;   // summed squared error in log1p space
  double dy = 0;     // seed for the head output
  double dz = 0;     // seed for the refined output
};

// Objective: squared error in log1p space. Inner latency models carry two
// supervised outputs (IL and loop latency); others one.
inline LossTerms compute_loss(const ModelOutput& out, const GraphInput& g,
                              bool has_refine) {
  LossTerms t;
  if (has_refine) {
    double til = std::log1p(std::max(0.0, g.label_il));
    double tl = std::log1p(std::max(0.0, g.label));
    t.loss = (out.head - til) * (out.head - til) + (out.refined - tl) * (out.refined - tl);
    t.dy = 2.0 * (out.head - til);
    t.dz = 2.0 * (out.refined - tl);
  } else {
    double tl = std::log1p(std::max(0.0, g.label));
    t.loss = (out.head - tl) * (out.head - tl);
    t.dy = 2.0 * (out.head - tl);
  }
  return t;
}

inline double predict_value(const ModelOutput& out, bool has_refine) {
  double z = has_refine ? out.refined : out.head;
  return std::max(0.0, std::expm1(z));
}

inline double mape_pct(const std::vector<double>& preds, const std::vector<double>& labels) {
  if (preds.empty() || preds.size() != labels.size())
    throw std::runtime_error("mape: empty or mismatched inputs");
  double acc = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    acc += std::abs(preds[i] - labels[i]) / std::max(labels[i], 1.0);
  return acc / static_cast<double>(preds.size()) * 100.0;
}

struct TrainConfig {
  int epochs = 250;
  double learning_rate = 0.01;
  double beta1 = 0.9;       // first-moment decay
  double beta2 = 0.999;     // second-moment decay
  uint64_t seed = 1;
  int hidden = 32;
  GnnVariant variant = GnnVariant::Sage;
  double clip_norm = 5.0;   // global gradient-norm clip; <= 0 disables
  double abort_mape = 1e9;  // stage-level validation abort threshold, percent
};

struct TrainResult {
  ModelParams params;        // best-validation parameters
  std::vector<double> loss_history;
  double best_val_mape = 0;
  int best_epoch = 0;
};

// Full-batch Adam; keeps the epoch with the best validation MAPE.
// Deterministic given the seed.
inline TrainResult train_model(const std::vector<GraphInput>& train,
                               const std::vector<GraphInput>& val, bool has_refine,
                               const TrainConfig& cfg) {
  if (train.empty()) throw std::runtime_error("train_model: empty training set");
  ModelParams p = init_model(cfg.variant, cfg.hidden, has_refine, cfg.seed);
  ModelParams m1 = zeros_like(p), m2 = zeros_like(p);

  TrainResult res;
  res.params = p;
  res.best_val_mape = std::numeric_limits<double>::infinity();

  auto eval_mape = [&](const ModelParams& m, const std::vector<GraphInput>& set) {
    if (set.empty()) return 0.0;
    std::vector<double> preds, labels;
    ForwardCache c;
    for (auto& g : set) {
      auto out = forward(g, m, c);
      preds.push_back(predict_value(out, has_refine));
      labels.push_back(g.label);
    }
    return mape_pct(preds, labels);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ModelParams grad = zeros_like(p);
    double total = 0;
    ForwardCache c;
    for (auto& g : train) {
      auto out = forward(g, p, c);
      auto lt = compute_loss(out, g, has_refine);
      total += lt.loss;
      backward(g, p, c, lt.dy, lt.dz, grad);
    }
    if (!std::isfinite(total))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
    total /= static_cast<double>(train.size());
    res.loss_history.push_back(total);

    double scale = 1.0 / static_cast<double>(train.size());
    auto pt = p.tensors();
    auto gt = grad.tensors();
    auto m1t = m1.tensors();
    auto m2t = m2.tensors();
    if (cfg.clip_norm > 0) {
      double sq = 0;
      for (auto* gm : gt)
        for (double v : gm->d) sq += scale * v * scale * v;
      double norm = std::sqrt(sq);
      if (norm > cfg.clip_norm) scale *= cfg.clip_norm / norm;
    }
    double bc1 = 1.0 - std::pow(cfg.beta1, epoch + 1);
    double bc2 = 1.0 - std::pow(cfg.beta2, epoch + 1);
    for (size_t t = 0; t < pt.size(); ++t)
      for (size_t i = 0; i < pt[t]->d.size(); ++i) {
        double g = scale * gt[t]->d[i];
        m1t[t]->d[i] = cfg.beta1 * m1t[t]->d[i] + (1.0 - cfg.beta1) * g;
        m2t[t]->d[i] = cfg.beta2 * m2t[t]->d[i] + (1.0 - cfg.beta2) * g * g;
        pt[t]->d[i] -= cfg.learning_rate * (m1t[t]->d[i] / bc1) /
                       (std::sqrt(m2t[t]->d[i] / bc2) + 1e-8);
      }

    double vm = eval_mape(p, val.empty() ? train : val);
    if (vm < res.best_val_mape) {
      res.best_val_mape = vm;
      res.best_epoch = epoch;
      res.params = p;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization (versioned little-endian binary).

namespace nn_detail {

inline void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<char*>(b), 4);
}

inline uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

inline void put_f64(std::ostream& os, double v) {
  uint64_t u;
  static_assert(sizeof(u) == sizeof(v));
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<char*>(b), 8);
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace nn_detail

inline void save_model(const ModelParams& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write model file " + path);
  os.write("HQOR1\0", 6);
  nn_detail::put_u32(os, p.variant == GnnVariant::Gcn ? 0u : 1u);
  nn_detail::put_u32(os, static_cast<uint32_t>(p.hidden));
  nn_detail::put_u32(os, p.has_refine ? 1u : 0u);
  auto ts = p.tensors();
  nn_detail::put_u32(os, static_cast<uint32_t>(ts.size()));
  for (auto* m : ts) {
    nn_detail::put_u32(os, static_cast<uint32_t>(m->rows));
    nn_detail::put_u32(os, static_cast<uint32_t>(m->cols));
    for (double v : m->d) nn_detail::put_f64(os, v);
  }
}

inline ModelParams load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read model file " + path);
  char magic[6];
  is.read(magic, 6);
  if (std::string(magic, 5) != "HQOR1")
    throw std::runtime_error("bad model file magic in " + path);
  GnnVariant variant = nn_detail::get_u32(is) == 0 ? GnnVariant::Gcn : GnnVariant::Sage;
  int hidden = static_cast<int>(nn_detail::get_u32(is));
  bool refine = nn_detail::get_u32(is) != 0;
  ModelParams p = init_model(variant, hidden, refine, 0);
  auto ts = p.tensors();
  uint32_t count = nn_detail::get_u32(is);
  if (count != ts.size()) throw std::runtime_error("model tensor count mismatch in " + path);
  for (auto* m : ts) {
    int r = static_cast<int>(nn_detail::get_u32(is));
    int c = static_cast<int>(nn_detail::get_u32(is));
    if (r != m->rows || c != m->cols)
      throw std::runtime_error("model tensor shape mismatch in " + path);
    for (auto& v : m->d) v = nn_detail::get_f64(is);
  }
  if (!is) throw std::runtime_error("truncated model file " + path);
  return p;
}

}  // namespace hlsqor
