#pragma once

// Straight-line forward pass written from the formulas alone: column-vector
// convention (W is d' x d, W u), neighborhoods rebuilt from edge lists,
// nested std::vector storage, no library math.

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "hgane/eval.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // rows

struct Head {
  Mat w_in, w_re, w_in_x, w_re_x;  // d' x d
  Vec a_in, a_re, a_in_x, a_re_x;  // 2d'
};

// Per network: rows of initiator and recipient features.
struct Feats {
  Mat in, re;
};

inline Mat transposed(const hgane::Matrix& m) {
  Mat t(m.cols(), Vec(m.rows()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t[c][r] = m(r, c);
  return t;
}

inline Head head_of(const hgane::AttentionParams& p) {
  return {transposed(p.w_in),  transposed(p.w_re),  transposed(p.w_in_cross),
          transposed(p.w_re_cross), p.a_in, p.a_re, p.a_in_cross, p.a_re_cross};
}

inline Mat rows_of(const hgane::Matrix& m) {
  Mat r(m.rows(), Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
  return r;
}

inline Vec mul(const Mat& w, const Vec& u) {
  Vec out(w.size(), 0.0);
  for (std::size_t o = 0; o < w.size(); ++o)
    for (std::size_t k = 0; k < u.size(); ++k) out[o] += w[o][k] * u[k];
  return out;
}

inline double leaky(double x, double slope) { return x >= 0.0 ? x : slope * x; }
inline double elu(double x) { return x > 0.0 ? x : std::exp(x) - 1.0; }

// a^T [x || y] through LeakyReLU.
inline double score(const Vec& a, const Vec& x, const Vec& y, double slope) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += a[i] * x[i];
  for (std::size_t i = 0; i < y.size(); ++i) s += a[x.size() + i] * y[i];
  return leaky(s, slope);
}

struct Topology {
  // [network][node] -> neighbor sets
  std::map<unsigned, std::set<unsigned>> succ[2], pred[2];
  std::map<unsigned, unsigned> partner[2];
  std::size_t n[2] = {0, 0};
};

inline Topology topology_of(const hgane::AlignedPair& pair) {
  Topology t;
  for (int k = 0; k < 2; ++k) {
    t.n[k] = pair.graph(k).node_count();
    for (const hgane::Link& l : pair.graph(k).edges()) {
      t.succ[k][l.source].insert(l.target);
      t.pred[k][l.target].insert(l.source);
    }
  }
  for (const hgane::Link& a : pair.anchors()) {
    t.partner[0][a.source] = a.target;
    t.partner[1][a.target] = a.source;
  }
  return t;
}

enum class Act { kElu, kIdentity };

// One head of one network, role initiator (in) or recipient (re), node i.
inline Vec aggregate(const Topology& t, int k, const Feats& own, const Feats& other, const Head& h,
                     bool initiator, bool social_cross, bool anchor_cross, unsigned i,
                     double slope, Act act) {
  const auto& nbrs = initiator ? t.succ[k] : t.pred[k];
  const Mat& w_self = initiator ? h.w_in : h.w_re;
  const Vec& u_self = initiator ? own.in[i] : own.re[i];
  const Vec self_proj = mul(w_self, u_self);

  // Contributed neighbor features: cross -> opposite role, direct -> same.
  const bool nbr_in = initiator != social_cross;
  const Mat& w_nbr = nbr_in ? h.w_in : h.w_re;
  const bool part_in = initiator != anchor_cross;
  const Mat& w_part = part_in ? h.w_in_x : h.w_re_x;
  const Vec& a_intra = initiator ? h.a_in : h.a_re;
  const Vec& a_inter = initiator ? h.a_in_x : h.a_re_x;

  std::vector<double> raws;
  std::vector<Vec> contribs;
  auto it = nbrs.find(i);
  if (it != nbrs.end())
    for (unsigned j : it->second) {
      const Vec c = mul(w_nbr, nbr_in ? own.in[j] : own.re[j]);
      raws.push_back(score(a_intra, self_proj, c, slope));
      contribs.push_back(c);
    }
  auto p = t.partner[k].find(i);
  if (p != t.partner[k].end()) {
    const Vec c = mul(w_part, part_in ? other.in[p->second] : other.re[p->second]);
    raws.push_back(score(a_inter, self_proj, c, slope));
    contribs.push_back(c);
  }
  const std::size_t d = w_self.size();
  Vec z(d, 0.0);
  if (!raws.empty()) {
    double m = raws[0];
    for (double r : raws) m = std::max(m, r);
    double total = 0.0;
    for (double r : raws) total += std::exp(r - m);
    for (std::size_t s = 0; s < raws.size(); ++s) {
      const double alpha = std::exp(raws[s] - m) / total;
      for (std::size_t o = 0; o < d; ++o) z[o] += alpha * contribs[s][o];
    }
  }
  if (act == Act::kElu)
    for (double& v : z) v = elu(v);
  return z;
}

inline std::array<Feats, 2> layer(const Topology& t, const std::array<Feats, 2>& in,
                                  const std::array<std::vector<Head>, 2>& heads, bool social_cross,
                                  bool anchor_cross, double slope, Act act) {
  std::array<Feats, 2> out;
  for (int k = 0; k < 2; ++k) {
    out[k].in.assign(t.n[k], {});
    out[k].re.assign(t.n[k], {});
    for (const Head& h : heads[k])
      for (unsigned i = 0; i < t.n[k]; ++i) {
        const Vec a = aggregate(t, k, in[k], in[1 - k], h, true, social_cross, anchor_cross, i, slope, act);
        const Vec b = aggregate(t, k, in[k], in[1 - k], h, false, social_cross, anchor_cross, i, slope, act);
        out[k].in[i].insert(out[k].in[i].end(), a.begin(), a.end());
        out[k].re[i].insert(out[k].re[i].end(), b.begin(), b.end());
      }
  }
  return out;
}

// Two layers: ELU then identity; no dropout.
inline std::array<Feats, 2> forward(const hgane::AlignedPair& pair,
                                    const hgane::NetworkFeatures& features,
                                    const hgane::ModelParams& params,
                                    const hgane::ModelConfig& config) {
  const Topology t = topology_of(pair);
  std::array<Feats, 2> x;
  for (int k = 0; k < 2; ++k) x[k] = {rows_of(features[k].in), rows_of(features[k].re)};
  std::array<std::vector<Head>, 2> h1, h2;
  for (int k = 0; k < 2; ++k) {
    for (const auto& p : params.layer1[k]) h1[k].push_back(head_of(p));
    for (const auto& p : params.layer2[k]) h2[k].push_back(head_of(p));
  }
  const bool sc = config.mode.social == hgane::Contribution::kCross;
  const bool ac = config.mode.anchor == hgane::Contribution::kCross;
  const auto hidden = layer(t, x, h1, sc, ac, config.leaky_slope, Act::kElu);
  return layer(t, hidden, h2, sc, ac, config.leaky_slope, Act::kIdentity);
}

inline double max_abs_diff(const std::array<Feats, 2>& a, const hgane::EmbeddingTable& b) {
  double m = 0.0;
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < a[k].in.size(); ++i)
      for (std::size_t c = 0; c < a[k].in[i].size(); ++c) {
        m = std::max(m, std::abs(a[k].in[i][c] - b[k].in(i, c)));
        m = std::max(m, std::abs(a[k].re[i][c] - b[k].re(i, c)));
      }
  return m;
}

}  // namespace oracle
