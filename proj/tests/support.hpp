#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "hgane/eval.hpp"

namespace test {

using namespace hgane;

// 3 + 3 nodes, anchors (0,0) and (1,2).
inline AlignedPair toy_pair() {
  const std::vector<Link> e1{{0, 1}, {1, 2}, {2, 0}, {0, 2}};
  const std::vector<Link> e2{{0, 1}, {1, 0}, {2, 1}};
  return AlignedPair(DirectedGraph::from_edges(3, e1), DirectedGraph::from_edges(3, e2),
                     {{0, 0}, {1, 2}});
}

inline ModelConfig toy_model() {
  ModelConfig m;
  m.embedding_dim = 2;
  m.hidden_dim = 2;
  m.heads = 2;
  m.dropout = 0.0;
  return m;
}

// Every link of the toy pair as a positive, the complement as negatives.
struct ToyLinks {
  std::array<std::vector<Link>, 2> pos, neg;
  std::vector<Link> pos_anchor, neg_anchor;

  explicit ToyLinks(const AlignedPair& pair) {
    for (int k = 0; k < 2; ++k) {
      const auto& g = pair.graph(k);
      for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v = 0; v < g.node_count(); ++v) {
          if (u == v) continue;
          (g.has_edge(u, v) ? pos[k] : neg[k]).push_back({u, v});
        }
    }
    for (NodeId u = 0; u < pair.g1().node_count(); ++u)
      for (NodeId v = 0; v < pair.g2().node_count(); ++v)
        (pair.has_anchor(u, v) ? pos_anchor : neg_anchor).push_back({u, v});
  }

  ObjectiveLinks view() const {
    ObjectiveLinks l;
    for (int k = 0; k < 2; ++k) {
      l.pos_social[k] = pos[k];
      l.neg_social[k] = neg[k];
    }
    l.pos_anchor = pos_anchor;
    l.neg_anchor = neg_anchor;
    return l;
  }
};

// Random directed graph with each ordered pair present with probability p.
inline DirectedGraph random_graph(std::size_t n, double p, Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Link> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && coin(rng)) edges.push_back({u, v});
  return DirectedGraph::from_edges(n, edges);
}

inline AlignedPair random_pair(std::size_t n1, std::size_t n2, double p, std::size_t anchors,
                               Rng& rng) {
  DirectedGraph g1 = random_graph(n1, p, rng);
  DirectedGraph g2 = random_graph(n2, p, rng);
  std::vector<NodeId> a(n1), b(n2);
  for (NodeId i = 0; i < n1; ++i) a[i] = i;
  for (NodeId i = 0; i < n2; ++i) b[i] = i;
  std::shuffle(a.begin(), a.end(), rng);
  std::shuffle(b.begin(), b.end(), rng);
  std::vector<Link> links;
  for (std::size_t i = 0; i < anchors && i < n1 && i < n2; ++i) links.push_back({a[i], b[i]});
  return AlignedPair(std::move(g1), std::move(g2), std::move(links));
}

inline void fill_uniform(NetworkFeatures& f, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& nf : f) {
    for (double& v : nf.in.flat()) v = d(rng);
    for (double& v : nf.re.flat()) v = d(rng);
  }
}

inline NetworkFeatures random_features(const AlignedPair& pair, std::size_t dim, Rng& rng) {
  NetworkFeatures f;
  for (int k = 0; k < 2; ++k) {
    f[k].in = Matrix(pair.graph(k).node_count(), dim);
    f[k].re = Matrix(pair.graph(k).node_count(), dim);
  }
  fill_uniform(f, -1.0, 1.0, rng);
  return f;
}

inline double max_abs_diff(const NetworkFeatures& a, const NetworkFeatures& b) {
  double m = 0.0;
  for (int k = 0; k < 2; ++k) {
    const auto pa = a[k].in.flat(), pb = b[k].in.flat();
    const auto ra = a[k].re.flat(), rb = b[k].re.flat();
    if (pa.size() != pb.size() || ra.size() != rb.size()) return INFINITY;
    for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
    for (std::size_t i = 0; i < ra.size(); ++i) m = std::max(m, std::abs(ra[i] - rb[i]));
  }
  return m;
}

struct TensorError {
  std::string name;
  double max_rel = 0.0;
};

// Central differences of objective(...).total against backward(), per tensor.
// Relative error |a - n| / max(|a|, |n|, floor) elementwise.
inline std::vector<TensorError> gradient_check(const AlignedPair& pair,
                                               const NetworkFeatures& features,
                                               const ObjectiveLinks& links, ModelParams params,
                                               const ModelConfig& model, const TrainConfig& train,
                                               double step = 1e-5, double floor = 1e-6) {
  const GradientTable analytic = backward(pair, features, links, params, model, train).grads;
  auto loss = [&] {
    const EmbeddingTable emb = forward(pair, features, params, model);
    return objective(links, emb, params, train.alpha, train.beta, train.roles).total;
  };
  std::vector<TensorError> out;
  auto p_spans = tensor_spans(params);
  auto g_spans = tensor_spans(analytic);
  std::vector<std::string> names;
  params.for_each([&](const std::string& n, auto) { names.push_back(n); });
  for (std::size_t t = 0; t < p_spans.size(); ++t) {
    TensorError e{names[t], 0.0};
    for (std::size_t i = 0; i < p_spans[t].size(); ++i) {
      const double saved = p_spans[t][i];
      p_spans[t][i] = saved + step;
      const double up = loss();
      p_spans[t][i] = saved - step;
      const double down = loss();
      p_spans[t][i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = g_spans[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      e.max_rel = std::max(e.max_rel, std::abs(a - numeric) / denom);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace test
