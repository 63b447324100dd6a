#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "hgane/graph.hpp"

namespace hgane {
namespace {

// Edge set under construction with an in-degree-proportional target pool
// (every node once, plus once per received link).
class GrowingGraph {
 public:
  explicit GrowingGraph(std::size_t n) : n_(n) {}

  void enable(NodeId u) { pool_.push_back(u); }

  bool add(NodeId u, NodeId v) {
    if (u == v || !keys_.insert(key(u, v)).second) return false;
    edges_.push_back({u, v});
    pool_.push_back(v);
    return true;
  }

  bool contains(NodeId u, NodeId v) const { return keys_.count(key(u, v)) != 0; }

  // Link from `source` to a degree-biased target; gives up after a bounded
  // number of collisions (dense neighborhoods).
  bool add_preferential(NodeId source, Rng& rng, std::size_t attempts = 64) {
    if (pool_.empty()) return false;
    std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
    for (std::size_t t = 0; t < attempts; ++t) {
      if (add(source, pool_[pick(rng)])) return true;
    }
    return false;
  }

  std::vector<Link>& edges() { return edges_; }
  std::size_t node_count() const { return n_; }

 private:
  static std::uint64_t key(NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }

  std::size_t n_;
  std::vector<Link> edges_;
  std::vector<NodeId> pool_;
  std::unordered_set<std::uint64_t> keys_;
};

std::vector<NodeId> random_permutation(std::size_t n, Rng& rng) {
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

// Directed preferential attachment: node t links to min(out_links, t)
// distinct earlier nodes chosen proportionally to in-degree + 1, each link
// reciprocated with the configured probability. Ids are then shuffled so
// they carry no age information.
DirectedGraph preferential_graph(std::size_t n, const DegreeParams& degree, Rng& rng) {
  GrowingGraph g(n);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (NodeId t = 0; t < n; ++t) {
    const std::size_t want = std::min<std::size_t>(degree.out_links, t);
    std::size_t made = 0;
    while (made < want) {
      if (!g.add_preferential(t, rng)) break;
      ++made;
      const NodeId target = g.edges().back().target;
      if (coin(rng) < degree.reciprocity) g.add(target, t);
    }
    g.enable(t);
  }
  const auto perm = random_permutation(n, rng);
  std::vector<Link> relabeled;
  relabeled.reserve(g.edges().size());
  for (const Link& e : g.edges()) relabeled.push_back({perm[e.source], perm[e.target]});
  return DirectedGraph::from_edges(n, relabeled);
}

}  // namespace

AlignedPair generate_synthetic(const SyntheticParams& p) {
  if (p.n1 < 2 || p.n2 < 2) throw GenerationError("both networks need at least 2 nodes");
  if (!(p.anchor_frac >= 0.0 && p.anchor_frac <= 1.0))
    throw GenerationError("anchor_frac must lie in [0, 1]");
  if (!(p.divergence >= 0.0 && p.divergence <= 1.0))
    throw GenerationError("divergence must lie in [0, 1]");
  if (!(p.degree.reciprocity >= 0.0 && p.degree.reciprocity <= 1.0))
    throw GenerationError("reciprocity must lie in [0, 1]");
  const auto anchor_count = static_cast<std::size_t>(
      std::llround(p.anchor_frac * static_cast<double>(std::min(p.n1, p.n2))));
  if (anchor_count < 1) throw GenerationError("anchor_frac * min(n1, n2) must be at least 1");

  Rng rng(p.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  DirectedGraph g1 = preferential_graph(p.n1, p.degree, rng);

  const auto order1 = random_permutation(p.n1, rng);
  const auto order2 = random_permutation(p.n2, rng);
  std::vector<NodeId> to_g2(p.n1, kNoNode);
  std::vector<bool> anchored2(p.n2, false);
  std::vector<Link> anchors;
  anchors.reserve(anchor_count);
  for (std::size_t i = 0; i < anchor_count; ++i) {
    to_g2[order1[i]] = order2[i];
    anchored2[order2[i]] = true;
    anchors.push_back({order1[i], order2[i]});
  }

  GrowingGraph g2(p.n2);
  for (NodeId u = 0; u < p.n2; ++u) g2.enable(u);
  // Links among anchored nodes are copied through the anchor map with
  // probability 1 - divergence; the rest keep their source but get a fresh
  // degree-biased target.
  std::vector<NodeId> rewire;
  for (const Link& e : g1.edges()) {
    const NodeId a = to_g2[e.source];
    if (a == kNoNode) continue;
    const NodeId b = to_g2[e.target];
    const double draw = coin(rng);
    if (b != kNoNode && draw >= p.divergence) {
      g2.add(a, b);
    } else {
      rewire.push_back(a);
    }
  }
  for (NodeId a : rewire) g2.add_preferential(a, rng);
  // Nodes only present in G2 attach like G1's nodes do.
  for (NodeId u = 0; u < p.n2; ++u) {
    if (anchored2[u]) continue;
    for (std::size_t k = 0; k < p.degree.out_links; ++k) {
      if (!g2.add_preferential(u, rng)) break;
      const NodeId target = g2.edges().back().target;
      if (coin(rng) < p.degree.reciprocity) g2.add(target, u);
    }
  }

  return AlignedPair(std::move(g1), DirectedGraph::from_edges(p.n2, g2.edges()),
                     std::move(anchors));
}

}  // namespace hgane
