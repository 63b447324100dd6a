#pragma once

// Two directed networks joined by one-to-one anchor links, link splits with
// negative sampling, and the leakage-free message graph.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "hgane/common.hpp"

namespace hgane {

// A directed social link (source follows target), or for anchors a
// (node in G1, node in G2) pair.
struct Link {
  NodeId source = 0;
  NodeId target = 0;
  friend bool operator==(const Link&, const Link&) = default;
  friend auto operator<=>(const Link&, const Link&) = default;
};

// CSR view of one direction of a graph plus the slot mapping into the
// opposite direction. Slot `s` in [offsets[i], offsets[i+1]) joins node i
// with nodes[s]; the same link sits at slot reverse_slot[r] when seen from
// the other endpoint via reverse_offsets/reverse_nodes.
struct AdjacencyView {
  std::span<const std::size_t> offsets;
  std::span<const NodeId> nodes;
  std::span<const std::size_t> reverse_offsets;
  std::span<const NodeId> reverse_nodes;
  std::span<const std::size_t> reverse_slot;

  std::size_t degree(NodeId i) const { return offsets[i + 1] - offsets[i]; }
};

class DirectedGraph {
 public:
  DirectedGraph() : out_offsets_(1, 0), in_offsets_(1, 0) {}

  // Throws ValidationError on self-loops or out-of-range ids. Duplicate
  // edges are collapsed.
  static DirectedGraph from_edges(std::size_t node_count, std::span<const Link> edges);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return out_targets_.size(); }

  // Sorted ascending.
  std::span<const NodeId> successors(NodeId u) const;
  std::span<const NodeId> predecessors(NodeId u) const;
  bool has_edge(NodeId u, NodeId v) const;

  // All edges in (source, target) lexicographic order.
  std::vector<Link> edges() const;

  // Out-neighbors (N^i) with the reverse mapping into the in-lists.
  AdjacencyView out_view() const;
  // In-neighbors (N^r) with the reverse mapping into the out-lists.
  AdjacencyView in_view() const;

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.node_count_ == b.node_count_ && a.out_offsets_ == b.out_offsets_ &&
           a.out_targets_ == b.out_targets_;
  }

 private:
  std::size_t node_count_ = 0;
  std::vector<std::size_t> out_offsets_;
  std::vector<NodeId> out_targets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<NodeId> in_sources_;
  std::vector<std::size_t> in_to_out_;
  std::vector<std::size_t> out_to_in_;
};

class AlignedPair {
 public:
  AlignedPair() = default;
  // Throws ValidationError if an anchor endpoint is out of range or a node
  // is aligned twice.
  AlignedPair(DirectedGraph g1, DirectedGraph g2, std::vector<Link> anchors);

  const DirectedGraph& graph(int network) const { return graphs_[network]; }
  const DirectedGraph& g1() const { return graphs_[0]; }
  const DirectedGraph& g2() const { return graphs_[1]; }
  // Sorted by G1 node.
  const std::vector<Link>& anchors() const { return anchors_; }
  // Anchor partner of `node` of `network` in the other network, or kNoNode.
  NodeId partner(int network, NodeId node) const { return partners_[network][node]; }
  bool has_anchor(NodeId u1, NodeId v2) const { return partner(0, u1) == v2; }

  friend bool operator==(const AlignedPair& a, const AlignedPair& b) {
    return a.graphs_ == b.graphs_ && a.anchors_ == b.anchors_;
  }

 private:
  std::array<DirectedGraph, 2> graphs_;
  std::vector<Link> anchors_;
  std::array<std::vector<NodeId>, 2> partners_;
};

// Edge/anchor files: "a<TAB>b" per line, '#' comments and blank lines skipped.
// Node counts are inferred as max id + 1 across the edge file and the
// matching anchor column.
AlignedPair load_aligned_pair(const std::filesystem::path& g1_edges,
                              const std::filesystem::path& g2_edges,
                              const std::filesystem::path& anchor_file);
std::vector<Link> read_link_file(const std::filesystem::path& path);
void write_link_file(const std::filesystem::path& path, std::span<const Link> links);

struct Partition {
  std::vector<Link> train;
  std::vector<Link> test;
  std::size_t size() const { return train.size() + test.size(); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

struct LinkSplit {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  Partition pos_soc1, neg_soc1;
  Partition pos_soc2, neg_soc2;
  Partition pos_anchor, neg_anchor;

  const Partition& pos_social(int network) const { return network == 0 ? pos_soc1 : pos_soc2; }
  const Partition& neg_social(int network) const { return network == 0 ? neg_soc1 : neg_soc2; }
  friend bool operator==(const LinkSplit&, const LinkSplit&) = default;
};

inline constexpr std::size_t kSocialNegativeRatio = 2;
inline constexpr std::size_t kAnchorNegativeRatio = 5;

// Deterministic in `seed`. Negatives: 2x social positives per network from
// the unknown pairs U^(k), 5x anchor positives from V1 x V2 minus anchors.
// Every list is shuffled and its first round(lambda * size) entries form
// the training partition. Throws SamplingError when too few unknown pairs.
LinkSplit make_split(const AlignedPair& pair, double lambda, std::uint64_t seed);

// Fresh negatives for one network: `count` distinct non-edges of `graph`
// that are not self-pairs and not in `exclude` (sorted).
std::vector<Link> sample_social_negatives(const DirectedGraph& graph, std::size_t count,
                                          std::span<const Link> exclude, Rng& rng);
std::vector<Link> sample_anchor_negatives(const AlignedPair& pair, std::size_t count,
                                          std::span<const Link> exclude, Rng& rng);

// Pair restricted to the training positives of `split`.
AlignedPair message_graph(const AlignedPair& pair, const LinkSplit& split);

void write_split(std::ostream& out, const LinkSplit& split);
LinkSplit read_split(std::istream& in);
void save_split(const std::filesystem::path& path, const LinkSplit& split);
LinkSplit load_split(const std::filesystem::path& path);

struct DegreeParams {
  // Out-links each node creates by preferential attachment on in-degree.
  std::size_t out_links = 4;
  // Probability that a created link is reciprocated.
  double reciprocity = 0.2;
};

struct SyntheticParams {
  std::size_t n1 = 200;
  std::size_t n2 = 200;
  double anchor_frac = 0.6;
  DegreeParams degree;
  double divergence = 0.3;
  std::uint64_t seed = 1;
};

// Preferential-attachment G1; G2 copies each anchored-to-anchored link of G1
// through the anchor map with probability 1 - divergence and otherwise
// rewires it to a degree-biased random target. Throws GenerationError on
// infeasible parameters.
AlignedPair generate_synthetic(const SyntheticParams& params);

}  // namespace hgane
