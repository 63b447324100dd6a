#include "hgane/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>

namespace hgane {

// ---------------------------------------------------------------------------
// DirectedGraph

DirectedGraph DirectedGraph::from_edges(std::size_t node_count, std::span<const Link> edges) {
  std::vector<Link> sorted(edges.begin(), edges.end());
  for (const Link& e : sorted) {
    if (e.source >= node_count || e.target >= node_count) {
      throw ValidationError("edge (" + std::to_string(e.source) + ", " +
                            std::to_string(e.target) + ") out of range for " +
                            std::to_string(node_count) + " nodes");
    }
    if (e.source == e.target) {
      throw ValidationError("self-loop on node " + std::to_string(e.source));
    }
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  DirectedGraph g;
  g.node_count_ = node_count;
  const std::size_t m = sorted.size();
  g.out_offsets_.assign(node_count + 1, 0);
  g.in_offsets_.assign(node_count + 1, 0);
  for (const Link& e : sorted) {
    ++g.out_offsets_[e.source + 1];
    ++g.in_offsets_[e.target + 1];
  }
  for (std::size_t i = 0; i < node_count; ++i) {
    g.out_offsets_[i + 1] += g.out_offsets_[i];
    g.in_offsets_[i + 1] += g.in_offsets_[i];
  }
  g.out_targets_.resize(m);
  g.in_sources_.resize(m);
  g.in_to_out_.resize(m);
  g.out_to_in_.resize(m);
  std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  // Sorted by (source, target): out slots are consecutive, and walking them
  // in order fills every in-list with ascending sources.
  for (std::size_t p = 0; p < m; ++p) {
    const Link& e = sorted[p];
    g.out_targets_[p] = e.target;
    const std::size_t q = in_fill[e.target]++;
    g.in_sources_[q] = e.source;
    g.in_to_out_[q] = p;
    g.out_to_in_[p] = q;
  }
  return g;
}

std::span<const NodeId> DirectedGraph::successors(NodeId u) const {
  return std::span<const NodeId>(out_targets_).subspan(
      out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]);
}

std::span<const NodeId> DirectedGraph::predecessors(NodeId u) const {
  return std::span<const NodeId>(in_sources_).subspan(
      in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]);
}

bool DirectedGraph::has_edge(NodeId u, NodeId v) const {
  if (u >= node_count_ || v >= node_count_) return false;
  const auto succ = successors(u);
  return std::binary_search(succ.begin(), succ.end(), v);
}

std::vector<Link> DirectedGraph::edges() const {
  std::vector<Link> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count_; ++u)
    for (NodeId v : successors(u)) out.push_back({u, v});
  return out;
}

AdjacencyView DirectedGraph::out_view() const {
  return {out_offsets_, out_targets_, in_offsets_, in_sources_, in_to_out_};
}

AdjacencyView DirectedGraph::in_view() const {
  return {in_offsets_, in_sources_, out_offsets_, out_targets_, out_to_in_};
}

// ---------------------------------------------------------------------------
// AlignedPair

AlignedPair::AlignedPair(DirectedGraph g1, DirectedGraph g2, std::vector<Link> anchors)
    : graphs_{std::move(g1), std::move(g2)}, anchors_(std::move(anchors)) {
  partners_[0].assign(graphs_[0].node_count(), kNoNode);
  partners_[1].assign(graphs_[1].node_count(), kNoNode);
  std::sort(anchors_.begin(), anchors_.end());
  for (const Link& a : anchors_) {
    if (a.source >= graphs_[0].node_count() || a.target >= graphs_[1].node_count()) {
      throw ValidationError("anchor (" + std::to_string(a.source) + ", " +
                            std::to_string(a.target) + ") references a missing node");
    }
    if (partners_[0][a.source] != kNoNode) {
      throw ValidationError("node " + std::to_string(a.source) + " in g1 aligned twice");
    }
    if (partners_[1][a.target] != kNoNode) {
      throw ValidationError("node " + std::to_string(a.target) + " in g2 aligned twice");
    }
    partners_[0][a.source] = a.target;
    partners_[1][a.target] = a.source;
  }
}

// ---------------------------------------------------------------------------
// File IO

namespace {

struct NumberedLink {
  Link link;
  std::size_t line;
};

std::vector<NumberedLink> parse_link_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::vector<NumberedLink> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  auto parse_id = [&](std::string_view field) {
    NodeId value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
      fail("expected a non-negative integer id, got '" + std::string(field) + "'");
    if (value == kNoNode) fail("node id too large");
    return value;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos || view.find('\t', tab + 1) != std::string_view::npos)
      fail("expected exactly two tab-separated fields");
    out.push_back({{parse_id(view.substr(0, tab)), parse_id(view.substr(tab + 1))}, line_no});
  }
  return out;
}

}  // namespace

std::vector<Link> read_link_file(const std::filesystem::path& path) {
  std::vector<Link> links;
  for (const auto& nl : parse_link_file(path)) links.push_back(nl.link);
  return links;
}

void write_link_file(const std::filesystem::path& path, std::span<const Link> links) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  for (const Link& l : links) out << l.source << '\t' << l.target << '\n';
}

AlignedPair load_aligned_pair(const std::filesystem::path& g1_edges,
                              const std::filesystem::path& g2_edges,
                              const std::filesystem::path& anchor_file) {
  const auto e1 = parse_link_file(g1_edges);
  const auto e2 = parse_link_file(g2_edges);
  const auto anchors = parse_link_file(anchor_file);

  std::size_t n1 = 0;
  std::size_t n2 = 0;
  auto edges_of = [](const std::vector<NumberedLink>& raw, const std::filesystem::path& path,
                     std::size_t& n) {
    std::vector<Link> links;
    links.reserve(raw.size());
    for (const auto& nl : raw) {
      if (nl.link.source == nl.link.target) {
        throw ValidationError(path.string() + ":" + std::to_string(nl.line) +
                              ": self-loop on node " + std::to_string(nl.link.source));
      }
      n = std::max<std::size_t>(n, std::max(nl.link.source, nl.link.target) + std::size_t{1});
      links.push_back(nl.link);
    }
    return links;
  };
  auto links1 = edges_of(e1, g1_edges, n1);
  auto links2 = edges_of(e2, g2_edges, n2);
  std::vector<Link> anchor_links;
  for (const auto& nl : anchors) {
    n1 = std::max<std::size_t>(n1, nl.link.source + std::size_t{1});
    n2 = std::max<std::size_t>(n2, nl.link.target + std::size_t{1});
    anchor_links.push_back(nl.link);
  }
  std::sort(anchor_links.begin(), anchor_links.end());
  anchor_links.erase(std::unique(anchor_links.begin(), anchor_links.end()), anchor_links.end());
  return AlignedPair(DirectedGraph::from_edges(n1, links1), DirectedGraph::from_edges(n2, links2),
                     std::move(anchor_links));
}

// ---------------------------------------------------------------------------
// Negative sampling and splitting

namespace {

std::uint64_t key(const Link& l) {
  return (static_cast<std::uint64_t>(l.source) << 32) | l.target;
}

bool contains(std::span<const Link> sorted, const Link& l) {
  return std::binary_search(sorted.begin(), sorted.end(), l);
}

// Draws `count` distinct pairs from the `universe` pairs of
// [0, rows) x [0, cols) that pass `admissible`.
template <typename Admissible>
std::vector<Link> sample_pairs(std::size_t rows, std::size_t cols, std::size_t count,
                               std::size_t available, Admissible admissible, Rng& rng,
                               const char* what) {
  if (count > available) {
    throw SamplingError(std::string("not enough unknown ") + what + " pairs: need " +
                        std::to_string(count) + ", have " + std::to_string(available));
  }
  std::vector<Link> out;
  out.reserve(count);
  if (count == 0) return out;
  if (2 * count > available) {
    std::vector<Link> all;
    all.reserve(available);
    for (NodeId r = 0; r < rows; ++r)
      for (NodeId c = 0; c < cols; ++c)
        if (admissible(Link{r, c})) all.push_back({r, c});
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
      out.push_back(all[i]);
    }
    return out;
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(2 * count);
  std::uniform_int_distribution<NodeId> row_dist(0, static_cast<NodeId>(rows - 1));
  std::uniform_int_distribution<NodeId> col_dist(0, static_cast<NodeId>(cols - 1));
  while (out.size() < count) {
    const Link l{row_dist(rng), col_dist(rng)};
    if (!admissible(l) || !seen.insert(key(l)).second) continue;
    out.push_back(l);
  }
  return out;
}

Partition partition(std::vector<Link> links, double lambda, Rng& rng) {
  std::shuffle(links.begin(), links.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(lambda * static_cast<double>(links.size())));
  Partition p;
  p.train.assign(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(n_train));
  p.test.assign(links.begin() + static_cast<std::ptrdiff_t>(n_train), links.end());
  return p;
}

}  // namespace

std::vector<Link> sample_social_negatives(const DirectedGraph& graph, std::size_t count,
                                          std::span<const Link> exclude, Rng& rng) {
  const std::size_t n = graph.node_count();
  std::size_t excluded_unknown = 0;
  for (const Link& l : exclude)
    if (l.source != l.target && !graph.has_edge(l.source, l.target)) ++excluded_unknown;
  const std::size_t available =
      n * (n > 0 ? n - 1 : 0) - graph.edge_count() - excluded_unknown;
  return sample_pairs(
      n, n, count, available,
      [&](const Link& l) {
        return l.source != l.target && !graph.has_edge(l.source, l.target) &&
               !contains(exclude, l);
      },
      rng, "social");
}

std::vector<Link> sample_anchor_negatives(const AlignedPair& pair, std::size_t count,
                                          std::span<const Link> exclude, Rng& rng) {
  const std::size_t n1 = pair.g1().node_count();
  const std::size_t n2 = pair.g2().node_count();
  std::size_t excluded_unknown = 0;
  for (const Link& l : exclude)
    if (!pair.has_anchor(l.source, l.target)) ++excluded_unknown;
  const std::size_t available = n1 * n2 - pair.anchors().size() - excluded_unknown;
  return sample_pairs(
      n1, n2, count, available,
      [&](const Link& l) { return !pair.has_anchor(l.source, l.target) && !contains(exclude, l); },
      rng, "anchor");
}

LinkSplit make_split(const AlignedPair& pair, double lambda, std::uint64_t seed) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw SamplingError("lambda must lie in (0, 1)");
  Rng rng(seed);
  const auto e1 = pair.g1().edges();
  const auto e2 = pair.g2().edges();
  const auto& anchors = pair.anchors();
  auto n1 = sample_social_negatives(pair.g1(), kSocialNegativeRatio * e1.size(), {}, rng);
  auto n2 = sample_social_negatives(pair.g2(), kSocialNegativeRatio * e2.size(), {}, rng);
  auto na = sample_anchor_negatives(pair, kAnchorNegativeRatio * anchors.size(), {}, rng);

  LinkSplit split;
  split.seed = seed;
  split.lambda = lambda;
  split.pos_soc1 = partition(e1, lambda, rng);
  split.neg_soc1 = partition(std::move(n1), lambda, rng);
  split.pos_soc2 = partition(e2, lambda, rng);
  split.neg_soc2 = partition(std::move(n2), lambda, rng);
  split.pos_anchor = partition(anchors, lambda, rng);
  split.neg_anchor = partition(std::move(na), lambda, rng);
  return split;
}

AlignedPair message_graph(const AlignedPair& pair, const LinkSplit& split) {
  return AlignedPair(DirectedGraph::from_edges(pair.g1().node_count(), split.pos_soc1.train),
                     DirectedGraph::from_edges(pair.g2().node_count(), split.pos_soc2.train),
                     split.pos_anchor.train);
}

// ---------------------------------------------------------------------------
// Split persistence

namespace {

constexpr std::string_view kSplitMagic = "# hgane-split v1";

template <typename Split, typename F>
void for_each_list(Split& s, F&& f) {
  f("pos_soc1", s.pos_soc1);
  f("neg_soc1", s.neg_soc1);
  f("pos_soc2", s.pos_soc2);
  f("neg_soc2", s.neg_soc2);
  f("pos_anchor", s.pos_anchor);
  f("neg_anchor", s.neg_anchor);
}

}  // namespace

void write_split(std::ostream& out, const LinkSplit& split) {
  out << kSplitMagic << '\n';
  out << "seed\t" << split.seed << '\n';
  out << "lambda\t" << std::setprecision(17) << split.lambda << '\n';
  for_each_list(split, [&](const char* name, const Partition& p) {
    for (const auto& [part, links] :
         {std::pair<const char*, const std::vector<Link>*>{"train", &p.train}, {"test", &p.test}}) {
      out << name << '.' << part << '\t' << links->size() << '\n';
      for (const Link& l : *links) out << l.source << '\t' << l.target << '\n';
    }
  });
}

LinkSplit read_split(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSplitMagic) throw FormatError("split: bad header");
  LinkSplit split;
  std::string tag;
  auto expect_tag = [&](const std::string& want) {
    if (!(in >> tag) || tag != want) throw FormatError("split: expected '" + want + "'");
  };
  expect_tag("seed");
  if (!(in >> split.seed)) throw FormatError("split: bad seed");
  expect_tag("lambda");
  if (!(in >> split.lambda)) throw FormatError("split: bad lambda");
  for_each_list(split, [&](const char* name, Partition& p) {
    for (auto [part, links] :
         {std::pair<const char*, std::vector<Link>*>{"train", &p.train}, {"test", &p.test}}) {
      expect_tag(std::string(name) + "." + part);
      std::size_t count = 0;
      if (!(in >> count)) throw FormatError("split: bad count for " + tag);
      links->resize(count);
      for (Link& l : *links)
        if (!(in >> l.source >> l.target)) throw FormatError("split: truncated list " + tag);
    }
  });
  return split;
}

void save_split(const std::filesystem::path& path, const LinkSplit& split) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_split(out, split);
}

LinkSplit load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  return read_split(in);
}

}  // namespace hgane
