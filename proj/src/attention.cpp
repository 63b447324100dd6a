#include "hgane/attention.hpp"

#include <algorithm>
#include <cmath>

#include "hgane/kernels.hpp"

namespace hgane {

std::string to_string(ContributionMode mode) {
  std::string s = mode.social == Contribution::kCross ? "sc" : "sd";
  s += mode.anchor == Contribution::kCross ? "+ac" : "+ad";
  return s;
}

ContributionMode parse_mode(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const ContributionMode& m : kAllModes)
    if (to_string(m) == lower) return m;
  throw Error("unknown contribution mode '" + std::string(text) + "' (expected e.g. sc+ad)");
}

AttentionParams AttentionParams::zeros(std::size_t self_dim, std::size_t other_dim,
                                       std::size_t out_dim) {
  AttentionParams p;
  p.w_in = Matrix(self_dim, out_dim);
  p.w_re = Matrix(self_dim, out_dim);
  p.w_in_cross = Matrix(other_dim, out_dim);
  p.w_re_cross = Matrix(other_dim, out_dim);
  p.a_in.assign(2 * out_dim, 0.0);
  p.a_re.assign(2 * out_dim, 0.0);
  p.a_in_cross.assign(2 * out_dim, 0.0);
  p.a_re_cross.assign(2 * out_dim, 0.0);
  return p;
}

Vector apply(const Matrix& w, std::span<const double> u) {
  if (u.size() != w.rows()) {
    throw ShapeError("feature of length " + std::to_string(u.size()) +
                     " does not match weight input dimension " + std::to_string(w.rows()));
  }
  Vector out(w.cols(), 0.0);
  for (std::size_t k = 0; k < w.rows(); ++k)
    for (std::size_t o = 0; o < w.cols(); ++o) out[o] += u[k] * w(k, o);
  return out;
}

double attention_score(std::span<const double> a, const Matrix& w1, std::span<const double> x1,
                       const Matrix& w2, std::span<const double> x2, double slope) {
  const Vector h1 = apply(w1, x1);
  const Vector h2 = apply(w2, x2);
  if (a.size() != h1.size() + h2.size()) {
    throw ShapeError("attention vector of length " + std::to_string(a.size()) +
                     " does not match 2d' = " + std::to_string(h1.size() + h2.size()));
  }
  const std::size_t d = h1.size();
  return leaky_relu(dot(a.first(d), h1) + dot(a.subspan(d), h2), slope);
}

double raw_intra_initiator(const AttentionParams& p, std::span<const double> u_i_in,
                           std::span<const double> u_j_re, double slope) {
  return attention_score(p.a_in, p.w_in, u_i_in, p.w_re, u_j_re, slope);
}

double raw_intra_recipient(const AttentionParams& p, std::span<const double> u_i_re,
                           std::span<const double> u_j_in, double slope) {
  return attention_score(p.a_re, p.w_re, u_i_re, p.w_in, u_j_in, slope);
}

double raw_inter_initiator(const AttentionParams& p, std::span<const double> u_i_in,
                           std::span<const double> v_j_in, double slope) {
  return attention_score(p.a_in_cross, p.w_in, u_i_in, p.w_in_cross, v_j_in, slope);
}

double raw_inter_recipient(const AttentionParams& p, std::span<const double> u_i_re,
                           std::span<const double> v_j_re, double slope) {
  return attention_score(p.a_re_cross, p.w_re, u_i_re, p.w_re_cross, v_j_re, slope);
}

NormalizedWeights normalize(std::span<const double> raw_intra, std::span<const double> raw_inter) {
  if (raw_intra.empty() && raw_inter.empty()) throw EmptyNeighborhood();
  double top = -INFINITY;
  for (double v : raw_intra) top = std::max(top, v);
  for (double v : raw_inter) top = std::max(top, v);
  NormalizedWeights w;
  w.intra.resize(raw_intra.size());
  w.inter.resize(raw_inter.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < raw_intra.size(); ++i) sum += (w.intra[i] = std::exp(raw_intra[i] - top));
  for (std::size_t i = 0; i < raw_inter.size(); ++i) sum += (w.inter[i] = std::exp(raw_inter[i] - top));
  for (double& v : w.intra) v /= sum;
  for (double& v : w.inter) v /= sum;
  return w;
}

CoefficientSet coefficient_sets(const AlignedPair& pair, int network,
                                const NetworkFeatures& features, const AttentionParams& params,
                                ContributionMode mode, Role role, NodeId node, double slope) {
  const DirectedGraph& g = pair.graph(network);
  const NodeFeatures& own = features[network];
  const NodeFeatures& cross = features[other(network)];

  CoefficientSet set;
  const auto nbrs = role == Role::kInitiator ? g.successors(node) : g.predecessors(node);
  set.neighbors.assign(nbrs.begin(), nbrs.end());
  set.partner = pair.partner(network, node);

  // Social: target's own role feature against the neighbor's contributed
  // feature. Under SC+AD these are exactly the four defining formulas.
  const Role nb_role = neighbor_role(role, mode.social);
  const Role pt_role = partner_role(role, mode.anchor);
  const auto self = own.role(role).row(node);

  Vector raw_intra;
  raw_intra.reserve(set.neighbors.size());
  for (NodeId j : set.neighbors) {
    raw_intra.push_back(attention_score(params.intra_vector(role), params.weight(role), self,
                                        params.weight(nb_role), own.role(nb_role).row(j), slope));
  }
  Vector raw_inter;
  if (set.partner != kNoNode) {
    raw_inter.push_back(attention_score(params.inter_vector(role), params.weight(role), self,
                                        params.cross_weight(pt_role),
                                        cross.role(pt_role).row(set.partner), slope));
  }
  if (raw_intra.empty() && raw_inter.empty()) return set;
  auto w = normalize(raw_intra, raw_inter);
  set.intra = std::move(w.intra);
  set.inter = std::move(w.inter);
  return set;
}

}  // namespace hgane
