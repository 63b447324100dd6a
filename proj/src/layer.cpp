#include "hgane/layer.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "hgane/kernels.hpp"

namespace hgane {
namespace {

constexpr std::array<Role, 2> kRoles = {Role::kInitiator, Role::kRecipient};

AdjacencyView view_for(const DirectedGraph& g, Role role) {
  return role == Role::kInitiator ? g.out_view() : g.in_view();
}

void check_shapes(const AlignedPair& pair, const NetworkFeatures& input,
                  const LayerParams& params) {
  if (params[0].size() != params[1].size() || params[0].empty())
    throw ShapeError("layer needs the same non-zero head count for both networks");
  for (int k = 0; k < 2; ++k) {
    const auto& x = input[k];
    const auto& y = input[other(k)];
    if (x.in.rows() != pair.graph(k).node_count() || !x.in.same_shape(x.re))
      throw ShapeError("input features do not match network " + std::to_string(k + 1));
    const std::size_t width = params[k][0].out_dim();
    for (const AttentionParams& p : params[k]) {
      if (p.w_in.rows() != x.dim() || p.w_re.rows() != x.dim() ||
          p.w_in_cross.rows() != y.dim() || p.w_re_cross.rows() != y.dim())
        throw ShapeError("weight input dimension does not match features");
      if (p.out_dim() != width || p.w_re.cols() != width || p.w_in_cross.cols() != width ||
          p.w_re_cross.cols() != width || p.a_in.size() != 2 * width ||
          p.a_re.size() != 2 * width || p.a_in_cross.size() != 2 * width ||
          p.a_re_cross.size() != 2 * width)
        throw ShapeError("inconsistent head output dimension");
    }
  }
}

Vector draw_keep(std::size_t count, double rate, Rng& rng) {
  Vector keep(count);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double scale = 1.0 / (1.0 - rate);
  for (double& k : keep) k = coin(rng) < rate ? 0.0 : scale;
  return keep;
}

// One role of one head: attention weights and aggregation for every node.
void role_forward(const AlignedPair& pair, int k, const AttentionParams& p,
                  const LayerOptions& opt, Role role, const HeadCache& head, RoleCache& rc,
                  Rng* rng, Matrix& output, std::size_t column) {
  const DirectedGraph& g = pair.graph(k);
  const auto n = g.node_count();
  const std::size_t d = p.out_dim();
  const AdjacencyView adj = view_for(g, role);
  const Matrix& self = head.proj(role);
  const Matrix& nb = head.proj(neighbor_role(role, opt.mode.social));
  const Matrix& pt = head.cross(partner_role(role, opt.mode.anchor));
  const std::span<const double> a = p.intra_vector(role);
  const std::span<const double> ac = p.inter_vector(role);

  Vector s_self(n), s_nb(n), s_cself(n), s_pt(pt.rows());
  row_dots(self, a.first(d), s_self);
  row_dots(nb, a.subspan(d), s_nb);
  row_dots(self, ac.first(d), s_cself);
  row_dots(pt, ac.subspan(d), s_pt);

  const std::size_t slots = adj.nodes.size();
  rc.intra_pre.assign(slots, 0.0);
  rc.intra_alpha.assign(slots, 0.0);
  rc.inter_pre.assign(n, 0.0);
  rc.inter_alpha.assign(n, 0.0);
  rc.intra_keep.clear();
  rc.inter_keep.clear();
  if (rng != nullptr && opt.dropout > 0.0) {
    rc.intra_keep = draw_keep(slots, opt.dropout, *rng);
    rc.inter_keep = draw_keep(n, opt.dropout, *rng);
  }
  rc.z = Matrix(n, d);
  rc.out = Matrix(n, d);
  const bool dropout = !rc.intra_keep.empty();
  const double slope = opt.leaky_slope;

#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<NodeId>(ii);
    const std::size_t begin = adj.offsets[i];
    const std::size_t end = adj.offsets[i + 1];
    const NodeId partner = pair.partner(k, i);
    if (begin == end && partner == kNoNode) {
      activate(opt.activation, rc.z.row(i), rc.out.row(i));
      continue;
    }
    double top = -INFINITY;
    for (std::size_t s = begin; s < end; ++s) {
      rc.intra_pre[s] = s_self[i] + s_nb[adj.nodes[s]];
      top = std::max(top, leaky_relu(rc.intra_pre[s], slope));
    }
    if (partner != kNoNode) {
      rc.inter_pre[i] = s_cself[i] + s_pt[partner];
      top = std::max(top, leaky_relu(rc.inter_pre[i], slope));
    }
    double sum = 0.0;
    for (std::size_t s = begin; s < end; ++s)
      sum += (rc.intra_alpha[s] = std::exp(leaky_relu(rc.intra_pre[s], slope) - top));
    if (partner != kNoNode)
      sum += (rc.inter_alpha[i] = std::exp(leaky_relu(rc.inter_pre[i], slope) - top));

    auto z = rc.z.row(i);
    for (std::size_t s = begin; s < end; ++s) {
      rc.intra_alpha[s] /= sum;
      const double w = dropout ? rc.intra_alpha[s] * rc.intra_keep[s] : rc.intra_alpha[s];
      if (w == 0.0) continue;
      const auto src = nb.row(adj.nodes[s]);
      for (std::size_t o = 0; o < d; ++o) z[o] += w * src[o];
    }
    if (partner != kNoNode) {
      rc.inter_alpha[i] /= sum;
      const double w = dropout ? rc.inter_alpha[i] * rc.inter_keep[i] : rc.inter_alpha[i];
      if (w != 0.0) {
        const auto src = pt.row(partner);
        for (std::size_t o = 0; o < d; ++o) z[o] += w * src[o];
      }
    }
    activate(opt.activation, z, rc.out.row(i));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto src = rc.out.row(i);
    std::copy(src.begin(), src.end(), output.row(i).begin() + static_cast<std::ptrdiff_t>(column));
  }
}

// Reverse of role_forward for one role of one head. Accumulates into the
// projection gradients and the attention-vector gradients.
void role_backward(const AlignedPair& pair, int k, const AttentionParams& p,
                   const LayerOptions& opt, Role role, const HeadCache& head,
                   const Matrix& d_out, std::size_t column, std::array<Matrix, 2>& d_proj,
                   std::array<Matrix, 2>& d_cross, AttentionParams& grad) {
  const DirectedGraph& g = pair.graph(k);
  const auto n = g.node_count();
  const std::size_t d = p.out_dim();
  const AdjacencyView adj = view_for(g, role);
  const RoleCache& rc = head.role(role);
  const Role nb_role = neighbor_role(role, opt.mode.social);
  const Role pt_role = partner_role(role, opt.mode.anchor);
  const Matrix& self = head.proj(role);
  const Matrix& nb = head.proj(nb_role);
  const Matrix& pt = head.cross(pt_role);
  Matrix& d_self = d_proj[role == Role::kInitiator ? 0 : 1];
  Matrix& d_nb = d_proj[nb_role == Role::kInitiator ? 0 : 1];
  Matrix& d_pt = d_cross[pt_role == Role::kInitiator ? 0 : 1];
  const std::span<const double> a = p.intra_vector(role);
  const std::span<const double> ac = p.inter_vector(role);
  const bool dropout = !rc.intra_keep.empty();
  const double slope = opt.leaky_slope;

  const std::size_t slots = adj.nodes.size();
  Matrix dz(n, d);
  Vector d_intra_pre(slots, 0.0), d_inter_pre(n, 0.0);
  Vector g_self(n, 0.0), g_cself(n, 0.0);

#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<NodeId>(ii);
    const auto dzi = dz.row(i);
    activate_backward(opt.activation, rc.z.row(i), rc.out.row(i),
                      d_out.row(i).subspan(column, d), dzi);
    const std::size_t begin = adj.offsets[i];
    const std::size_t end = adj.offsets[i + 1];
    const NodeId partner = pair.partner(k, i);
    if (begin == end && partner == kNoNode) continue;

    // d(loss)/d(alpha) through the weighted sum, then through softmax.
    double weighted = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
      double da = dot(dzi, nb.row(adj.nodes[s]));
      if (dropout) da *= rc.intra_keep[s];
      d_intra_pre[s] = da;
      weighted += rc.intra_alpha[s] * da;
    }
    double da_inter = 0.0;
    if (partner != kNoNode) {
      da_inter = dot(dzi, pt.row(partner));
      if (dropout) da_inter *= rc.inter_keep[i];
      weighted += rc.inter_alpha[i] * da_inter;
    }
    double sum_pre = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
      const double de = rc.intra_alpha[s] * (d_intra_pre[s] - weighted);
      d_intra_pre[s] = de * leaky_relu_grad(rc.intra_pre[s], slope);
      sum_pre += d_intra_pre[s];
    }
    if (partner != kNoNode) {
      const double de = rc.inter_alpha[i] * (da_inter - weighted);
      d_inter_pre[i] = de * leaky_relu_grad(rc.inter_pre[i], slope);
    }
    g_self[i] = sum_pre;
    g_cself[i] = d_inter_pre[i];
    auto ds = d_self.row(i);
    for (std::size_t o = 0; o < d; ++o) ds[o] += sum_pre * a[o] + g_cself[i] * ac[o];
  }

  // Gather into each neighbor j from every target i that attended to it.
  Vector g_nb(n, 0.0);
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const auto j = static_cast<NodeId>(jj);
    auto dj = d_nb.row(j);
    double total = 0.0;
    for (std::size_t r = adj.reverse_offsets[j]; r < adj.reverse_offsets[j + 1]; ++r) {
      const NodeId i = adj.reverse_nodes[r];
      const std::size_t s = adj.reverse_slot[r];
      const double w = dropout ? rc.intra_alpha[s] * rc.intra_keep[s] : rc.intra_alpha[s];
      const auto dzi = dz.row(i);
      for (std::size_t o = 0; o < d; ++o) dj[o] += w * dzi[o] + d_intra_pre[s] * a[d + o];
      total += d_intra_pre[s];
    }
    g_nb[j] = total;
  }

  const int o_net = other(k);
  const auto n_other = pair.graph(o_net).node_count();
  Vector g_pt(n_other, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t vv = 0; vv < static_cast<std::ptrdiff_t>(n_other); ++vv) {
    const auto v = static_cast<NodeId>(vv);
    const NodeId i = pair.partner(o_net, v);
    if (i == kNoNode) continue;
    const double w = dropout ? rc.inter_alpha[i] * rc.inter_keep[i] : rc.inter_alpha[i];
    const auto dzi = dz.row(i);
    auto dv = d_pt.row(v);
    for (std::size_t o = 0; o < d; ++o) dv[o] += w * dzi[o] + d_inter_pre[i] * ac[d + o];
    g_pt[v] = d_inter_pre[i];
  }

  Vector& ga = role == Role::kInitiator ? grad.a_in : grad.a_re;
  Vector& gac = role == Role::kInitiator ? grad.a_in_cross : grad.a_re_cross;
  const std::span<double> ga_span(ga);
  const std::span<double> gac_span(gac);
  accumulate_weighted_rows(self, g_self, ga_span.first(d));
  accumulate_weighted_rows(nb, g_nb, ga_span.subspan(d));
  accumulate_weighted_rows(self, g_cself, gac_span.first(d));
  accumulate_weighted_rows(pt, g_pt, gac_span.subspan(d));
}

}  // namespace

NetworkFeatures layer_forward(const AlignedPair& pair, const NetworkFeatures& input,
                              const LayerParams& params, const LayerOptions& options,
                              Rng* dropout_rng, LayerCache* cache) {
  check_shapes(pair, input, params);
  const std::size_t heads = params[0].size();
  NetworkFeatures output;
  LayerCache local;
  LayerCache& store = cache != nullptr ? *cache : local;
  for (int k = 0; k < 2; ++k) {
    const std::size_t n = pair.graph(k).node_count();
    const std::size_t d = params[k][0].out_dim();
    output[k].in = Matrix(n, heads * d);
    output[k].re = Matrix(n, heads * d);
    store.heads[k].assign(heads, HeadCache{});
    for (std::size_t h = 0; h < heads; ++h) {
      const AttentionParams& p = params[k][h];
      HeadCache& hc = store.heads[k][h];
      project(input[k].in, p.w_in, hc.proj_in);
      project(input[k].re, p.w_re, hc.proj_re);
      project(input[other(k)].in, p.w_in_cross, hc.cross_in);
      project(input[other(k)].re, p.w_re_cross, hc.cross_re);
      for (Role role : kRoles) {
        role_forward(pair, k, p, options, role, hc, hc.role(role), dropout_rng,
                     output[k].role(role), h * d);
      }
      if (cache == nullptr) hc = HeadCache{};
    }
  }
  return output;
}

void layer_backward(const AlignedPair& pair, const NetworkFeatures& input,
                    const LayerParams& params, const LayerOptions& options,
                    const LayerCache& cache, const NetworkFeatures& d_output, LayerParams& grads,
                    NetworkFeatures* d_input) {
  const std::size_t heads = params[0].size();
  std::array<NodeFeatures, 2> input_t;
  for (int k = 0; k < 2; ++k) {
    input_t[k].in = transpose(input[k].in);
    input_t[k].re = transpose(input[k].re);
  }
  for (int k = 0; k < 2; ++k) {
    const int o = other(k);
    const std::size_t n = pair.graph(k).node_count();
    const std::size_t n_other = pair.graph(o).node_count();
    for (std::size_t h = 0; h < heads; ++h) {
      const AttentionParams& p = params[k][h];
      AttentionParams& g = grads[k][h];
      const HeadCache& hc = cache.heads[k][h];
      const std::size_t d = p.out_dim();
      std::array<Matrix, 2> d_proj{Matrix(n, d), Matrix(n, d)};
      std::array<Matrix, 2> d_cross{Matrix(n_other, d), Matrix(n_other, d)};
      for (Role role : kRoles) {
        role_backward(pair, k, p, options, role, hc, d_output[k].role(role), h * d, d_proj,
                      d_cross, g);
      }
      accumulate_weight_grad(input_t[k].in, d_proj[0], g.w_in);
      accumulate_weight_grad(input_t[k].re, d_proj[1], g.w_re);
      accumulate_weight_grad(input_t[o].in, d_cross[0], g.w_in_cross);
      accumulate_weight_grad(input_t[o].re, d_cross[1], g.w_re_cross);
      if (d_input != nullptr) {
        accumulate_input_grad(d_proj[0], p.w_in, (*d_input)[k].in);
        accumulate_input_grad(d_proj[1], p.w_re, (*d_input)[k].re);
        accumulate_input_grad(d_cross[0], p.w_in_cross, (*d_input)[o].in);
        accumulate_input_grad(d_cross[1], p.w_re_cross, (*d_input)[o].re);
      }
    }
  }
}

}  // namespace hgane
