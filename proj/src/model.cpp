#include "hgane/model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace hgane {

std::size_t ModelParams::parameter_count() const {
  std::size_t count = 0;
  for_each([&](const std::string&, std::span<const double> t) { count += t.size(); });
  return count;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.for_each([](const std::string&, std::span<double> t) { std::fill(t.begin(), t.end(), 0.0); });
  return z;
}

std::vector<std::span<double>> tensor_spans(ModelParams& params) {
  std::vector<std::span<double>> out;
  params.for_each([&](const std::string&, std::span<double> t) { out.push_back(t); });
  return out;
}

std::vector<std::span<const double>> tensor_spans(const ModelParams& params) {
  std::vector<std::span<const double>> out;
  params.for_each([&](const std::string&, std::span<const double> t) { out.push_back(t); });
  return out;
}

NetworkFeatures init_features(const AlignedPair& pair, std::size_t feature_cap,
                              std::uint64_t seed) {
  NetworkFeatures features;
  Rng rng(seed);
  for (int k = 0; k < 2; ++k) {
    const DirectedGraph& g = pair.graph(k);
    const std::size_t n = g.node_count();
    if (feature_cap == 0 || n <= feature_cap) {
      features[k].in = Matrix(n, n);
      features[k].re = Matrix(n, n);
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : g.successors(u)) features[k].in(u, v) = 1.0;
        for (NodeId v : g.predecessors(u)) features[k].re(u, v) = 1.0;
      }
      continue;
    }
    // Row v of the projection is the code of node v; a feature row is the
    // sum of codes over the neighborhood.
    Matrix code(n, feature_cap);
    const double scale = 1.0 / std::sqrt(static_cast<double>(feature_cap));
    std::bernoulli_distribution sign(0.5);
    for (double& c : code.flat()) c = sign(rng) ? scale : -scale;
    features[k].in = Matrix(n, feature_cap);
    features[k].re = Matrix(n, feature_cap);
    for (NodeId u = 0; u < n; ++u) {
      auto in_row = features[k].in.row(u);
      auto re_row = features[k].re.row(u);
      for (NodeId v : g.successors(u))
        for (std::size_t c = 0; c < feature_cap; ++c) in_row[c] += code(v, c);
      for (NodeId v : g.predecessors(u))
        for (std::size_t c = 0; c < feature_cap; ++c) re_row[c] += code(v, c);
    }
  }
  return features;
}

namespace {

void glorot(std::span<double> t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t) v = dist(rng);
}

AttentionParams glorot_head(std::size_t self_dim, std::size_t other_dim, std::size_t out_dim,
                            Rng& rng) {
  AttentionParams p = AttentionParams::zeros(self_dim, other_dim, out_dim);
  glorot(p.w_in.flat(), self_dim, out_dim, rng);
  glorot(p.w_re.flat(), self_dim, out_dim, rng);
  glorot(p.w_in_cross.flat(), other_dim, out_dim, rng);
  glorot(p.w_re_cross.flat(), other_dim, out_dim, rng);
  for (Vector* a : {&p.a_in, &p.a_re, &p.a_in_cross, &p.a_re_cross})
    glorot(*a, 2 * out_dim, 1, rng);
  return p;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::array<std::size_t, 2> feature_dims,
                        std::uint64_t seed) {
  if (config.heads == 0 || config.hidden_dim == 0 || config.embedding_dim == 0)
    throw ShapeError("model dimensions must be positive");
  Rng rng(seed);
  ModelParams params;
  for (int k = 0; k < 2; ++k) {
    for (std::size_t h = 0; h < config.heads; ++h) {
      params.layer1[k].push_back(
          glorot_head(feature_dims[k], feature_dims[other(k)], config.hidden_dim, rng));
    }
  }
  const std::size_t hidden = config.heads * config.hidden_dim;
  for (int k = 0; k < 2; ++k)
    params.layer2[k].push_back(glorot_head(hidden, hidden, config.embedding_dim, rng));
  return params;
}

namespace {

Vector aggregate(int network, const NetworkFeatures& features, const CoefficientSet& weights,
                 const AttentionParams& params, ContributionMode mode, Activation activation,
                 Role role) {
  const std::size_t d = params.out_dim();
  Vector z(d, 0.0);
  const Role nb_role = neighbor_role(role, mode.social);
  const Role pt_role = partner_role(role, mode.anchor);
  if (weights.intra.size() != weights.neighbors.size() ||
      weights.inter.size() != (weights.partner == kNoNode ? 0u : 1u))
    throw ShapeError("coefficient set does not match its neighborhood");
  for (std::size_t s = 0; s < weights.neighbors.size(); ++s) {
    const Vector h =
        apply(params.weight(nb_role), features[network].role(nb_role).row(weights.neighbors[s]));
    for (std::size_t o = 0; o < d; ++o) z[o] += weights.intra[s] * h[o];
  }
  if (weights.partner != kNoNode) {
    const Vector h = apply(params.cross_weight(pt_role),
                           features[other(network)].role(pt_role).row(weights.partner));
    for (std::size_t o = 0; o < d; ++o) z[o] += weights.inter[0] * h[o];
  }
  Vector out(d);
  activate(activation, z, out);
  return out;
}

}  // namespace

Vector aggregate_initiator(const AlignedPair& /*pair*/, int network, NodeId /*node*/,
                           const NetworkFeatures& features, const CoefficientSet& weights,
                           const AttentionParams& params, ContributionMode mode,
                           Activation activation) {
  return aggregate(network, features, weights, params, mode, activation,
                   Role::kInitiator);
}

Vector aggregate_recipient(const AlignedPair& /*pair*/, int network, NodeId /*node*/,
                           const NetworkFeatures& features, const CoefficientSet& weights,
                           const AttentionParams& params, ContributionMode mode,
                           Activation activation) {
  return aggregate(network, features, weights, params, mode, activation,
                   Role::kRecipient);
}

NetworkFeatures multi_head_layer(const AlignedPair& pair, const NetworkFeatures& features,
                                 const LayerParams& params, const LayerOptions& options,
                                 Rng* dropout_rng, LayerCache* cache) {
  return layer_forward(pair, features, params, options, dropout_rng, cache);
}

NetworkFeatures reference_multi_head_layer(const AlignedPair& pair,
                                           const NetworkFeatures& features,
                                           const LayerParams& params,
                                           const LayerOptions& options) {
  NetworkFeatures out;
  for (int k = 0; k < 2; ++k) {
    const std::size_t n = pair.graph(k).node_count();
    const std::size_t d = params[k].front().out_dim();
    out[k].in = Matrix(n, params[k].size() * d);
    out[k].re = Matrix(n, params[k].size() * d);
    for (std::size_t h = 0; h < params[k].size(); ++h) {
      const AttentionParams& p = params[k][h];
      for (NodeId u = 0; u < n; ++u) {
        for (Role role : {Role::kInitiator, Role::kRecipient}) {
          const CoefficientSet w = coefficient_sets(pair, k, features, p, options.mode, role, u,
                                                    options.leaky_slope);
          const Vector v = role == Role::kInitiator
                               ? aggregate_initiator(pair, k, u, features, w, p, options.mode,
                                                     options.activation)
                               : aggregate_recipient(pair, k, u, features, w, p, options.mode,
                                                     options.activation);
          auto row = out[k].role(role).row(u);
          std::copy(v.begin(), v.end(), row.begin() + static_cast<std::ptrdiff_t>(h * d));
        }
      }
    }
  }
  return out;
}

LayerOptions layer1_options(const ModelConfig& config) {
  return {config.mode, Activation::kElu, config.leaky_slope, config.dropout};
}

LayerOptions layer2_options(const ModelConfig& config) {
  return {config.mode, config.output_activation, config.leaky_slope, config.dropout};
}

EmbeddingTable forward(const AlignedPair& pair, const NetworkFeatures& features,
                       const ModelParams& params, const ModelConfig& config, Rng* dropout_rng,
                       ForwardCache* cache) {
  if (cache == nullptr) {
    const NetworkFeatures hidden =
        layer_forward(pair, features, params.layer1, layer1_options(config), dropout_rng);
    return layer_forward(pair, hidden, params.layer2, layer2_options(config), dropout_rng);
  }
  cache->hidden = layer_forward(pair, features, params.layer1, layer1_options(config),
                                dropout_rng, &cache->layer1);
  return layer_forward(pair, cache->hidden, params.layer2, layer2_options(config), dropout_rng,
                       &cache->layer2);
}

EmbeddingTable reference_forward(const AlignedPair& pair, const NetworkFeatures& features,
                                 const ModelParams& params, const ModelConfig& config) {
  LayerOptions o1 = layer1_options(config);
  LayerOptions o2 = layer2_options(config);
  o1.dropout = o2.dropout = 0.0;
  const NetworkFeatures hidden = reference_multi_head_layer(pair, features, params.layer1, o1);
  return reference_multi_head_layer(pair, hidden, params.layer2, o2);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << std::setprecision(17);
  for (int k = 0; k < 2; ++k) {
    for (Role role : {Role::kInitiator, Role::kRecipient}) {
      const Matrix& m = table[k].role(role);
      for (std::size_t u = 0; u < m.rows(); ++u) {
        out << (k + 1) << '\t' << u << '\t' << (role == Role::kInitiator ? "in" : "re");
        for (double v : m.row(u)) out << '\t' << v;
        out << '\n';
      }
    }
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_embeddings(out, table);
}

}  // namespace hgane
