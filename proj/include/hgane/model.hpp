#pragma once

// Two-layer hierarchical attention embedding model: feature and parameter
// initialization, the NRC/PIC (initiator) and NIC/PRC (recipient)
// aggregations, multi-head layers and the full forward pass.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hgane/layer.hpp"

namespace hgane {

struct ModelConfig {
  std::size_t embedding_dim = 100;  // layer-2 output per role
  std::size_t hidden_dim = 256;     // layer-1 output per head and role
  std::size_t heads = 8;            // layer-1 heads
  std::size_t feature_cap = 1024;   // indicator features above this are randomly projected
  double dropout = 0.4;
  double leaky_slope = kDefaultLeakySlope;
  Activation output_activation = Activation::kIdentity;
  ContributionMode mode;
};

struct ModelParams {
  LayerParams layer1;  // `heads` heads per network
  LayerParams layer2;  // one head per network

  // Visits every tensor as (qualified name, flat span) in a fixed order.
  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;
  // Same shapes, all zeros.
  ModelParams zeros_like() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    const std::array<decltype(&self.layer1), 2> layers{&self.layer1, &self.layer2};
    for (int l = 0; l < 2; ++l)
      for (int k = 0; k < 2; ++k)
        for (std::size_t h = 0; h < (*layers[l])[k].size(); ++h) {
          const std::string prefix = "layer" + std::to_string(l + 1) + ".net" +
                                     std::to_string(k + 1) + ".head" + std::to_string(h) + ".";
          (*layers[l])[k][h].for_each(
              [&](const char* name, auto span) { f(prefix + name, span); });
        }
  }
};

// Flat views of every tensor, in for_each order.
std::vector<std::span<double>> tensor_spans(ModelParams& params);
std::vector<std::span<const double>> tensor_spans(const ModelParams& params);

// GradientTable: one slot per parameter, same layout as ModelParams.
using GradientTable = ModelParams;

// Final initiator/recipient embeddings per node per network.
using EmbeddingTable = NetworkFeatures;

// Adjacency-indicator features: u_in = out-neighborhood row, u_re =
// in-neighborhood row. Networks larger than `feature_cap` are reduced by a
// seeded Rademacher projection to `feature_cap` columns.
NetworkFeatures init_features(const AlignedPair& pair, std::size_t feature_cap,
                              std::uint64_t seed);

// Glorot-uniform initialization; `feature_dims` are the layer-1 input widths.
ModelParams init_params(const ModelConfig& config, std::array<std::size_t, 2> feature_dims,
                        std::uint64_t seed);

// sigma( sum_{N^i} alpha * contributed neighbor feature
//      + sum_{N^a} alpha * contributed partner feature ).
// Under SC+AD: NRC = W_re u_j^re and PIC = W_in_cross v_j^in.
Vector aggregate_initiator(const AlignedPair& pair, int network, NodeId node,
                           const NetworkFeatures& features, const CoefficientSet& weights,
                           const AttentionParams& params, ContributionMode mode,
                           Activation activation);
// Mirror for the recipient role. Under SC+AD: NIC = W_in u_j^in and
// PRC = W_re_cross v_j^re.
Vector aggregate_recipient(const AlignedPair& pair, int network, NodeId node,
                           const NetworkFeatures& features, const CoefficientSet& weights,
                           const AttentionParams& params, ContributionMode mode,
                           Activation activation);

// Multi-head layer (batched kernel).
NetworkFeatures multi_head_layer(const AlignedPair& pair, const NetworkFeatures& features,
                                 const LayerParams& params, const LayerOptions& options,
                                 Rng* dropout_rng = nullptr, LayerCache* cache = nullptr);

// Serial per-node reference of multi_head_layer without dropout, built from
// coefficient_sets and aggregate_*.
NetworkFeatures reference_multi_head_layer(const AlignedPair& pair,
                                           const NetworkFeatures& features,
                                           const LayerParams& params,
                                           const LayerOptions& options);

LayerOptions layer1_options(const ModelConfig& config);
LayerOptions layer2_options(const ModelConfig& config);

struct ForwardCache {
  LayerCache layer1;
  NetworkFeatures hidden;
  LayerCache layer2;
};

// Layer 1 (K heads, ELU) then layer 2 (one head, configured output
// activation). Dropout is active iff `dropout_rng` is non-null.
EmbeddingTable forward(const AlignedPair& pair, const NetworkFeatures& features,
                       const ModelParams& params, const ModelConfig& config,
                       Rng* dropout_rng = nullptr, ForwardCache* cache = nullptr);

EmbeddingTable reference_forward(const AlignedPair& pair, const NetworkFeatures& features,
                                 const ModelParams& params, const ModelConfig& config);

// TSV: network<TAB>node<TAB>role<TAB>v_1 ... v_d, network in {1,2}, role in {in,re}.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

}  // namespace hgane
