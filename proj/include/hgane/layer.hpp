#pragma once

// Batched multi-head hierarchical attention layer over both networks, with
// its exact reverse pass. Node loops are OpenMP-parallel; every output row
// is owned by one iteration and reductions run in a fixed order, so the
// result is independent of the thread count. The per-node routines in
// attention.hpp / model.hpp are the serial reference for the forward pass.

#include <array>
#include <vector>

#include "hgane/attention.hpp"

namespace hgane {

// K heads of attention parameters per network.
using LayerParams = std::array<std::vector<AttentionParams>, 2>;

struct LayerOptions {
  ContributionMode mode;
  Activation activation = Activation::kElu;
  double leaky_slope = kDefaultLeakySlope;
  // Applied to normalized coefficients when an rng is supplied.
  double dropout = 0.0;
};

struct RoleCache {
  Vector intra_pre;    // per adjacency slot, before LeakyReLU
  Vector intra_alpha;  // per slot, softmax weight before dropout
  Vector intra_keep;   // per slot dropout multiplier; empty = no dropout
  Vector inter_pre;    // per node (0 when no partner)
  Vector inter_alpha;  // per node (0 when no partner)
  Vector inter_keep;
  Matrix z;            // aggregated pre-activation, n x d'
  Matrix out;          // act(z)
};

struct HeadCache {
  Matrix proj_in, proj_re;    // own features through w_in / w_re
  Matrix cross_in, cross_re;  // other network's features through the cross weights
  RoleCache initiator, recipient;

  const Matrix& proj(Role r) const { return r == Role::kInitiator ? proj_in : proj_re; }
  const Matrix& cross(Role r) const { return r == Role::kInitiator ? cross_in : cross_re; }
  const RoleCache& role(Role r) const { return r == Role::kInitiator ? initiator : recipient; }
  RoleCache& role(Role r) { return r == Role::kInitiator ? initiator : recipient; }
};

struct LayerCache {
  std::array<std::vector<HeadCache>, 2> heads;
};

// Per network and role, the concatenation over heads of
// act( sum_j alpha_ij W u_j + sum_v alpha_iv W_cross v ), width K * d'.
NetworkFeatures layer_forward(const AlignedPair& pair, const NetworkFeatures& input,
                              const LayerParams& params, const LayerOptions& options,
                              Rng* dropout_rng = nullptr, LayerCache* cache = nullptr);

// Accumulates d(loss)/d(params) into `grads` (same shapes as `params`) and,
// when `d_input` is non-null, d(loss)/d(input) into it. `cache` must come
// from the forward call that produced the output `d_output` refers to.
void layer_backward(const AlignedPair& pair, const NetworkFeatures& input,
                    const LayerParams& params, const LayerOptions& options,
                    const LayerCache& cache, const NetworkFeatures& d_output, LayerParams& grads,
                    NetworkFeatures* d_input);

}  // namespace hgane
