#pragma once

// The four raw attention coefficients (intra/inter x initiator/recipient)
// and their joint softmax over a node's social neighbors plus anchor
// partners. These are per-node reference routines; the batched layer in
// layer.hpp computes the same quantities for all nodes at once.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hgane/activation.hpp"
#include "hgane/graph.hpp"
#include "hgane/matrix.hpp"

namespace hgane {

enum class Role { kInitiator, kRecipient };
inline constexpr Role flip(Role r) {
  return r == Role::kInitiator ? Role::kRecipient : Role::kInitiator;
}

// Whether neighbors contribute the opposite role's feature (cross) or the
// same role's feature (direct). Social and anchor links are set separately.
enum class Contribution { kCross, kDirect };

struct ContributionMode {
  Contribution social = Contribution::kCross;
  Contribution anchor = Contribution::kDirect;
  friend bool operator==(const ContributionMode&, const ContributionMode&) = default;
};

// "sc+ad", "sd+ac", ...
std::string to_string(ContributionMode mode);
ContributionMode parse_mode(std::string_view text);

// SC+AC, SD+AD, SD+AC, SC+AD.
inline constexpr std::array<ContributionMode, 4> kAllModes = {{
    {Contribution::kCross, Contribution::kCross},
    {Contribution::kDirect, Contribution::kDirect},
    {Contribution::kDirect, Contribution::kCross},
    {Contribution::kCross, Contribution::kDirect},
}};

// Feature role a social neighbor contributes to a target in `role`.
inline constexpr Role neighbor_role(Role role, Contribution social) {
  return social == Contribution::kCross ? flip(role) : role;
}
// Feature role an anchor partner contributes to a target in `role`.
inline constexpr Role partner_role(Role role, Contribution anchor) {
  return anchor == Contribution::kCross ? flip(role) : role;
}

// Per-node initiator and recipient feature rows of one network.
struct NodeFeatures {
  Matrix in;
  Matrix re;

  std::size_t node_count() const { return in.rows(); }
  std::size_t dim() const { return in.cols(); }
  const Matrix& role(Role r) const { return r == Role::kInitiator ? in : re; }
  Matrix& role(Role r) { return r == Role::kInitiator ? in : re; }
  friend bool operator==(const NodeFeatures&, const NodeFeatures&) = default;
};

using NetworkFeatures = std::array<NodeFeatures, 2>;

// Attention parameters of one head for one network k. Weight matrices are
// stored input-major (rows = input dimension, cols = d'), so the column-
// convention product W u is evaluated as u W. The cross matrices act on
// the other network's features.
struct AttentionParams {
  Matrix w_in, w_re;              // d_k x d'
  Matrix w_in_cross, w_re_cross;  // d_other x d'
  Vector a_in, a_re;              // 2 d'
  Vector a_in_cross, a_re_cross;  // 2 d'

  static AttentionParams zeros(std::size_t self_dim, std::size_t other_dim, std::size_t out_dim);

  std::size_t out_dim() const { return w_in.cols(); }
  const Matrix& weight(Role r) const { return r == Role::kInitiator ? w_in : w_re; }
  const Matrix& cross_weight(Role r) const {
    return r == Role::kInitiator ? w_in_cross : w_re_cross;
  }
  const Vector& intra_vector(Role r) const { return r == Role::kInitiator ? a_in : a_re; }
  const Vector& inter_vector(Role r) const {
    return r == Role::kInitiator ? a_in_cross : a_re_cross;
  }

  // Visits every tensor as (name, flat span) in a fixed order.
  template <typename F>
  void for_each(F&& f) {
    f("w_in", w_in.flat());
    f("w_re", w_re.flat());
    f("w_in_cross", w_in_cross.flat());
    f("w_re_cross", w_re_cross.flat());
    f("a_in", std::span<double>(a_in));
    f("a_re", std::span<double>(a_re));
    f("a_in_cross", std::span<double>(a_in_cross));
    f("a_re_cross", std::span<double>(a_re_cross));
  }
  template <typename F>
  void for_each(F&& f) const {
    f("w_in", w_in.flat());
    f("w_re", w_re.flat());
    f("w_in_cross", w_in_cross.flat());
    f("w_re_cross", w_re_cross.flat());
    f("a_in", std::span<const double>(a_in));
    f("a_re", std::span<const double>(a_re));
    f("a_in_cross", std::span<const double>(a_in_cross));
    f("a_re_cross", std::span<const double>(a_re_cross));
  }
};

// W u for a single feature row (input-major W).
Vector apply(const Matrix& w, std::span<const double> u);

// LeakyReLU(a^T [W1 x1 || W2 x2]).
double attention_score(std::span<const double> a, const Matrix& w1, std::span<const double> x1,
                       const Matrix& w2, std::span<const double> x2, double slope);

double raw_intra_initiator(const AttentionParams& p, std::span<const double> u_i_in,
                           std::span<const double> u_j_re, double slope = kDefaultLeakySlope);
double raw_intra_recipient(const AttentionParams& p, std::span<const double> u_i_re,
                           std::span<const double> u_j_in, double slope = kDefaultLeakySlope);
double raw_inter_initiator(const AttentionParams& p, std::span<const double> u_i_in,
                           std::span<const double> v_j_in, double slope = kDefaultLeakySlope);
double raw_inter_recipient(const AttentionParams& p, std::span<const double> u_i_re,
                           std::span<const double> v_j_re, double slope = kDefaultLeakySlope);

class EmptyNeighborhood : public Error {
 public:
  EmptyNeighborhood() : Error("softmax over an empty neighborhood") {}
};

struct NormalizedWeights {
  Vector intra;
  Vector inter;
};

// Joint max-shifted softmax over the union of both maps.
NormalizedWeights normalize(std::span<const double> raw_intra, std::span<const double> raw_inter);

// Normalized weights of one node in one role. `neighbors` lists N^i (for
// the initiator role) or N^r (recipient); `partner` is the anchor partner
// or kNoNode. An isolated node yields empty weight lists.
struct CoefficientSet {
  std::vector<NodeId> neighbors;
  Vector intra;
  NodeId partner = kNoNode;
  Vector inter;
  bool empty() const { return intra.empty() && inter.empty(); }
};

CoefficientSet coefficient_sets(const AlignedPair& pair, int network,
                                const NetworkFeatures& features, const AttentionParams& params,
                                ContributionMode mode, Role role, NodeId node,
                                double slope = kDefaultLeakySlope);

}  // namespace hgane
