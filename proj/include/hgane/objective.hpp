#pragma once

// Link-formation probabilities, negative-sampling log-likelihoods and the
// joint objective  total = -(L1 + L2 + alpha * L12) + beta * L_reg  (minimized).

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "hgane/model.hpp"

namespace hgane {

inline constexpr double kProbabilityClamp = 1e-12;

// Which embedding roles score a link. kBoth is the full model; the single-
// role variants substitute that role for the missing one on both endpoints.
enum class FeatureRoles { kBoth, kInitiatorOnly, kRecipientOnly };

std::string to_string(FeatureRoles roles);
FeatureRoles parse_feature_roles(std::string_view text);

struct LossBreakdown {
  double l_soc1 = 0.0;    // log-likelihood, maximized
  double l_soc2 = 0.0;
  double l_anchor = 0.0;
  double l_reg = 0.0;     // squared L2 norm of all parameters
  double total = 0.0;     // minimized
};

// sigmoid(u_in . w_re)
double social_prob(std::span<const double> u_in, std::span<const double> w_re);
// sigmoid((u_in || u_re) . (v_in || v_re)), one accumulator in concatenated index order.
double anchor_prob(std::span<const double> u_in, std::span<const double> u_re,
                   std::span<const double> v_in, std::span<const double> v_re);

// Pre-sigmoid scores under the given feature roles.
double social_logit(const NodeFeatures& emb, const Link& link, FeatureRoles roles);
double anchor_logit(const EmbeddingTable& emb, const Link& link, FeatureRoles roles);

// sum_pos log p + sum_neg log(1 - p), p clamped to [eps, 1 - eps].
double social_loss(std::span<const Link> pos, std::span<const Link> neg,
                   const NodeFeatures& embeddings, FeatureRoles roles = FeatureRoles::kBoth);
double anchor_loss(std::span<const Link> pos, std::span<const Link> neg,
                   const EmbeddingTable& embeddings, FeatureRoles roles = FeatureRoles::kBoth);

double regularizer(const ModelParams& params);

// The links the objective is evaluated on.
struct ObjectiveLinks {
  std::array<std::span<const Link>, 2> pos_social;
  std::array<std::span<const Link>, 2> neg_social;
  std::span<const Link> pos_anchor;
  std::span<const Link> neg_anchor;

  static ObjectiveLinks train_of(const LinkSplit& split);
};

// Uses the training partition of `split`.
LossBreakdown total_loss(const LinkSplit& split, const EmbeddingTable& embeddings,
                         const ModelParams& params, double alpha, double beta,
                         FeatureRoles roles = FeatureRoles::kBoth);

// Loss over `links`; when `d_embeddings` is non-null (shaped like
// `embeddings`) the gradient of the data terms of `total` is accumulated
// into it. The regularizer gradient is left to the caller.
LossBreakdown objective(const ObjectiveLinks& links, const EmbeddingTable& embeddings,
                        const ModelParams& params, double alpha, double beta,
                        FeatureRoles roles, EmbeddingTable* d_embeddings = nullptr);

// CSV loss trace: "epoch,l_soc1,l_soc2,l_anchor,l_reg,total".
void write_loss_trace_header(std::ostream& out);
void write_loss_trace_row(std::ostream& out, std::size_t epoch, const LossBreakdown& loss);

}  // namespace hgane
