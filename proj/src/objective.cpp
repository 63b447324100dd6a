#include "hgane/objective.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "hgane/kernels.hpp"

namespace hgane {

std::string to_string(FeatureRoles roles) {
  switch (roles) {
    case FeatureRoles::kBoth: return "both";
    case FeatureRoles::kInitiatorOnly: return "initiator";
    case FeatureRoles::kRecipientOnly: return "recipient";
  }
  return "?";
}

FeatureRoles parse_feature_roles(std::string_view text) {
  if (text == "both") return FeatureRoles::kBoth;
  if (text == "initiator" || text == "initiator-only") return FeatureRoles::kInitiatorOnly;
  if (text == "recipient" || text == "recipient-only") return FeatureRoles::kRecipientOnly;
  throw Error("unknown feature roles '" + std::string(text) + "'");
}

namespace {

struct ScoringRoles {
  Role source;  // social: source endpoint
  Role target;  // social: target endpoint
  Role first;   // anchor: first concatenated block
  Role second;  // anchor: second concatenated block
};

ScoringRoles scoring_roles(FeatureRoles roles) {
  switch (roles) {
    case FeatureRoles::kInitiatorOnly:
      return {Role::kInitiator, Role::kInitiator, Role::kInitiator, Role::kInitiator};
    case FeatureRoles::kRecipientOnly:
      return {Role::kRecipient, Role::kRecipient, Role::kRecipient, Role::kRecipient};
    case FeatureRoles::kBoth:
      break;
  }
  return {Role::kInitiator, Role::kRecipient, Role::kInitiator, Role::kRecipient};
}

double concat_dot(std::span<const double> a1, std::span<const double> a2,
                  std::span<const double> b1, std::span<const double> b2) {
  if (a1.size() != b1.size() || a2.size() != b2.size())
    throw ShapeError("anchor_prob: embedding dimensions differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a1.size(); ++i) sum += a1[i] * b1[i];
  for (std::size_t i = 0; i < a2.size(); ++i) sum += a2[i] * b2[i];
  return sum;
}

double clamp_prob(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

// log p (positive) or log(1 - p) (negative) of p = sigmoid(x) with p
// clamped, and d/dx of the unclamped log-likelihood, so saturated wrong
// predictions still get pulled back.
std::pair<double, double> log_likelihood(double x, bool positive) {
  const double pc = clamp_prob(sigmoid(x));
  if (positive) return {std::log(pc), sigmoid(-x)};
  return {std::log(1.0 - pc), -sigmoid(x)};
}

}  // namespace

double social_prob(std::span<const double> u_in, std::span<const double> w_re) {
  return sigmoid(dot(u_in, w_re));
}

double anchor_prob(std::span<const double> u_in, std::span<const double> u_re,
                   std::span<const double> v_in, std::span<const double> v_re) {
  return sigmoid(concat_dot(u_in, u_re, v_in, v_re));
}

double social_logit(const NodeFeatures& emb, const Link& link, FeatureRoles roles) {
  const ScoringRoles r = scoring_roles(roles);
  return dot(emb.role(r.source).row(link.source), emb.role(r.target).row(link.target));
}

double anchor_logit(const EmbeddingTable& emb, const Link& link, FeatureRoles roles) {
  const ScoringRoles r = scoring_roles(roles);
  return concat_dot(emb[0].role(r.first).row(link.source), emb[0].role(r.second).row(link.source),
                    emb[1].role(r.first).row(link.target), emb[1].role(r.second).row(link.target));
}

double social_loss(std::span<const Link> pos, std::span<const Link> neg,
                   const NodeFeatures& embeddings, FeatureRoles roles) {
  double sum = 0.0;
  for (const Link& l : pos) sum += log_likelihood(social_logit(embeddings, l, roles), true).first;
  for (const Link& l : neg) sum += log_likelihood(social_logit(embeddings, l, roles), false).first;
  return sum;
}

double anchor_loss(std::span<const Link> pos, std::span<const Link> neg,
                   const EmbeddingTable& embeddings, FeatureRoles roles) {
  double sum = 0.0;
  for (const Link& l : pos) sum += log_likelihood(anchor_logit(embeddings, l, roles), true).first;
  for (const Link& l : neg) sum += log_likelihood(anchor_logit(embeddings, l, roles), false).first;
  return sum;
}

double regularizer(const ModelParams& params) {
  double sum = 0.0;
  params.for_each([&](const std::string&, std::span<const double> t) {
    for (double v : t) sum += v * v;
  });
  return sum;
}

ObjectiveLinks ObjectiveLinks::train_of(const LinkSplit& split) {
  ObjectiveLinks links;
  links.pos_social = {split.pos_soc1.train, split.pos_soc2.train};
  links.neg_social = {split.neg_soc1.train, split.neg_soc2.train};
  links.pos_anchor = split.pos_anchor.train;
  links.neg_anchor = split.neg_anchor.train;
  return links;
}

LossBreakdown total_loss(const LinkSplit& split, const EmbeddingTable& embeddings,
                         const ModelParams& params, double alpha, double beta,
                         FeatureRoles roles) {
  return objective(ObjectiveLinks::train_of(split), embeddings, params, alpha, beta, roles);
}

namespace {

void add_scaled(std::span<double> dst, double scale, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

// Log-likelihood of one network's social links; accumulates d(-L)/d(emb).
double social_term(std::span<const Link> pos, std::span<const Link> neg, const NodeFeatures& emb,
                   FeatureRoles roles, NodeFeatures* grad) {
  const ScoringRoles r = scoring_roles(roles);
  double sum = 0.0;
  for (bool positive : {true, false}) {
    for (const Link& l : positive ? pos : neg) {
      const auto [value, slope] = log_likelihood(social_logit(emb, l, roles), positive);
      sum += value;
      if (grad == nullptr || slope == 0.0) continue;
      add_scaled(grad->role(r.source).row(l.source), -slope, emb.role(r.target).row(l.target));
      add_scaled(grad->role(r.target).row(l.target), -slope, emb.role(r.source).row(l.source));
    }
  }
  return sum;
}

double anchor_term(std::span<const Link> pos, std::span<const Link> neg,
                   const EmbeddingTable& emb, FeatureRoles roles, double weight,
                   EmbeddingTable* grad) {
  const ScoringRoles r = scoring_roles(roles);
  double sum = 0.0;
  for (bool positive : {true, false}) {
    for (const Link& l : positive ? pos : neg) {
      const auto [value, slope] = log_likelihood(anchor_logit(emb, l, roles), positive);
      sum += value;
      if (grad == nullptr || slope == 0.0 || weight == 0.0) continue;
      const double g = -weight * slope;
      for (Role role : {r.first, r.second}) {
        add_scaled((*grad)[0].role(role).row(l.source), g, emb[1].role(role).row(l.target));
        add_scaled((*grad)[1].role(role).row(l.target), g, emb[0].role(role).row(l.source));
      }
    }
  }
  return sum;
}

}  // namespace

LossBreakdown objective(const ObjectiveLinks& links, const EmbeddingTable& embeddings,
                        const ModelParams& params, double alpha, double beta,
                        FeatureRoles roles, EmbeddingTable* d_embeddings) {
  LossBreakdown loss;
  NodeFeatures* g1 = d_embeddings != nullptr ? &(*d_embeddings)[0] : nullptr;
  NodeFeatures* g2 = d_embeddings != nullptr ? &(*d_embeddings)[1] : nullptr;
  loss.l_soc1 = social_term(links.pos_social[0], links.neg_social[0], embeddings[0], roles, g1);
  loss.l_soc2 = social_term(links.pos_social[1], links.neg_social[1], embeddings[1], roles, g2);
  loss.l_anchor =
      anchor_term(links.pos_anchor, links.neg_anchor, embeddings, roles, alpha, d_embeddings);
  loss.l_reg = regularizer(params);
  loss.total = -(loss.l_soc1 + loss.l_soc2 + alpha * loss.l_anchor) + beta * loss.l_reg;
  return loss;
}

void write_loss_trace_header(std::ostream& out) {
  out << "epoch,l_soc1,l_soc2,l_anchor,l_reg,total\n";
}

void write_loss_trace_row(std::ostream& out, std::size_t epoch, const LossBreakdown& loss) {
  out << epoch << std::setprecision(17) << ',' << loss.l_soc1 << ',' << loss.l_soc2 << ','
      << loss.l_anchor << ',' << loss.l_reg << ',' << loss.total << '\n';
}

}  // namespace hgane
