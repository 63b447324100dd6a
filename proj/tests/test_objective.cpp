#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"

using namespace hgane;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// Two-node network, one dimension: link (0,1) scores in(0)*re(1), link
// (1,0) scores in(1)*re(0).
NodeFeatures two_nodes(double s01, double s10) {
  NodeFeatures f;
  f.in = Matrix(2, 1);
  f.re = Matrix(2, 1, 1.0);
  f.in(0, 0) = s01;
  f.in(1, 0) = s10;
  return f;
}

}  // namespace

TEST_CASE("social_prob") {
  const Vector a{1.0, 0.0}, b{0.0, 3.0};
  CHECK(social_prob(a, b) == 0.5);
  const double s = std::sqrt(std::log(3.0) / 2.0);
  const Vector u{s, s};
  CHECK(social_prob(u, u) == doctest::Approx(0.75).epsilon(1e-14));
  const Vector x{1.0, 2.0}, y{-0.5, 0.25};
  // Directed: the source contributes its initiator row, the target its recipient row.
  NodeFeatures f;
  f.in = Matrix(2, 2);
  f.re = Matrix(2, 2);
  std::copy(x.begin(), x.end(), f.in.row(0).begin());
  std::copy(y.begin(), y.end(), f.re.row(1).begin());
  std::copy(y.begin(), y.end(), f.in.row(1).begin());
  f.re(0, 0) = 4.0;
  CHECK(social_logit(f, {0, 1}, FeatureRoles::kBoth) == doctest::Approx(0.0));
  CHECK(social_logit(f, {1, 0}, FeatureRoles::kBoth) == doctest::Approx(-2.0));
}

TEST_CASE("anchor_prob") {
  const Vector z(3, 0.0);
  CHECK(anchor_prob(z, z, z, z) == 0.5);
  const Vector u_in{std::log(1.0 / 3.0)}, u_re{0.0}, v_in{1.0}, v_re{5.0};
  CHECK(anchor_prob(u_in, u_re, v_in, v_re) == doctest::Approx(0.25).epsilon(1e-14));

  Rng rng(7);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(13), b(13), c(13), d(13);
    for (auto* v : {&a, &b, &c, &d})
      for (double& x : *v) x = n(rng);
    CHECK(anchor_prob(a, b, c, d) == anchor_prob(c, d, a, b));
  }
}

TEST_CASE("social_loss examples") {
  const NodeFeatures f = two_nodes(logit(0.9), logit(0.1));
  CHECK(social_loss({}, {}, f) == 0.0);
  const std::vector<Link> pos{{0, 1}}, neg{{1, 0}};
  CHECK(social_loss(pos, neg, f) == doctest::Approx(2.0 * std::log(0.9)).epsilon(1e-12));
  const NodeFeatures half = two_nodes(0.0, 0.0);
  CHECK(social_loss(pos, {}, half) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
}

TEST_CASE("clamped losses stay finite") {
  const NodeFeatures f = two_nodes(-1e6, 1e6);
  const std::vector<Link> pos{{0, 1}}, neg{{1, 0}};
  const double l = social_loss(pos, neg, f);
  CHECK(std::isfinite(l));
  CHECK(l == doctest::Approx(2.0 * std::log(kProbabilityClamp)).epsilon(1e-6));
}

TEST_CASE("social_loss is monotone in each link's score") {
  const std::vector<Link> pos{{0, 1}}, neg{{1, 0}};
  double prev = -INFINITY;
  for (double s = -5.0; s <= 5.0; s += 0.5) {
    const double l = social_loss(pos, neg, two_nodes(s, 0.3));
    CHECK(l > prev);
    prev = l;
  }
  prev = INFINITY;
  for (double s = -5.0; s <= 5.0; s += 0.5) {
    const double l = social_loss(pos, neg, two_nodes(0.3, s));
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("anchor_loss examples") {
  EmbeddingTable t;
  for (auto& f : t) {
    f.in = Matrix(2, 1);
    f.re = Matrix(2, 1);
  }
  // (0,0) has concatenated dot logit(0.9); (1,1) has logit(0.1).
  t[0].in(0, 0) = logit(0.9);
  t[1].in(0, 0) = 1.0;
  t[0].re(1, 0) = logit(0.1);
  t[1].re(1, 0) = 1.0;
  const std::vector<Link> pos{{0, 0}}, neg{{1, 1}};
  CHECK(anchor_loss({}, {}, t) == 0.0);
  CHECK(anchor_loss(pos, neg, t) == doctest::Approx(2.0 * std::log(0.9)).epsilon(1e-12));
  const std::vector<Link> zero{{1, 0}};
  CHECK(anchor_loss(zero, {}, t) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
}

TEST_CASE("feature role variants substitute one role for both endpoints") {
  EmbeddingTable t;
  for (auto& f : t) {
    f.in = Matrix(2, 2);
    f.re = Matrix(2, 2);
  }
  t[0].in(0, 0) = 2.0;
  t[0].in(1, 0) = 3.0;
  t[0].re(0, 1) = 5.0;
  t[0].re(1, 1) = 7.0;
  t[1].in(1, 0) = 11.0;
  t[1].re(1, 1) = 13.0;
  CHECK(social_logit(t[0], {0, 1}, FeatureRoles::kBoth) == 0.0);
  CHECK(social_logit(t[0], {0, 1}, FeatureRoles::kInitiatorOnly) == 6.0);
  CHECK(social_logit(t[0], {0, 1}, FeatureRoles::kRecipientOnly) == 35.0);
  CHECK(anchor_logit(t, {0, 1}, FeatureRoles::kBoth) == 2.0 * 11.0 + 5.0 * 13.0);
  CHECK(anchor_logit(t, {0, 1}, FeatureRoles::kInitiatorOnly) == 2.0 * (2.0 * 11.0));
  CHECK(anchor_logit(t, {0, 1}, FeatureRoles::kRecipientOnly) == 2.0 * (5.0 * 13.0));
  CHECK(parse_feature_roles("initiator-only") == FeatureRoles::kInitiatorOnly);
  CHECK(parse_feature_roles(to_string(FeatureRoles::kRecipientOnly)) ==
        FeatureRoles::kRecipientOnly);
  CHECK_THROWS(parse_feature_roles("neither"));
}

TEST_CASE("regularizer") {
  ModelConfig m = test::toy_model();
  ModelParams p = init_params(m, {3, 3}, 1).zeros_like();
  CHECK(regularizer(p) == 0.0);
  p.layer1[0][0].w_in = Matrix(2, 2);
  p.layer1[0][0].w_in(0, 0) = 1.0;
  p.layer1[0][0].w_in(0, 1) = 2.0;
  p.layer1[0][0].w_in(1, 0) = 3.0;
  p.layer1[0][0].w_in(1, 1) = 4.0;
  CHECK(regularizer(p) == 30.0);

  ModelParams q = init_params(m, {3, 3}, 2);
  double manual = 0.0;
  for (auto t : tensor_spans(q))
    for (double v : t) manual += v * v;
  CHECK(regularizer(q) == doctest::Approx(manual).epsilon(1e-14));
  const double before = regularizer(q);
  for (auto t : tensor_spans(q))
    for (double& v : t) v *= 3.0;
  CHECK(regularizer(q) == doctest::Approx(9.0 * before).epsilon(1e-13));
}

TEST_CASE("total is linear in alpha and beta") {
  const AlignedPair pair = test::toy_pair();
  const ModelConfig m = test::toy_model();
  const NetworkFeatures feats = init_features(pair, m.feature_cap, 1);
  const ModelParams p = init_params(m, {3, 3}, 4);
  const EmbeddingTable emb = forward(pair, feats, p, m);
  const test::ToyLinks toy(pair);
  const ObjectiveLinks links = toy.view();
  auto total = [&](double a, double b) {
    return objective(links, emb, p, a, b, FeatureRoles::kBoth).total;
  };
  const LossBreakdown l = objective(links, emb, p, 1.0, 0.0, FeatureRoles::kBoth);
  CHECK(l.l_reg >= 0.0);
  CHECK(total(0.0, 0.0) == doctest::Approx(-(l.l_soc1 + l.l_soc2)).epsilon(1e-14));
  CHECK(total(1.0, 0.0) == doctest::Approx(-(l.l_soc1 + l.l_soc2 + l.l_anchor)).epsilon(1e-14));
  for (double a : {0.0, 0.5, 2.0, 7.0})
    CHECK(total(a, 0.1) - total(0.0, 0.1) == doctest::Approx(-a * l.l_anchor).epsilon(1e-10));
  for (double b : {0.0, 0.0005, 0.15, 3.0})
    CHECK(total(1.0, b) - total(1.0, 0.0) == doctest::Approx(b * l.l_reg).epsilon(1e-10));
}

TEST_CASE("loss trace csv") {
  std::ostringstream s;
  write_loss_trace_header(s);
  LossBreakdown l{-1.5, -2.0, -0.25, 4.0, 3.0};
  write_loss_trace_row(s, 7, l);
  CHECK(s.str() == "epoch,l_soc1,l_soc2,l_anchor,l_reg,total\n7,-1.5,-2,-0.25,4,3\n");
}
