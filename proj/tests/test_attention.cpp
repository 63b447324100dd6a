#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace hgane;

namespace {

double leaky(double x) { return x > 0.0 ? x : 0.2 * x; }

AttentionParams scalar_params() {
  AttentionParams p = AttentionParams::zeros(1, 1, 1);
  p.w_in(0, 0) = 1.0;
  p.w_re(0, 0) = 1.0;
  p.w_in_cross(0, 0) = 2.0;
  p.w_re_cross(0, 0) = -1.5;
  p.a_in = {1.0, 1.0};
  p.a_re = {1.0, 1.0};
  p.a_in_cross = {1.0, -1.0};
  p.a_re_cross = {0.5, 2.0};
  return p;
}

std::span<const double> s(const Vector& v) { return v; }

// G1: 0 -> 1; G2: 0 -> 1; anchor (0, 0).
AlignedPair two_node_pair() {
  const std::vector<Link> e{{0, 1}};
  return AlignedPair(DirectedGraph::from_edges(2, e), DirectedGraph::from_edges(2, e), {{0, 0}});
}

NetworkFeatures scalar_features(double u0_in, double u0_re, double u1_in, double u1_re,
                                double v0_in, double v0_re) {
  NetworkFeatures f;
  for (auto& nf : f) {
    nf.in = Matrix(2, 1);
    nf.re = Matrix(2, 1);
  }
  f[0].in(0, 0) = u0_in;
  f[0].re(0, 0) = u0_re;
  f[0].in(1, 0) = u1_in;
  f[0].re(1, 0) = u1_re;
  f[1].in(0, 0) = v0_in;
  f[1].re(0, 0) = v0_re;
  f[1].in(1, 0) = 0.7;
  f[1].re(1, 0) = -0.3;
  return f;
}

}  // namespace

TEST_CASE("raw coefficients: scalar hand cases") {
  const AttentionParams p = scalar_params();
  const Vector two{2.0}, three{3.0};
  CHECK(raw_intra_initiator(p, s(two), s(three)) == doctest::Approx(5.0));
  CHECK(raw_intra_recipient(p, s(two), s(three)) == doctest::Approx(5.0));
  // 1*(1*2) + (-1)*(2*3) = -4 -> LeakyReLU -> -0.8
  CHECK(raw_inter_initiator(p, s(two), s(three)) == doctest::Approx(-0.8));
  // 0.5*(1*2) + 2*(-1.5*3) = -8 -> -1.6
  CHECK(raw_inter_recipient(p, s(two), s(three)) == doctest::Approx(-1.6));
  // Custom slope.
  CHECK(raw_inter_initiator(p, s(two), s(three), 0.5) == doctest::Approx(-2.0));
}

TEST_CASE("raw coefficients: zero attention vectors give sigma(0)") {
  Rng rng(1);
  std::normal_distribution<double> n;
  AttentionParams p = AttentionParams::zeros(3, 4, 2);
  for (Matrix* m : {&p.w_in, &p.w_re, &p.w_in_cross, &p.w_re_cross})
    for (double& v : m->flat()) v = n(rng);
  const Vector u{0.3, -1.0, 2.0}, w{1.0, 0.5, -0.2}, v{0.1, 0.2, 0.3, 0.4};
  CHECK(raw_intra_initiator(p, s(u), s(w)) == 0.0);
  CHECK(raw_intra_recipient(p, s(u), s(w)) == 0.0);
  CHECK(raw_inter_initiator(p, s(u), s(v)) == 0.0);
  CHECK(raw_inter_recipient(p, s(u), s(v)) == 0.0);
  CHECK_THROWS_AS(raw_intra_initiator(p, s(v), s(w)), ShapeError);
  CHECK_THROWS_AS(raw_inter_initiator(p, s(u), s(u)), ShapeError);
}

TEST_CASE("raw coefficients: structural properties") {
  Rng rng(3);
  std::normal_distribution<double> n;
  AttentionParams p = AttentionParams::zeros(3, 3, 4);
  p.for_each([&](const std::string&, std::span<double> t) {
    for (double& v : t) v = n(rng);
  });
  p.w_re = p.w_in;
  p.a_re = p.a_in;
  const Vector x{0.3, -1.0, 2.0}, y{1.0, 0.5, -0.2};
  // Shared formula: recipient on (x, y) equals initiator on (x, y) when the
  // role parameters coincide.
  CHECK(raw_intra_recipient(p, s(x), s(y)) == doctest::Approx(raw_intra_initiator(p, s(x), s(y))));

  // Pre-activation is linear in v: with the first block zeroed, doubling v
  // doubles the positive-side score.
  const Vector zero(3, 0.0), v{0.4, -0.1, 0.9};
  Vector v2 = v;
  for (double& c : v2) c *= 2.0;
  const double once = raw_inter_initiator(p, s(zero), s(v));
  CHECK(raw_inter_initiator(p, s(zero), s(v2)) == doctest::Approx(2.0 * once));

  // Recipient inter score ignores initiator parameters.
  AttentionParams q = p;
  q.w_in(0, 0) += 5.0;
  q.a_in_cross[0] -= 3.0;
  q.w_in_cross(1, 1) *= -2.0;
  CHECK(raw_inter_recipient(q, s(x), s(y)) == raw_inter_recipient(p, s(x), s(y)));
}

TEST_CASE("normalize examples") {
  const Vector one{0.7}, none;
  auto w = normalize(one, none);
  CHECK(w.intra == Vector{1.0});
  CHECK(w.inter.empty());
  w = normalize(Vector{0.0, 0.0}, Vector{0.0});
  for (double x : w.intra) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(w.inter[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  w = normalize(Vector{1.0}, Vector{0.0});
  const double e = std::exp(1.0);
  CHECK(w.intra[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-15));
  CHECK(w.inter[0] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(normalize(none, none), EmptyNeighborhood);
  // Large raws do not overflow.
  w = normalize(Vector{1000.0, 999.0}, Vector{});
  CHECK(w.intra[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-15));
}

TEST_CASE("normalize: sums to one, positive, reduces to intra softmax without partner") {
  Rng rng(9);
  std::normal_distribution<double> n(0.0, 5.0);
  std::uniform_int_distribution<int> size(0, 6);
  for (int trial = 0; trial < 500; ++trial) {
    Vector intra(size(rng)), inter(size(rng) % 2);
    if (intra.empty() && inter.empty()) intra.push_back(0.0);
    for (double& v : intra) v = n(rng);
    for (double& v : inter) v = n(rng);
    const auto w = normalize(intra, inter);
    double total = 0.0;
    for (double x : w.intra) {
      CHECK(x > 0.0);
      total += x;
    }
    for (double x : w.inter) {
      CHECK(x > 0.0);
      total += x;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    if (inter.empty()) {
      double z = 0.0;
      for (double x : intra) z += std::exp(x);
      for (std::size_t i = 0; i < intra.size(); ++i)
        CHECK(w.intra[i] == doctest::Approx(std::exp(intra[i]) / z).epsilon(1e-12));
    }
  }
}

TEST_CASE("coefficient sets on a two-node toy") {
  const AlignedPair pair = two_node_pair();
  const NetworkFeatures f = scalar_features(0.5, -1.0, 2.0, 1.5, -0.8, 1.2);

  // Zero attention vectors: uniform over {neighbor 1, partner 0}.
  const AttentionParams flat = AttentionParams::zeros(1, 1, 1);
  const CoefficientSet c = coefficient_sets(pair, 0, f, flat, {}, Role::kInitiator, 0);
  CHECK(c.neighbors == std::vector<NodeId>{1});
  CHECK(c.partner == 0);
  CHECK(c.intra[0] == 0.5);
  CHECK(c.inter[0] == 0.5);

  // Node 1 in G1 has no successors and no partner.
  CHECK(coefficient_sets(pair, 0, f, flat, {}, Role::kInitiator, 1).empty());
  // Recipient role of node 1: only neighbor 0, weight 1.
  const CoefficientSet r1 = coefficient_sets(pair, 0, f, flat, {}, Role::kRecipient, 1);
  CHECK(r1.neighbors == std::vector<NodeId>{0});
  CHECK(r1.intra == Vector{1.0});
  CHECK(r1.partner == kNoNode);

  // Distinct features: SC+AD and SD+AC, evaluated by hand at d = 1.
  const AttentionParams p = scalar_params();
  const double u0_in = 0.5, u1_in = 2.0, u1_re = 1.5, v0_in = -0.8, v0_re = 1.2;
  auto softmax2 = [](double a, double b) {
    const double ea = std::exp(a), eb = std::exp(b);
    return std::pair{ea / (ea + eb), eb / (ea + eb)};
  };
  // SC+AD: intra pairs u0_in with u1_re, inter pairs u0_in with v0_in via W_in_cross.
  const auto [sc_intra, sc_inter] =
      softmax2(leaky(1.0 * u0_in + 1.0 * u1_re), leaky(1.0 * u0_in - 1.0 * (2.0 * v0_in)));
  const CoefficientSet scad = coefficient_sets(pair, 0, f, p, parse_mode("sc+ad"), Role::kInitiator, 0);
  CHECK(scad.intra[0] == doctest::Approx(sc_intra).epsilon(1e-14));
  CHECK(scad.inter[0] == doctest::Approx(sc_inter).epsilon(1e-14));
  // SD+AC: intra pairs u0_in with u1_in, inter pairs u0_in with v0_re via W_re_cross.
  const auto [sd_intra, sd_inter] =
      softmax2(leaky(1.0 * u0_in + 1.0 * u1_in), leaky(1.0 * u0_in - 1.0 * (-1.5 * v0_re)));
  const CoefficientSet sdac = coefficient_sets(pair, 0, f, p, parse_mode("SD+AC"), Role::kInitiator, 0);
  CHECK(sdac.intra[0] == doctest::Approx(sd_intra).epsilon(1e-14));
  CHECK(sdac.inter[0] == doctest::Approx(sd_inter).epsilon(1e-14));
  CHECK(std::abs(sdac.intra[0] - scad.intra[0]) > 1e-3);
}

TEST_CASE("mode names") {
  for (const ContributionMode& m : kAllModes) CHECK(parse_mode(to_string(m)) == m);
  CHECK(to_string(ContributionMode{}) == "sc+ad");
  CHECK(parse_mode("SC+AD") == ContributionMode{});
  CHECK_THROWS(parse_mode("sx+ad"));
  CHECK(neighbor_role(Role::kInitiator, Contribution::kCross) == Role::kRecipient);
  CHECK(neighbor_role(Role::kInitiator, Contribution::kDirect) == Role::kInitiator);
  CHECK(partner_role(Role::kRecipient, Contribution::kDirect) == Role::kRecipient);
  CHECK(partner_role(Role::kRecipient, Contribution::kCross) == Role::kInitiator);
}
