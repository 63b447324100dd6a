#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>

namespace hgane {

inline constexpr double kDefaultLeakySlope = 0.2;

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }
// Right-derivative at the kink.
inline double leaky_relu_grad(double x, double slope) { return x >= 0.0 ? 1.0 : slope; }

inline double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Nonlinearity applied to a head's aggregated vector.
enum class Activation { kElu, kIdentity, kSoftmax };

std::string to_string(Activation a);
Activation parse_activation(std::string_view text);

// out = act(z); sizes must match.
void activate(Activation act, std::span<const double> z, std::span<double> out);
// d_z = J_act(z)^T d_out, given out = act(z).
void activate_backward(Activation act, std::span<const double> z, std::span<const double> out,
                       std::span<const double> d_out, std::span<double> d_z);

}  // namespace hgane
