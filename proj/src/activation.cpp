#include "hgane/activation.hpp"

#include <algorithm>

#include "hgane/common.hpp"

namespace hgane {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kElu: return "elu";
    case Activation::kIdentity: return "identity";
    case Activation::kSoftmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(std::string_view text) {
  if (text == "elu") return Activation::kElu;
  if (text == "identity") return Activation::kIdentity;
  if (text == "softmax") return Activation::kSoftmax;
  throw Error("unknown activation '" + std::string(text) + "'");
}

void activate(Activation act, std::span<const double> z, std::span<double> out) {
  switch (act) {
    case Activation::kElu:
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = elu(z[i]);
      return;
    case Activation::kIdentity:
      std::copy(z.begin(), z.end(), out.begin());
      return;
    case Activation::kSoftmax: {
      if (z.empty()) return;
      const double top = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - top);
        sum += out[i];
      }
      for (double& v : out) v /= sum;
      return;
    }
  }
}

void activate_backward(Activation act, std::span<const double> z, std::span<const double> out,
                       std::span<const double> d_out, std::span<double> d_z) {
  switch (act) {
    case Activation::kElu:
      for (std::size_t i = 0; i < z.size(); ++i) d_z[i] = d_out[i] * elu_grad(z[i]);
      return;
    case Activation::kIdentity:
      std::copy(d_out.begin(), d_out.end(), d_z.begin());
      return;
    case Activation::kSoftmax: {
      double inner = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) inner += out[i] * d_out[i];
      for (std::size_t i = 0; i < out.size(); ++i) d_z[i] = out[i] * (d_out[i] - inner);
      return;
    }
  }
}

}  // namespace hgane
