#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace hgane {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; message carries file and line.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Input parsed but violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient; `component` names the offending term.
class NumericalError : public Error {
 public:
  NumericalError(std::string component, const std::string& what)
      : Error(what), component_(std::move(component)) {}
  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Two-network indexing helpers: networks are 0 (G1) and 1 (G2).
inline constexpr int other(int network) { return 1 - network; }

}  // namespace hgane
