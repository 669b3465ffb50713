#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shrinker {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments: bad dimension/kind combination, t >= t0, etc.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The normal graph left the admissible tube |v| < sigma.
class GraphOverflow : public Error {
 public:
  GraphOverflow(std::size_t node, double value, double bound)
      : Error("graph overflow at node " + std::to_string(node) + ": |v| = " +
              std::to_string(value) + " >= bound " + std::to_string(bound)),
        node_(node),
        value_(value),
        bound_(bound) {}

  std::size_t node() const noexcept { return node_; }
  double value() const noexcept { return value_; }
  double bound() const noexcept { return bound_; }

 private:
  std::size_t node_;
  double value_;
  double bound_;
};

/// The graph normal tilted too far from the model normal.
class ExcessiveTilt : public Error {
 public:
  ExcessiveTilt(std::size_t node, double tilt)
      : Error("excessive tilt at node " + std::to_string(node) +
              ": <nu_Sigma, nu_M> = " + std::to_string(tilt)),
        node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// A vanishing area element or otherwise unusable parameterization.
class DegenerateSurface : public Error {
 public:
  DegenerateSurface(std::size_t node, const std::string& what)
      : Error("degenerate surface at node " + std::to_string(node) + ": " + what),
        node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class SelfIntersection : public Error {
 public:
  using Error::Error;
};

/// A regression or extrapolation could not produce a trustworthy answer.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace shrinker
