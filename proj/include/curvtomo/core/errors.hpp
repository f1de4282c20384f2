#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curvtomo {

/// Bad argument (non-positive step, grid mismatch, wrong sizes).
class ArgumentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A field was evaluated where it is not defined, or a shell/domain
/// invariant does not hold.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A trajectory did not leave the domain within the travel-time budget.
class TrappedError : public std::runtime_error {
  public:
    TrappedError(std::size_t node, const std::string& what)
        : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    std::size_t node() const { return node_; }

  private:
    std::size_t node_;
};

/// NaN/inf or divergence inside an iterative solver.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed config, image or sinogram file.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace curvtomo
