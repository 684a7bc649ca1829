#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (bad file, violated invariant).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class EmptyPointSet : public InvalidInput {
 public:
  EmptyPointSet() : InvalidInput("point set is empty") {}
};

class InvalidRotation : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class EmptyIsosurface : public Error {
 public:
  EmptyIsosurface() : Error("no grid cell straddles the iso level") {}
};

class TargetTooLarge : public InvalidInput {
 public:
  TargetTooLarge(std::size_t target, std::size_t available)
      : InvalidInput("decimation target " + std::to_string(target) +
                     " exceeds vertex count " + std::to_string(available)) {}
};

class EmptyAnchorSet : public InvalidInput {
 public:
  EmptyAnchorSet() : InvalidInput("anchor set is empty") {}
};

class InvalidDepth : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class DegenerateDirection : public Error {
 public:
  using Error::Error;
};

class EmptySet : public InvalidInput {
 public:
  EmptySet() : InvalidInput("sample set is empty") {}
};

class InvalidParams : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Raised by the optimizer when a loss term evaluates to NaN or infinity.
class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(std::size_t iteration)
      : Error("non-finite loss at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace dflow
