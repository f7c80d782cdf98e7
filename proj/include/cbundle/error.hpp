#pragma once

#include <stdexcept>
#include <string>

namespace cbundle {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A point or input violates a geometric constraint (off-manifold point,
/// arity mismatch, incompatible manifolds).
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// A degenerate configuration was detected (tangential zero, vanishing
/// frame, non-regular level set).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A numerical check that a construction relies on failed.
class CheckFailure : public Error {
 public:
  using Error::Error;
};

/// A profile or cutoff function violates one of its defining conditions.
class ValidationError : public CheckFailure {
 public:
  ValidationError(const std::string& condition, double witness, const std::string& detail)
      : CheckFailure(condition + " violated at t = " + std::to_string(witness) + ": " + detail),
        condition_(condition),
        witness_(witness) {}
  const std::string& condition() const { return condition_; }
  double witness() const { return witness_; }

 private:
  std::string condition_;
  double witness_;
};

/// A tuning search (collar slope, plateau height, scale factor) did not
/// produce a passing candidate.
class TuningFailure : public CheckFailure {
 public:
  using CheckFailure::CheckFailure;
};

/// Expression evaluation outside the domain (log/sqrt of a negative number,
/// division by ~0).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbundle
