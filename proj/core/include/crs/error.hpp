#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract user input (bad files, invalid instances).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An instance exceeds a size cap of an exhaustive procedure.
class TooLarge : public InputError {
 public:
  using InputError::InputError;
};

class NotATree : public InputError {
 public:
  using InputError::InputError;
};

class EdgeNeverAppears : public InputError {
 public:
  explicit EdgeNeverAppears(std::uint32_t edge)
      : InputError("edge " + std::to_string(edge) + " has x = 0 and never appears in R(x)"),
        edge_(edge) {}
  std::uint32_t edge() const noexcept { return edge_; }

 private:
  std::uint32_t edge_;
};

/// A one-element selection problem whose cut condition fails. `witness()` holds
/// element ids of a set S with Pr[S meets R] < sum of targets over S.
class Infeasible : public Error {
 public:
  Infeasible(std::string what, std::vector<int> witness, double hit_probability, double target_sum)
      : Error(std::move(what)),
        witness_(std::move(witness)),
        hit_probability_(hit_probability),
        target_sum_(target_sum) {}

  const std::vector<int>& witness() const noexcept { return witness_; }
  double hit_probability() const noexcept { return hit_probability_; }
  double target_sum() const noexcept { return target_sum_; }

 private:
  std::vector<int> witness_;
  double hit_probability_;
  double target_sum_;
};

class DegreeCapExceeded : public Error {
 public:
  DegreeCapExceeded(std::string what, std::int64_t vertex, std::size_t degree, std::size_t cap)
      : Error(std::move(what)), vertex_(vertex), degree_(degree), cap_(cap) {}

  /// Offending vertex, or -1 when raised for a bare ground set.
  std::int64_t vertex() const noexcept { return vertex_; }
  std::size_t degree() const noexcept { return degree_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::int64_t vertex_;
  std::size_t degree_;
  std::size_t cap_;
};

class CalibrationInsufficient : public Error {
 public:
  using Error::Error;
};

/// A checked invariant failed at run time (for example a rounded allocation
/// that violates disjointness).
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace crs
