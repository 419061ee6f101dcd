#pragma once

#include <stdexcept>

namespace membrane {

/// A series could not reach the requested tolerance within its step cap.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bound was requested outside the regime where its constants make sense
/// (for the finer error bound: C_1(m)/m >= 1).
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization or solve that is provably well posed failed numerically.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace membrane
