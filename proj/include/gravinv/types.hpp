#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gravinv {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

/// Base class for every rejected precondition in the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a requested rank exceeds the numerical rank of a factorization.
class RankDeficiencyError : public Error {
public:
  RankDeficiencyError(const std::string& what, Index achievable)
      : Error(what), achievable_rank_(achievable) {}

  Index achievable_rank() const noexcept { return achievable_rank_; }

private:
  Index achievable_rank_;
};

/// Raised when a dense allocation would exceed the configured memory cap.
class MemoryCapError : public Error {
public:
  MemoryCapError(const std::string& what, std::size_t required)
      : Error(what), required_bytes_(required) {}

  std::size_t required_bytes() const noexcept { return required_bytes_; }

private:
  std::size_t required_bytes_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace detail

}  // namespace gravinv
