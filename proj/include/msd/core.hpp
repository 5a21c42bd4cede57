#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace msd {

template <typename Scalar = double>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

enum class ErrorKind {
  InvalidArgument,
  RankDeficientConstraints,
  DegenerateStep,
  BaseMismatch,
  EigengapCollapse,
  TransportDegeneracy,
  ZeroDirection,
  InsufficientData,
  CoincidentParticles,
  UnknownDescriptor,
};

const char* to_string(ErrorKind kind);

/// Every failure the library reports carries one of the kinds above, so
/// callers (the run driver in particular) can map it to a terminal status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// sym(M) = (M + Mᵀ)/2
template <typename Derived>
[[nodiscard]] Matrix<typename Derived::Scalar> sym(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

}  // namespace msd
