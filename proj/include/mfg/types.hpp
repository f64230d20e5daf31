#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mfg {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Transition kernel slice p(x'|x,a,xi) for one (action, symbol) pair.
// Rows index the current state, columns the successor state.
using Kernel = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

// Tolerances used by validation and the numerical contracts.
inline constexpr Scalar kProbRowTol = 1e-12;     // per-row stochasticity
inline constexpr Scalar kDepthMassTol = 1e-10;   // scenario mass per tree depth
inline constexpr Scalar kFlowMassTol = 1e-10;    // distribution slice mass
inline constexpr Scalar kOccupancyMassTol = 1e-8;
inline constexpr Scalar kLinearSolveTol = 1e-10;
inline constexpr Scalar kValueConsistencyTol = 1e-12;
inline constexpr Scalar kExploitabilityFloor = -1e-9;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ModeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Total variation distance between two mass vectors of equal size.
template <typename A, typename B>
Scalar total_variation(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& q) {
  if (p.size() != q.size()) throw ShapeError("total_variation: size mismatch");
  return Scalar(0.5) * (p.derived() - q.derived()).cwiseAbs().sum();
}

/// True when every entry is nonnegative and the entries sum to `target` within `tol`.
template <typename Derived>
bool is_mass_vector(const Eigen::MatrixBase<Derived>& v, Scalar target, Scalar tol) {
  if (v.size() == 0) return false;
  if ((v.derived().array() < Scalar(0)).any()) return false;
  return std::abs(v.derived().sum() - target) <= tol;
}

}  // namespace mfg
