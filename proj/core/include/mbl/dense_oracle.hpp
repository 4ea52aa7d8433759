#pragma once

#include <Eigen/Dense>

#include "mbl/lbfgs.hpp"

namespace mbl {

// Largest dimension the dense routines will materialize.
inline constexpr std::size_t kMaxDenseDimension = 200;

/// Dense inverse Hessian approximation: starts from gamma * I and applies the
/// stored pairs oldest to newest with H <- V^T H V + rho s s^T,
/// V = I - rho y s^T. Independent of the two-loop recursion; used to audit it.
/// Throws UsageError when d exceeds kMaxDenseDimension.
Eigen::MatrixXd dense_inverse_oracle(const LbfgsMemory& mem, std::size_t dimension);

/// Dense Hessian approximation B = H^{-1} by the forward recursion
/// B0 = (1 / gamma) I, B <- B - B s s^T B / (s^T B s) + y y^T / (y^T s).
Eigen::MatrixXd dense_hessian_forward(const LbfgsMemory& mem, std::size_t dimension);

struct EigenBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Extreme eigenvalues of B from dense_hessian_forward.
EigenBounds eigen_bounds_audit(const LbfgsMemory& mem, std::size_t dimension);

}  // namespace mbl
