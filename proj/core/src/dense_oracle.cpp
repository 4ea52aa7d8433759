#include "mbl/dense_oracle.hpp"

#include <string>

#include "mbl/errors.hpp"

namespace mbl {

namespace {

void require_small(std::size_t d) {
  if (d == 0 || d > kMaxDenseDimension) {
    throw UsageError("dense oracle: dimension " + std::to_string(d) + " outside [1, " +
                     std::to_string(kMaxDenseDimension) + "]");
  }
}

Eigen::Map<const Eigen::VectorXd> view(const Vector& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

Eigen::MatrixXd dense_inverse_oracle(const LbfgsMemory& mem, std::size_t dimension) {
  require_small(dimension);
  const auto d = static_cast<Eigen::Index>(dimension);
  Eigen::MatrixXd H = mem.initial_scaling() * Eigen::MatrixXd::Identity(d, d);
  for (const CurvaturePair& p : mem.pairs()) {
    const auto s = view(p.s);
    const auto y = view(p.y);
    const double rho = 1.0 / y.dot(s);
    const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(d, d) - rho * y * s.transpose();
    H = V.transpose() * H * V + rho * s * s.transpose();
  }
  return H;
}

Eigen::MatrixXd dense_hessian_forward(const LbfgsMemory& mem, std::size_t dimension) {
  require_small(dimension);
  const auto d = static_cast<Eigen::Index>(dimension);
  Eigen::MatrixXd B = (1.0 / mem.initial_scaling()) * Eigen::MatrixXd::Identity(d, d);
  for (const CurvaturePair& p : mem.pairs()) {
    const auto s = view(p.s);
    const auto y = view(p.y);
    const Eigen::VectorXd Bs = B * s;
    B += -(Bs * Bs.transpose()) / s.dot(Bs) + (y * y.transpose()) / y.dot(s);
  }
  return B;
}

EigenBounds eigen_bounds_audit(const LbfgsMemory& mem, std::size_t dimension) {
  const Eigen::MatrixXd B = dense_hessian_forward(mem, dimension);
  const Eigen::MatrixXd sym = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigen audit: solver failed");
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

}  // namespace mbl
