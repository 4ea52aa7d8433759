#include "mbl/lbfgs.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mbl/errors.hpp"

namespace mbl {

bool cautious_accept(std::span<const double> s, std::span<const double> y, double eps) {
  if (s.size() != y.size()) throw UsageError("cautious_accept: dimension mismatch");
  const double ss = squared_norm(s);
  if (ss == 0.0) throw UsageError("cautious_accept: zero step s");
  const double ys = dot(y, s);
  if (!std::isfinite(ys)) return false;
  if (eps > 0.0) return ys >= eps * ss;
  return ys > 0.0 && ys >= 1e-12 * std::sqrt(ss) * norm(y);
}

LbfgsMemory::LbfgsMemory(std::size_t capacity, ScalingPolicy scaling, double cautious_eps)
    : capacity_(capacity), scaling_(scaling), cautious_eps_(cautious_eps) {
  if (capacity_ == 0) throw ConfigError("lbfgs: memory must be positive");
  if (!(cautious_eps_ >= 0.0)) throw ConfigError("lbfgs: cautious eps must be >= 0");
  if (scaling_.kind == ScalingPolicy::Kind::fixed && !(scaling_.gamma0 > 0.0)) {
    throw ConfigError("lbfgs: fixed scaling must be positive");
  }
}

bool LbfgsMemory::admit(std::span<const double> s, std::span<const double> y) {
  if (!cautious_accept(s, y, cautious_eps_)) return false;
  CurvaturePair pair{Vector(s.begin(), s.end()), Vector(y.begin(), y.end()), 0.0};
  pair.rho = 1.0 / dot(pair.y, pair.s);
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back(std::move(pair));
  return true;
}

double LbfgsMemory::initial_scaling() const {
  if (scaling_.kind == ScalingPolicy::Kind::fixed) return scaling_.gamma0;
  if (pairs_.empty()) return 1.0;
  const CurvaturePair& newest = pairs_.back();
  return dot(newest.s, newest.y) / squared_norm(newest.y);
}

Vector LbfgsMemory::direction(std::span<const double> g) const {
  const std::size_t m = pairs_.size();
  Vector q(g.begin(), g.end());
  std::vector<double> alpha(m, 0.0);

  const auto check = [](double v, std::size_t pair, const char* loop) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("two-loop ") + loop + ": non-finite value at pair " +
                         std::to_string(pair));
    }
  };

  for (std::size_t i = m; i-- > 0;) {
    const CurvaturePair& p = pairs_[i];
    alpha[i] = p.rho * dot(p.s, q);
    check(alpha[i], i, "backward pass");
    axpy_inplace(-alpha[i], p.y, q);
  }

  scale_inplace(initial_scaling(), q);

  for (std::size_t i = 0; i < m; ++i) {
    const CurvaturePair& p = pairs_[i];
    const double beta = p.rho * dot(p.y, q);
    check(beta, i, "forward pass");
    axpy_inplace(alpha[i] - beta, p.s, q);
  }

  if (!all_finite(q)) throw NumericError("two-loop: non-finite direction");
  scale_inplace(-1.0, q);
  return q;
}

std::pair<LbfgsMemory, bool> admit_pair(LbfgsMemory mem, std::span<const double> s,
                                        std::span<const double> y) {
  const bool accepted = mem.admit(s, y);
  return {std::move(mem), accepted};
}

double initial_scaling(const LbfgsMemory& mem) { return mem.initial_scaling(); }

Vector two_loop_direction(const LbfgsMemory& mem, std::span<const double> g) {
  return mem.direction(g);
}

}  // namespace mbl
