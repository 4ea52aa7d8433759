#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mbl::verify {

namespace {

struct Neumaier {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

Eigen::Map<const Eigen::VectorXd> view(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

double compensated_dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("compensated_dot: length mismatch");
  Neumaier acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // Split each product into its rounded value and exact error term.
    const double p = a[i] * b[i];
    acc.add(p);
    acc.add(std::fma(a[i], b[i], -p));
  }
  return acc.value();
}

Eigen::MatrixXd densify(const Dataset& data) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()),
                                            static_cast<Eigen::Index>(data.dimension()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const SparseExample& row = data[i];
    for (std::size_t j = 0; j < row.indices.size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(row.indices[j])) = row.values[j];
    }
  }
  return X;
}

Vector central_difference(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> w, double h) {
  Vector probe(w.begin(), w.end());
  Vector g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    probe[j] = w[j] + h;
    const double up = f(probe);
    probe[j] = w[j] - h;
    const double down = f(probe);
    probe[j] = w[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

double reference_example_loss(ObjectiveKind kind, const Eigen::VectorXd& x, double label,
                              const Eigen::VectorXd& w) {
  const double z = x.dot(w);
  switch (kind) {
    case ObjectiveKind::logistic_l2: {
      const double m = -label * z;
      return m > 30.0 ? m + std::exp(-m) : std::log1p(std::exp(m));
    }
    case ObjectiveKind::sigmoid_lsq: {
      const double r = logistic(z) - (label + 1.0) / 2.0;
      return r * r;
    }
    case ObjectiveKind::quadratic: return 0.5 * (w - x).squaredNorm();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double reference_subset_loss(ObjectiveKind kind, const Eigen::MatrixXd& rows,
                             std::span<const double> labels, double sigma,
                             std::span<const std::size_t> subset, std::span<const double> w) {
  const Eigen::VectorXd wv = view(w);
  Neumaier acc;
  for (std::size_t i : subset) {
    const Eigen::VectorXd x = rows.row(static_cast<Eigen::Index>(i)).transpose();
    acc.add(reference_example_loss(kind, x, labels[i], wv));
  }
  return acc.value() / static_cast<double>(subset.size()) + 0.5 * sigma * wv.squaredNorm();
}

Eigen::MatrixXd naive_bfgs_inverse(const std::vector<Vector>& s, const std::vector<Vector>& y,
                                   double gamma) {
  if (s.empty()) throw std::invalid_argument("naive_bfgs_inverse: no pairs");
  const auto d = static_cast<Eigen::Index>(s.front().size());
  Eigen::MatrixXd H = gamma * Eigen::MatrixXd::Identity(d, d);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Eigen::VectorXd si = view(s[i]);
    const Eigen::VectorXd yi = view(y[i]);
    const double sy = si.dot(yi);
    const Eigen::VectorXd Hy = H * yi;
    // Expanded form of (I - rho s y^T) H (I - rho y s^T) + rho s s^T.
    H += ((sy + yi.dot(Hy)) / (sy * sy)) * (si * si.transpose()) -
         (Hy * si.transpose() + si * Hy.transpose()) / sy;
  }
  return H;
}

NewtonResult newton_logistic(const Dataset& data, double sigma, double tol,
                             std::size_t max_iterations) {
  const Eigen::MatrixXd X = densify(data);
  const auto n = X.rows();
  const auto d = X.cols();
  Eigen::VectorXd labels(n);
  for (Eigen::Index i = 0; i < n; ++i) labels(i) = data[static_cast<std::size_t>(i)].label;

  const auto loss_at = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd m = -(labels.array() * (X * w).array()).matrix();
    Neumaier acc;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc.add(m(i) > 30.0 ? m(i) + std::exp(-m(i)) : std::log1p(std::exp(m(i))));
    }
    return acc.value() / static_cast<double>(n) + 0.5 * sigma * w.squaredNorm();
  };

  NewtonResult out;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double f = loss_at(w);
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    const Eigen::VectorXd z = X * w;
    Eigen::VectorXd coef(n);
    Eigen::VectorXd curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = logistic(-labels(i) * z(i));
      coef(i) = -labels(i) * p;
      curv(i) = p * (1.0 - p);
    }
    const Eigen::VectorXd g = X.transpose() * coef / static_cast<double>(n) + sigma * w;
    out.grad_norm = g.norm();
    if (out.grad_norm <= tol) break;
    Eigen::MatrixXd H = X.transpose() * curv.asDiagonal() * X / static_cast<double>(n);
    H.diagonal().array() += sigma;
    const Eigen::VectorXd step = H.ldlt().solve(-g);
    double t = 1.0;
    for (int back = 0; back < 60; ++back, t *= 0.5) {
      const Eigen::VectorXd trial = w + t * step;
      const double ft = loss_at(trial);
      if (ft <= f + 1e-4 * t * g.dot(step)) {
        w = trial;
        f = ft;
        break;
      }
    }
  }
  out.w.assign(w.data(), w.data() + d);
  out.loss = f;
  return out;
}

double loglog_slope(std::span<const double> ks, std::span<const double> values) {
  if (ks.size() != values.size() || ks.size() < 2) {
    throw std::invalid_argument("loglog_slope: need two or more matched points");
  }
  double mx = 0.0;
  double my = 0.0;
  const auto m = static_cast<double>(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mx += std::log(ks[i]);
    my += std::log(values[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double dx = std::log(ks[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  const double lo = values[mid - 1];
  const double hi = values[mid];
  if (std::isinf(hi)) return hi;
  return 0.5 * (lo + hi);
}

}  // namespace mbl::verify
