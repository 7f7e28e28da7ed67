#include "spdc/loss.hpp"

#include <cmath>

namespace spdc {

double loss_value(const Eigen::MatrixXd& p, const Eigen::MatrixXd& target,
                  const LossWeights& w) {
  if (p.rows() != target.rows() || p.cols() != target.cols())
    throw ShapeMismatch("loss: P / target shapes differ");
  double l1 = 0.0, fid = 0.0;
  for (Eigen::Index j = 0; j < p.rows(); ++j)
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
      const double a = p(j, k), t = target(j, k);
      l1 += std::abs(a - t);
      if (a > 0.0 && t > 0.0) fid += std::sqrt(a * t);
    }
  return w.l1 * l1 + w.fidelity * (1.0 - fid);
}

Eigen::MatrixXd loss_backward(const Eigen::MatrixXd& p, const Eigen::MatrixXd& target,
                              const LossWeights& w) {
  if (p.rows() != target.rows() || p.cols() != target.cols())
    throw ShapeMismatch("loss: P / target shapes differ");
  Eigen::MatrixXd g(p.rows(), p.cols());
  for (Eigen::Index j = 0; j < p.rows(); ++j)
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
      const double a = p(j, k), t = target(j, k);
      double d = 0.0;
      if (a > t)
        d += w.l1;
      else if (a < t)
        d -= w.l1;
      if (a > 0.0 && t > 0.0) d -= w.fidelity * 0.5 * std::sqrt(t / a);
      g(j, k) = d;
    }
  return g;
}

}  // namespace spdc
