#ifndef SPDC_LOSS_HPP
#define SPDC_LOSS_HPP

#include <Eigen/Dense>

#include "spdc/errors.hpp"

namespace spdc {

struct LossWeights {
  double l1 = 1.0;
  double fidelity = 1.0;
};

// Weighted sum of elementwise L1 distance and (1 - Bhattacharyya fidelity)
// between two normalized correlation matrices. Zero iff p == target.
double loss_value(const Eigen::MatrixXd& p, const Eigen::MatrixXd& target,
                  const LossWeights& w);

// dL/dP elementwise. On kinks (P == T) and where the floor pinned P to zero
// the zero subgradient is used; both choices are measure-zero for the
// stochastic estimates this sees.
Eigen::MatrixXd loss_backward(const Eigen::MatrixXd& p, const Eigen::MatrixXd& target,
                              const LossWeights& w);

}  // namespace spdc

#endif  // SPDC_LOSS_HPP
