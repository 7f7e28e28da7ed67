#ifndef SPDC_ADJOINT_HPP
#define SPDC_ADJOINT_HPP

#include <string>
#include <vector>

#include "spdc/correlations.hpp"
#include "spdc/loss.hpp"
#include "spdc/rng.hpp"

namespace spdc {

// Conjugate-Wirtinger gradient of the real loss: one complex number per
// parameter holding dL/dRe + i dL/dIm, so p -= lr * g descends componentwise.
// Frozen parameter groups come back as exact zeros. There is deliberately no
// gradient slot for the vacuum batch: samples are reparameterized constants.
struct ParamGradient {
  Eigen::VectorXcd d_pump;
  Eigen::MatrixXcd d_holo;
};

// The differentiable forward model: vacuum batch -> split-step propagation
// -> moment estimation -> P -> loss against a fixed target. One instance
// caches the z-dependent mode stacks, so repeated (theta, phi) evaluations
// only redo synthesis. Gradients come from a checkpointed reverse sweep:
// slice entry states are recorded per sample and intra-slice values are
// recomputed during the backward pass, with the batch reduction done in
// fixed sample order.
class SpdcPipeline {
public:
  SpdcPipeline(const GridSpec& grid, const InteractionParams& params,
               ModeBasis basis_s, ModeBasis basis_i, const ModeBasis& pump_basis,
               const ModeBasis& holo_basis, bool holo_uniform,
               Eigen::MatrixXd target, LossWeights weights, double sigma0_sq = 0.5,
               int threads = 1);

  struct Eval {
    double loss = 0.0;
    CorrelationMatrix P;
    MomentSet moments;
  };

  Eval evaluate(const PumpParams& pump, const HologramParams& holo,
                const VacuumBatch& batch) const;

  struct GradEval {
    double loss = 0.0;
    CorrelationMatrix P;
    MomentSet moments;
    ParamGradient grad;
  };

  GradEval grad(const PumpParams& pump, const HologramParams& holo,
                const VacuumBatch& batch) const;

  const GridSpec& grid() const { return cache_.grid(); }
  const InteractionParams& params() const { return cache_.params(); }
  const ModeBasis& basis_s() const { return basis_s_; }
  const ModeBasis& basis_i() const { return basis_i_; }
  const Eigen::MatrixXd& target() const { return target_; }
  const LossWeights& weights() const { return weights_; }
  double sigma0_sq() const { return sigma0_sq_; }
  int threads() const { return threads_; }
  void set_threads(int t) { threads_ = t; }

  // Backward of the moment estimators (public so the gradient convention is
  // testable in isolation: a loss of sum_m N(m) with B = 1 must give exactly
  // 2 c per coefficient).
  static void moments_backward(const BatchProjections& proj,
                               const Eigen::VectorXd& n_s_bar,
                               const Eigen::VectorXd& n_i_bar,
                               const Eigen::MatrixXcd& phi_bar,
                               Eigen::MatrixXcd& cs_bar, Eigen::MatrixXcd& ci_bar);

private:
  BatchProjections forward_batch(const SliceStack& stack, const VacuumBatch& batch) const;

  ModeBasis basis_s_, basis_i_;
  Eigen::MatrixXd target_;
  LossWeights weights_;
  double sigma0_sq_;
  int threads_;
  InteractionCache cache_;
  std::vector<ArrayXcd> ms_L_, mi_L_, ms_0_, mi_0_;  // measurement mode stacks
};

// Spec-level entry point: loss and conjugate-Wirtinger gradients of the
// pipeline closed over a frozen vacuum batch.
inline std::pair<double, ParamGradient> grad(const SpdcPipeline& pipeline,
                                             const PumpParams& pump,
                                             const HologramParams& holo,
                                             const VacuumBatch& batch) {
  auto g = pipeline.grad(pump, holo, batch);
  return {g.loss, std::move(g.grad)};
}

// Finite-difference validation harness: central differences over every
// trainable Re/Im component against the adjoint gradient.
struct GradCheckReport {
  struct Row {
    std::string name;
    double analytic = 0.0, fd = 0.0, rel_err = 0.0;
  };
  std::vector<Row> rows;
  double max_rel_err = 0.0;
  double fd_step = 0.0, tolerance = 0.0;
  bool pass = false;

  std::string to_text() const;
  std::string to_csv() const;
};

GradCheckReport grad_check(const SpdcPipeline& pipeline, const PumpParams& pump,
                           const HologramParams& holo, const VacuumBatch& batch,
                           double fd_step, double tolerance);

namespace primitives {

// Adjoint of the exact two-mode-squeeze update at one pixel. Inputs are the
// pre-step fields (x_s, x_i), the coupling rate q and step dz; (ys_bar,
// yi_bar) are the output cotangents. Returns input cotangents and
// accumulates the q cotangent.
void coupling_adjoint(Complex xs, Complex xi, Complex q, double dz, Complex ys_bar,
                      Complex yi_bar, Complex& xs_bar, Complex& xi_bar, Complex& q_bar);

// Tangent (directional derivative) of the same update; used by the adjoint
// identity tests as the independently derived linearization.
void coupling_tangent(Complex xs, Complex xi, Complex q, double dz, Complex dxs,
                      Complex dxi, Complex dq, Complex& dys, Complex& dyi);

// Adjoint of the pointwise clip a = u / max(1, |u|); on the |u| = 1 boundary
// the saturated branch is used.
ArrayXcd clip_backward(const ArrayXcd& u, const ArrayXcd& a_bar);
ArrayXcd clip_tangent(const ArrayXcd& u, const ArrayXcd& du);

}  // namespace primitives

}  // namespace spdc

#endif  // SPDC_ADJOINT_HPP
