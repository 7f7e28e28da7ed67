#ifndef SPDC_OPTIMIZER_HPP
#define SPDC_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "spdc/adjoint.hpp"

namespace spdc {

enum class TargetKind { LgQudit, LgHighOrderQubit, HgQuquad, Custom };

// Desired two-photon correlation. The paper's target kets carry relative
// phases that P cannot distinguish; only the probability pattern is encoded.
struct TargetSpec {
  TargetKind kind = TargetKind::Custom;
  int d = 0;  // qudit dimension
  int l = 0;  // high-order qubit OAM
  Eigen::MatrixXd custom;
};

// P_target on the measurement bases: uniform 1/d on the (l, l) diagonal for
// qudits, 1/2 on (l, -l) and (-l, l) for the high-order qubit, 1/4 on the
// four (HG_n0, HG_n0) cells for the ququad. Throws ModeNotInBasis when a
// required mode is absent.
CorrelationMatrix make_target(const TargetSpec& spec, const ModeBasis& basis_s,
                              const ModeBasis& basis_i);

inline double loss(const CorrelationMatrix& p, const CorrelationMatrix& target,
                   const LossWeights& w) {
  return loss_value(p.p, target.p, w);
}

struct OptConfig {
  double lr = 0.05;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int iterations = 500;
  int batch = 128;
  int eval_batch = 2048;  // batch for the final P estimate
  LossWeights weights;
  bool fixed_noise = false;  // reuse the step-0 batch (debugging aid)
  int checkpoint_every = 0;  // 0 disables periodic checkpoints

  void validate() const {
    if (lr <= 0) throw InvalidArgument("lr must be > 0");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
      throw InvalidArgument("Adam betas must lie in [0, 1)");
    if (batch < 2) throw InvalidArgument("batch must be >= 2");
    if (iterations < 0) throw InvalidArgument("iterations must be >= 0");
  }
};

// Adam over a flat real vector (bias-corrected); complex parameters are
// handled as independent Re/Im components by the packing below.
struct AdamState {
  Eigen::VectorXd m, v;
  std::int64_t t = 0;
};

void adam_update(AdamState& state, Eigen::VectorXd& params,
                 const Eigen::VectorXd& grad, const OptConfig& cfg);

// Full optimizer state; the serialization round-trip is bit-exact so resumed
// runs continue identically.
struct TrainState {
  PumpParams pump;
  HologramParams holo;
  AdamState adam;
  int step = 0;
  std::vector<double> loss_history;
  std::uint64_t run_seed = 0;
  std::uint64_t config_hash = 0;

  std::vector<std::uint8_t> serialize() const;
  // Template supplies bases and flags (which are config-derived, not stored);
  // shape or config-hash mismatches throw MetadataMismatch.
  static TrainState deserialize(const std::vector<std::uint8_t>& bytes,
                                const TrainState& templ);
};

// One Adam update on the trainable groups; frozen groups are untouched.
TrainState adam_step(TrainState state, const ParamGradient& grad, const OptConfig& cfg);

// Vacuum seed for optimizer step t: depends on (run_seed, t) only, never on
// parameters (the reparameterization contract).
std::uint64_t step_noise_seed(std::uint64_t run_seed, int step);
std::uint64_t derived_seed(std::uint64_t run_seed, std::uint64_t purpose, std::uint64_t t);

struct TrainResult {
  TrainState state;
  CorrelationMatrix P;  // eval-batch estimate at the final parameters
  MomentSet moments;
};

struct TrainHooks {
  std::function<void(const TrainState&)> on_checkpoint;  // cadence hits
  std::function<void(int, double)> on_step;              // (step, loss)
};

// The inverse-design loop: per step draw a fresh vacuum batch, propagate,
// estimate moments and P, backpropagate, Adam-update. Deterministic for a
// given (config, seed) at any thread count.
TrainResult train(const SpdcPipeline& pipeline, TrainState init, const OptConfig& cfg,
                  const TrainHooks& hooks = {});

}  // namespace spdc

#endif  // SPDC_OPTIMIZER_HPP
