#ifndef SPDC_CORRELATIONS_HPP
#define SPDC_CORRELATIONS_HPP

#include <optional>
#include <vector>

#include "spdc/medium.hpp"
#include "spdc/propagator.hpp"

namespace spdc {

// Per-sample mode projections of a batch: rows are samples, columns modes.
// c0_* are the projections of the raw vacuum seeds at z = 0; they enter the
// estimators as an exactly-unbiased control variate for the vacuum part.
struct BatchProjections {
  Eigen::MatrixXcd c_s, c_i;    // outputs at z = L
  Eigen::MatrixXcd c0_s, c0_i;  // seeds at z = 0 (may be empty)
  int batch() const { return static_cast<int>(c_s.rows()); }
};

// Monte Carlo estimates of the symmetric-ordered moments, corrected to
// normal ordering: N are vacuum-subtracted occupations, Phi(m,n) estimates
// <a_s(m) a_i(n)>, G1 are Hermitian <a^dag(m) a(n)> matrices. The exchange
// moment X(m,n) ~ <a_s^dag(m) a_i(n)> vanishes for polarization-
// distinguishable pairs and is kept as a self-check only.
struct MomentSet {
  Eigen::VectorXd n_s, n_i;
  Eigen::MatrixXcd phi;
  Eigen::MatrixXcd g1_s, g1_i;
  Eigen::MatrixXcd exchange;
  Eigen::MatrixXd phi_sem_sq;  // squared standard error of each Phi entry
  int batch = 0;
};

// Normalized two-photon probability P over (signal mode, idler mode).
struct CorrelationMatrix {
  Eigen::MatrixXd p;
  std::vector<std::string> labels_s, labels_i;
  double floored_mass = 0.0;  // estimator mass clipped at zero, diagnostic
};

BatchProjections project_batch(const std::vector<FieldPair>& outputs,
                               const std::vector<FieldPair>* seeds,
                               const ModeBasis& basis_s, const ModeBasis& basis_i,
                               double z_out, int threads = 1);

// Moment accumulation over samples in index order (deterministic for any
// thread count upstream). Uses the control variate when seeds were projected;
// otherwise subtracts the nominal sigma0_sq constants as stated.
MomentSet accumulate_moments(const BatchProjections& proj, double sigma0_sq);

// Convenience wrapper: project then accumulate. B >= 2 required.
MomentSet estimate_moments(const std::vector<FieldPair>& outputs,
                           const std::vector<FieldPair>* seeds,
                           const ModeBasis& basis_s, const ModeBasis& basis_i,
                           double z_out, double sigma0_sq, int threads = 1);

// P_raw(m,n) = |Phi|^2 + N_s(m) N_i(n) (Gaussian-state factorization; the
// second term is the accidental floor), negatives floored, normalized to 1.
// Throws DegenerateP when the pair signal is indistinguishable from the
// estimator noise floor (kappa = 0 or B too small).
CorrelationMatrix compute_P(const MomentSet& moments);

// Direct fourth-moment estimator (flagged alternative for cross-validation):
// G2(m,n) from mean(|c_s|^2 |c_i|^2) with symmetric-ordering corrections.
Eigen::MatrixXd fourth_moment_G2(const BatchProjections& proj, double sigma0_sq);

// First Born approximation of <a_s(m) a_i(n)>: the independent low-gain
// oracle, quadrature of i kappa A_eff E_p conj(M_s) conj(M_i) over the
// crystal with analytically propagated modes.
Eigen::MatrixXcd perturbative_jsa(const PumpParams& pump, const HologramParams& holo,
                                  const InteractionParams& params,
                                  const ModeBasis& basis_s, const ModeBasis& basis_i,
                                  const GridSpec& grid);

// Bhattacharyya coefficient sum(sqrt(P Q)); 1 iff the distributions match.
double fidelity(const CorrelationMatrix& p, const CorrelationMatrix& target);
double fidelity(const Eigen::MatrixXd& p, const Eigen::MatrixXd& target);

}  // namespace spdc

#endif  // SPDC_CORRELATIONS_HPP
