#ifndef SPDC_PROPAGATOR_HPP
#define SPDC_PROPAGATOR_HPP

#include <memory>
#include <vector>

#include "spdc/fft.hpp"
#include "spdc/medium.hpp"

namespace spdc {

// Signal/idler c-number envelopes at one z plane. Propagation conserves the
// flux difference integral(|A_s|^2 - |A_i|^2) dx dy exactly (Manley-Rowe).
struct FieldPair {
  ComplexField a_s, a_i;
  double z = 0.0;

  FieldPair() = default;
  FieldPair(ComplexField s, ComplexField i, double z_ = 0.0)
      : a_s(std::move(s)), a_i(std::move(i)), z(z_) {}

  double flux_difference() const { return a_s.power() - a_i.power(); }
  double total_flux() const { return a_s.power() + a_i.power(); }
  bool all_finite() const { return a_s.all_finite() && a_i.all_finite(); }
};

// Paraxial free-space half/full steps as spectral phase multiplies,
// exp(-i (kx^2+ky^2) dz / (2 k_j)) per field. Exactly norm-preserving; the
// adjoint is the same multiply with conjugated phases.
class DiffractionOp {
public:
  DiffractionOp(const GridSpec& grid, double k_signal, double k_idler, double dz_step);

  void apply(FieldPair& pair) const;          // one step of dz_step
  void apply_adjoint(FieldPair& pair) const;  // cotangent transport
  void apply_single(ArrayXcd& field, bool idler, bool adjoint) const;
  double dz_step() const { return dz_; }

private:
  Fft2 fft_;
  double dz_;
  ArrayXcd phase_s_, phase_i_, phase_s_conj_, phase_i_conj_;
};

// Per-slice interaction data for one (theta, phi) setting, shared by every
// vacuum sample of a batch. q = i kappa A_eff E_p is the pointwise coupling
// rate entering the two-mode squeeze update.
struct SliceStack {
  GridSpec grid;
  InteractionParams params;
  int n_seg = 1;
  double beta = 0.0;       // pump power normalization, fixed at z = 0
  double power_raw0 = 0.0; // pre-normalization pump power at z = 0
  ArrayXcd pump_raw0;                // unnormalized pump synthesis at z = 0
  std::vector<ArrayXcd> pump_raw;    // unnormalized pump at slice mid-planes
  std::vector<ArrayXcd> holo_u;      // pre-clip hologram per segment
  std::vector<ArrayXcd> holo_a;      // clipped hologram per segment
  std::vector<Complex> carrier;      // exp(-i delta_k z_c) per slice
  std::vector<ArrayXcd> q;           // coupling rate per slice

  int segment_of(int slice) const { return slice * n_seg / grid.nz; }
  ArrayXcd pump_at(int slice) const { return beta * pump_raw[slice]; }
};

// Caches the z-dependent mode stacks (pump basis at every mid-plane and at
// z = 0, hologram profiles) so repeated parameter updates only redo the
// cheap linear synthesis.
class InteractionCache {
public:
  InteractionCache(const GridSpec& grid, const InteractionParams& params,
                   const ModeBasis& pump_basis, const ModeBasis& holo_basis,
                   bool holo_uniform);

  SliceStack build(const PumpParams& pump, const HologramParams& holo) const;

  const GridSpec& grid() const { return grid_; }
  const InteractionParams& params() const { return params_; }
  const DiffractionOp& half_step() const { return *half_; }
  // [slice][k] pump basis fields at mid-planes; [k] at z = 0.
  const std::vector<std::vector<ArrayXcd>>& pump_modes() const { return pump_modes_; }
  const std::vector<ArrayXcd>& pump_modes0() const { return pump_modes0_; }
  const std::vector<ArrayXcd>& holo_profiles() const { return holo_profiles_; }

private:
  GridSpec grid_;
  InteractionParams params_;
  bool holo_uniform_;
  std::unique_ptr<DiffractionOp> half_;
  std::vector<std::vector<ArrayXcd>> pump_modes_;
  std::vector<ArrayXcd> pump_modes0_;
  std::vector<ArrayXcd> holo_profiles_;
};

// States entering each slice; replaying from any checkpoint reproduces the
// forward trajectory bit-exactly (the reverse sweep recomputes within
// slices from these).
struct PropagationRecord {
  std::vector<FieldPair> slice_in;
};

// Free-standing steps (the composed propagate() below is the hot path).
FieldPair diffraction_half_step(const FieldPair& pair, double dz_half,
                                const InteractionParams& params);
FieldPair coupling_step(const FieldPair& pair, const ComplexField& pump_slice,
                        const ComplexField& a_eff_slice, double kappa, double dz);
void coupling_step_inplace(ArrayXcd& a_s, ArrayXcd& a_i, const ArrayXcd& q, double dz);

// Symmetric Strang split through the crystal: per slice a diffraction half
// step, the exact cosh/sinh coupling update at the slice mid-plane, and a
// second half step. Throws NonFiniteField if the fields overflow.
FieldPair propagate_with_stack(const FieldPair& seed, const SliceStack& stack,
                               const DiffractionOp& half,
                               PropagationRecord* record = nullptr);

std::pair<FieldPair, PropagationRecord> propagate(const FieldPair& seed,
                                                  const PumpParams& pump,
                                                  const HologramParams& holo,
                                                  const InteractionParams& params,
                                                  const GridSpec& grid);

}  // namespace spdc

#endif  // SPDC_PROPAGATOR_HPP
