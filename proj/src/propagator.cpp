#include "spdc/propagator.hpp"

#include <cmath>

namespace spdc {

DiffractionOp::DiffractionOp(const GridSpec& grid, double k_signal, double k_idler,
                             double dz_step)
    : fft_(grid.nx, grid.ny), dz_(dz_step) {
  const int n = grid.npix();
  phase_s_.resize(n);
  phase_i_.resize(n);
  for (int j = 0; j < grid.ny; ++j) {
    const double ky = grid.ky(j);
    for (int i = 0; i < grid.nx; ++i) {
      const double kx = grid.kx(i);
      const double kt2 = kx * kx + ky * ky;
      const int idx = j * grid.nx + i;
      const double as = -kt2 * dz_step / (2.0 * k_signal);
      const double ai = -kt2 * dz_step / (2.0 * k_idler);
      phase_s_[idx] = Complex(std::cos(as), std::sin(as));
      phase_i_[idx] = Complex(std::cos(ai), std::sin(ai));
    }
  }
  phase_s_conj_ = phase_s_.conjugate();
  phase_i_conj_ = phase_i_.conjugate();
}

void DiffractionOp::apply_single(ArrayXcd& field, bool idler, bool adjoint) const {
  if (dz_ == 0.0) return;
  const ArrayXcd& ph = adjoint ? (idler ? phase_i_conj_ : phase_s_conj_)
                               : (idler ? phase_i_ : phase_s_);
  fft_.apply(field, FftDirection::Forward);
  field *= ph;
  fft_.apply(field, FftDirection::Inverse);
}

void DiffractionOp::apply(FieldPair& pair) const {
  apply_single(pair.a_s.v, false, false);
  apply_single(pair.a_i.v, true, false);
}

void DiffractionOp::apply_adjoint(FieldPair& pair) const {
  apply_single(pair.a_s.v, false, true);
  apply_single(pair.a_i.v, true, true);
}

FieldPair diffraction_half_step(const FieldPair& pair, double dz_half,
                                const InteractionParams& params) {
  if (dz_half == 0.0) return pair;  // identity, bitwise
  DiffractionOp op(pair.a_s.grid, params.k_s(), params.k_i(), dz_half);
  FieldPair out = pair;
  op.apply(out);
  out.z = pair.z + dz_half;
  return out;
}

// Exact update generated by dA_s/dz = q conj(A_i), dA_i/dz = q conj(A_s):
// A_s' = cosh(g dz) A_s + sinh(g dz)/g q conj(A_i) and symmetrically, with
// g = |q|. Preserves |A_s|^2 - |A_i|^2 per pixel.
void coupling_step_inplace(ArrayXcd& a_s, ArrayXcd& a_i, const ArrayXcd& q, double dz) {
  const Eigen::Index n = a_s.size();
  for (Eigen::Index p = 0; p < n; ++p) {
    const Complex qp = q[p];
    const double g = std::abs(qp);
    if (g == 0.0) continue;
    const double u = g * dz;
    const double c = std::cosh(u);
    // sinh(u)/g with a series fallback in the tiny-gain regime.
    const double s_over_g =
        u < 1e-2 ? dz * (1.0 + u * u / 6.0 * (1.0 + u * u / 20.0)) : std::sinh(u) / g;
    const Complex xs = a_s[p];
    const Complex xi = a_i[p];
    a_s[p] = c * xs + s_over_g * qp * std::conj(xi);
    a_i[p] = c * xi + s_over_g * qp * std::conj(xs);
  }
}

FieldPair coupling_step(const FieldPair& pair, const ComplexField& pump_slice,
                        const ComplexField& a_eff_slice, double kappa, double dz) {
  if (!pump_slice.grid.same_transverse(pair.a_s.grid) ||
      !a_eff_slice.grid.same_transverse(pair.a_s.grid))
    throw ShapeMismatch("coupling_step: grids differ");
  FieldPair out = pair;
  if (kappa == 0.0) return out;
  const ArrayXcd q = Complex(0.0, kappa) * a_eff_slice.v * pump_slice.v;
  coupling_step_inplace(out.a_s.v, out.a_i.v, q, dz);
  return out;
}

InteractionCache::InteractionCache(const GridSpec& grid, const InteractionParams& params,
                                   const ModeBasis& pump_basis, const ModeBasis& holo_basis,
                                   bool holo_uniform)
    : grid_(grid), params_(params), holo_uniform_(holo_uniform) {
  params_.validate();
  half_ = std::make_unique<DiffractionOp>(grid, params.k_s(), params.k_i(), grid.dz / 2.0);
  pump_modes_.resize(grid.nz);
  for (int j = 0; j < grid.nz; ++j) {
    const double zc = (j + 0.5) * grid.dz;
    pump_modes_[j].reserve(pump_basis.size());
    for (int k = 0; k < pump_basis.size(); ++k)
      pump_modes_[j].push_back(eval_mode(pump_basis[k], zc, grid).v);
  }
  pump_modes0_.reserve(pump_basis.size());
  for (int k = 0; k < pump_basis.size(); ++k)
    pump_modes0_.push_back(eval_mode(pump_basis[k], 0.0, grid).v);
  if (!holo_uniform) {
    for (const auto& f : hologram_profiles(holo_basis, grid))
      holo_profiles_.push_back(f.v);
  }
}

SliceStack InteractionCache::build(const PumpParams& pump, const HologramParams& holo) const {
  if (pump.coeffs.size() != static_cast<Eigen::Index>(pump_modes0_.size()))
    throw ShapeMismatch("pump coefficients / cached basis size");
  holo.validate(grid_.nz);

  SliceStack st;
  st.grid = grid_;
  st.params = params_;
  st.n_seg = holo.kind == HologramParams::Kind::Uniform ? 1 : holo.n_seg;

  if (pump.coeffs.isZero(0.0)) throw AllZeroPump("pump coefficients are all zero");
  st.pump_raw0 = ArrayXcd::Zero(grid_.npix());
  for (int k = 0; k < pump.coeffs.size(); ++k)
    st.pump_raw0 += pump.coeffs[k] * pump_modes0_[k];
  st.power_raw0 = st.pump_raw0.abs2().sum() * grid_.pixel_area();
  if (!(st.power_raw0 > 0.0)) throw AllZeroPump("pump synthesis has zero power");
  st.beta = std::sqrt(pump.power / st.power_raw0);

  st.pump_raw.resize(grid_.nz);
  for (int j = 0; j < grid_.nz; ++j) {
    st.pump_raw[j] = ArrayXcd::Zero(grid_.npix());
    for (int k = 0; k < pump.coeffs.size(); ++k)
      st.pump_raw[j] += pump.coeffs[k] * pump_modes_[j][k];
  }

  st.holo_u.resize(st.n_seg);
  st.holo_a.resize(st.n_seg);
  if (holo.kind == HologramParams::Kind::Uniform) {
    st.holo_u[0] = ArrayXcd::Ones(grid_.npix());
    st.holo_a[0] = st.holo_u[0];
  } else {
    for (int s = 0; s < st.n_seg; ++s) {
      ArrayXcd u = ArrayXcd::Zero(grid_.npix());
      for (int k = 0; k < holo.basis.size(); ++k)
        u += holo.raw(s, k) * holo_profiles_[k];
      st.holo_u[s] = u;
      st.holo_a[s] = clip_unit_disk(u);
    }
  }

  const double dk = params_.delta_k();
  st.carrier.resize(grid_.nz);
  st.q.resize(grid_.nz);
  for (int j = 0; j < grid_.nz; ++j) {
    const double ph = -dk * (j + 0.5) * grid_.dz;
    st.carrier[j] = Complex(std::cos(ph), std::sin(ph));
    st.q[j] = (Complex(0.0, params_.kappa) * st.carrier[j] * st.beta) *
              (st.holo_a[st.segment_of(j)] * st.pump_raw[j]);
  }
  return st;
}

FieldPair propagate_with_stack(const FieldPair& seed, const SliceStack& stack,
                               const DiffractionOp& half, PropagationRecord* record) {
  FieldPair state = seed;
  state.z = 0.0;
  if (record) {
    record->slice_in.clear();
    record->slice_in.reserve(stack.grid.nz);
  }
  for (int j = 0; j < stack.grid.nz; ++j) {
    if (record) record->slice_in.push_back(state);
    half.apply(state);
    coupling_step_inplace(state.a_s.v, state.a_i.v, stack.q[j], stack.grid.dz);
    half.apply(state);
    state.z = (j + 1) * stack.grid.dz;
  }
  if (!state.all_finite())
    throw NonFiniteField("propagate: field overflow (kappa or pump out of range)");
  return state;
}

std::pair<FieldPair, PropagationRecord> propagate(const FieldPair& seed,
                                                  const PumpParams& pump,
                                                  const HologramParams& holo,
                                                  const InteractionParams& params,
                                                  const GridSpec& grid) {
  if (!seed.all_finite()) throw NonFiniteField("propagate: non-finite seed");
  InteractionCache cache(grid, params, pump.basis, holo.basis,
                         holo.kind == HologramParams::Kind::Uniform);
  const SliceStack stack = cache.build(pump, holo);
  PropagationRecord record;
  FieldPair out = propagate_with_stack(seed, stack, cache.half_step(), &record);
  return {std::move(out), std::move(record)};
}

}  // namespace spdc
