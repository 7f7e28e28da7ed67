#include "spdc/medium.hpp"

#include <cmath>

namespace spdc {

void InteractionParams::validate() const {
  if (lambda_p <= 0 || lambda_s <= 0 || lambda_i <= 0)
    throw InvalidArgument("wavelengths must be > 0");
  if (n_p <= 0 || n_s <= 0 || n_i <= 0)
    throw InvalidArgument("refractive indices must be > 0");
  if (kappa < 0) throw InvalidArgument("kappa must be >= 0");
  if (poling_period <= 0) throw InvalidArgument("poling period must be > 0");
  if (pump_power <= 0) throw InvalidArgument("pump power must be > 0");
  const double lhs = std::abs(1.0 / lambda_p - 1.0 / lambda_s - 1.0 / lambda_i);
  if (lhs >= 1e-6 / lambda_p)
    throw UnitError("energy conservation violated: 1/lambda_p != 1/lambda_s + 1/lambda_i");
}

InteractionParams InteractionParams::with_mismatch(double delta_k) const {
  InteractionParams out = *this;
  out.poling_period = 2.0 * kPi / (bulk_mismatch() - delta_k);
  return out;
}

HologramParams HologramParams::uniform() {
  HologramParams h;
  h.kind = Kind::Uniform;
  h.n_seg = 1;
  h.trainable = false;
  return h;
}

HologramParams HologramParams::modal(ModeBasis basis, int n_seg) {
  HologramParams h;
  h.kind = Kind::Modal;
  h.basis = std::move(basis);
  h.n_seg = n_seg;
  h.raw = Eigen::MatrixXcd::Zero(n_seg, h.basis.size());
  return h;
}

void HologramParams::validate(int nz) const {
  if (kind == Kind::Uniform) return;
  if (n_seg < 1 || nz % n_seg != 0)
    throw InvalidArgument("hologram n_seg must divide nz");
  if (raw.rows() != n_seg || raw.cols() != basis.size())
    throw ShapeMismatch("hologram raw coefficients shape");
}

ComplexField build_pump(const PumpParams& pump, double z, const GridSpec& grid) {
  if (pump.coeffs.size() != pump.basis.size())
    throw ShapeMismatch("pump coefficients / basis size");
  if (pump.coeffs.isZero(0.0)) throw AllZeroPump("pump coefficients are all zero");

  auto synth = [&](double zz) {
    ComplexField f(grid);
    for (int k = 0; k < pump.basis.size(); ++k)
      f.v += pump.coeffs[k] * eval_mode(pump.basis[k], zz, grid).v;
    return f;
  };
  ComplexField at0 = synth(0.0);
  const double p0 = at0.power();
  if (!(p0 > 0.0)) throw AllZeroPump("pump synthesis has zero power at z = 0");
  const double beta = std::sqrt(pump.power / p0);
  ComplexField out = (z == 0.0) ? std::move(at0) : synth(z);
  out.v *= beta;
  return out;
}

std::vector<ComplexField> hologram_profiles(const ModeBasis& basis, const GridSpec& grid) {
  // The hologram is a material pattern, not a propagating beam: window
  // truncation only reparameterizes the achievable patterns, so the
  // containment requirement is laxer than for measured modes.
  std::vector<ComplexField> profiles;
  profiles.reserve(basis.size());
  for (const auto& m : basis.modes) profiles.push_back(eval_mode(m, 0.0, grid, 2.5));
  for (int k = 0; k < basis.size(); ++k) profiles[k].v *= basis[k].w0;
  return profiles;
}

ArrayXcd clip_unit_disk(const ArrayXcd& u) {
  ArrayXcd a = u;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double mag = std::abs(a[i]);
    if (mag > 1.0) a[i] /= mag;
  }
  return a;
}

ComplexField hologram_preclip(const HologramParams& holo, int seg, const GridSpec& grid) {
  if (holo.kind == HologramParams::Kind::Uniform)
    return ComplexField(grid, ArrayXcd::Ones(grid.npix()));
  if (seg < 0 || seg >= holo.n_seg) throw InvalidArgument("hologram segment index");
  const auto profiles = hologram_profiles(holo.basis, grid);
  ComplexField u(grid);
  for (int k = 0; k < holo.basis.size(); ++k) u.v += holo.raw(seg, k) * profiles[k].v;
  return u;
}

ComplexField build_hologram(const HologramParams& holo, int slice, const GridSpec& grid) {
  if (slice < 0 || slice >= grid.nz) throw InvalidArgument("hologram slice index");
  if (holo.kind == HologramParams::Kind::Uniform)
    return ComplexField(grid, ArrayXcd::Ones(grid.npix()));
  holo.validate(grid.nz);
  ComplexField u = hologram_preclip(holo, holo.segment_of(slice, grid.nz), grid);
  return ComplexField(grid, clip_unit_disk(u.v));
}

ComplexField effective_coupling(const ComplexField& a, int slice,
                                const InteractionParams& params, const GridSpec& grid) {
  const double zc = (slice + 0.5) * grid.dz;
  const double ph = -params.delta_k() * zc;
  ComplexField out = a;
  out.v *= Complex(std::cos(ph), std::sin(ph));
  return out;
}

PolingVolume binarize_volume(const std::vector<ComplexField>& slices,
                             const InteractionParams& params, const GridSpec& grid,
                             int subs) {
  if (subs < 16)
    throw InvalidArgument("binarize: need >= 16 sub-samples per poling period");
  if (static_cast<int>(slices.size()) != grid.nz)
    throw ShapeMismatch("binarize: one hologram field per slice required");
  const double period = params.poling_period;
  const double dz_sub = period / subs;
  const double L = grid.length();

  PolingVolume vol;
  vol.nx = grid.nx;
  vol.ny = grid.ny;
  vol.nz_sub = static_cast<int>(std::llround(L / dz_sub));
  vol.dx = grid.dx;
  vol.dy = grid.dy;
  vol.dz_sub = dz_sub;
  vol.s.assign(static_cast<std::size_t>(vol.nx) * vol.ny * vol.nz_sub, -1);

  const int n_periods = static_cast<int>(std::ceil(L / period)) + 1;
  const std::size_t plane = static_cast<std::size_t>(vol.nx) * vol.ny;

  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int pix = iy * grid.nx + ix;
      double carry_on = 0.0, carry_off = 0.0;
      for (int m = -1; m <= n_periods; ++m) {
        // Hologram value at this period's carrier reference plane.
        double zc = m * period;
        if (zc < 0.0) zc = 0.0;
        if (zc >= L) zc = std::nexttoward(L, 0.0);
        const int slice = std::min(grid.nz - 1, static_cast<int>(zc / grid.dz));
        const Complex a = slices[slice].v[pix];
        double mag = std::abs(a);
        if (mag > 1.0) mag = 1.0;
        if (mag <= 0.0) continue;
        const double duty = std::asin(mag) / kPi;       // in (0, 1/2]
        const double psi = std::arg(a);
        // +1 where (2 pi z / Lambda + psi) mod 2 pi lies within +/- pi*duty.
        const double z_on = (m - (psi + kPi * duty) / (2.0 * kPi)) * period;
        const double z_off = (m - (psi - kPi * duty) / (2.0 * kPi)) * period;
        const double p_on = z_on / dz_sub;
        const double p_off = z_off / dz_sub;
        const double q_on = std::floor(p_on + carry_on + 0.5);
        carry_on += p_on - q_on;
        const double q_off = std::floor(p_off + carry_off + 0.5);
        carry_off += p_off - q_off;
        int lo = static_cast<int>(q_on);
        int hi = static_cast<int>(q_off);
        if (lo < 0) lo = 0;
        if (hi > vol.nz_sub) hi = vol.nz_sub;
        for (int j = lo; j < hi; ++j)
          vol.s[static_cast<std::size_t>(j) * plane + pix] = 1;
      }
    }
  }
  return vol;
}

PolingVolume binarize_poling(const HologramParams& holo, const InteractionParams& params,
                             const GridSpec& grid, int subsamples_per_period) {
  std::vector<ComplexField> slices;
  slices.reserve(grid.nz);
  for (int s = 0; s < grid.nz; ++s) slices.push_back(build_hologram(holo, s, grid));
  return binarize_volume(slices, params, grid, subsamples_per_period);
}

}  // namespace spdc
