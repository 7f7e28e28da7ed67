#ifndef SPDC_MEDIUM_HPP
#define SPDC_MEDIUM_HPP

#include <cstdint>
#include <vector>

#include "spdc/modes.hpp"

namespace spdc {

// Physical constants of the three-wave interaction. kappa is scaled so the
// local gain g = kappa * |E_p| has units 1/m (|E_p| in sqrt(W)/m). The
// residual mismatch delta_k = k_p - k_s - k_i - 2 pi / Lambda is derived,
// never stored independently.
struct InteractionParams {
  double lambda_p = 0.0, lambda_s = 0.0, lambda_i = 0.0;  // vacuum, meters
  double n_p = 1.0, n_s = 1.0, n_i = 1.0;
  double kappa = 0.0;           // W^-1/2
  double poling_period = 0.0;   // Lambda, meters
  double pump_power = 0.0;      // watts

  void validate() const;
  double k_p() const { return 2.0 * kPi * n_p / lambda_p; }
  double k_s() const { return 2.0 * kPi * n_s / lambda_s; }
  double k_i() const { return 2.0 * kPi * n_i / lambda_i; }
  double bulk_mismatch() const { return k_p() - k_s() - k_i(); }
  double delta_k() const { return bulk_mismatch() - 2.0 * kPi / poling_period; }

  // First-order QPM period (delta_k = 0).
  double auto_period() const { return 2.0 * kPi / bulk_mismatch(); }
  // Copy with the period solved so delta_k equals the given value.
  InteractionParams with_mismatch(double delta_k) const;
};

// Learned pump parameters (theta). The synthesized field is rescaled so its
// power at z = 0 equals `power` exactly; the same scale is reused at every z
// (free-space propagation preserves power).
struct PumpParams {
  ModeBasis basis;
  CoeffVector coeffs;
  double power = 0.0;  // watts
  bool trainable = false;
};

// Learned crystal hologram parameters (phi). `raw` is n_seg x basis-size;
// each z-segment spans nz / n_seg slices. Synthesis uses dimensionless
// waist-scaled transverse profiles (w0 * M_k at z = 0) so O(1) coefficients
// give O(1) pre-clip amplitude. A uniform hologram (A = 1 everywhere) is a
// separate kind used by forward-only configurations.
struct HologramParams {
  enum class Kind { Modal, Uniform };
  Kind kind = Kind::Modal;
  ModeBasis basis;
  int n_seg = 1;
  Eigen::MatrixXcd raw;  // n_seg x basis.size()
  bool trainable = false;

  static HologramParams uniform();
  static HologramParams modal(ModeBasis basis, int n_seg);
  void validate(int nz) const;
  int segment_of(int slice, int nz) const { return slice * n_seg / nz; }
};

// Pump field at plane z. The power normalization constant comes from the
// z = 0 synthesis. Throws AllZeroPump when all coefficients vanish.
ComplexField build_pump(const PumpParams& pump, double z, const GridSpec& grid);

// Hologram slice A = u / max(1, |u|), u the modal synthesis of the slice's
// segment (transverse profiles only; no z propagation of a material pattern).
ComplexField build_hologram(const HologramParams& holo, int slice, const GridSpec& grid);

// Pre-clip synthesis u for one segment (the adjoint and tests need it).
ComplexField hologram_preclip(const HologramParams& holo, int seg, const GridSpec& grid);

// Pointwise projective clip and the waist-scaled profile stack it acts on.
ArrayXcd clip_unit_disk(const ArrayXcd& u);
std::vector<ComplexField> hologram_profiles(const ModeBasis& basis, const GridSpec& grid);

// Slowly-varying effective chi(2) after absorbing the first-order QPM
// carrier: A * exp(-i delta_k z_slice), z_slice the slice mid-plane.
ComplexField effective_coupling(const ComplexField& a, int slice,
                                const InteractionParams& params, const GridSpec& grid);

// Fabricable poling pattern: +/-1 domains on the Lambda carrier whose first
// Fourier harmonic reproduces (2/pi) sin(pi d) exp(i arg A) per pixel, with
// duty cycle d = asin(|A|) / pi. Domain edges are quantized with per-edge
// error diffusion so the harmonic stays within tolerance at modest
// subsampling. Layout: x fastest, then y, then z.
struct PolingVolume {
  int nx = 0, ny = 0, nz_sub = 0;
  double dx = 0, dy = 0, dz_sub = 0;
  std::vector<std::int8_t> s;  // in {-1, +1}
};

PolingVolume binarize_poling(const HologramParams& holo, const InteractionParams& params,
                             const GridSpec& grid, int subsamples_per_period);

// Same, but with the hologram given as per-slice fields (the CLI path that
// starts from an exported volume).
PolingVolume binarize_volume(const std::vector<ComplexField>& slices,
                             const InteractionParams& params, const GridSpec& grid,
                             int subsamples_per_period);

}  // namespace spdc

#endif  // SPDC_MEDIUM_HPP
