#ifndef SPDC_MODES_HPP
#define SPDC_MODES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spdc/grid.hpp"

namespace spdc {

enum class ModeFamily { LG, HG };

// One Laguerre-Gauss or Hermite-Gauss mode. For LG, a = (p, l); for HG,
// a = (n, m). The waist sits at z = 0 (crystal input face); w0, lambda in
// meters, lambda is the vacuum wavelength and n_medium rescales it inside
// the crystal.
struct ModeSpec {
  ModeFamily family = ModeFamily::LG;
  int a = 0;  // LG: radial index p >= 0; HG: x index n >= 0
  int b = 0;  // LG: azimuthal index l;   HG: y index m >= 0
  double w0 = 0.0;
  double lambda = 0.0;
  double n_medium = 1.0;

  void validate() const;
  double wavenumber() const { return 2.0 * kPi * n_medium / lambda; }
  double rayleigh_range() const { return kPi * w0 * w0 * n_medium / lambda; }
  double waist_at(double z) const;
  // Effective transverse extent used by the containment preflight.
  double mode_radius(double z) const;
  std::string label() const;
};

// Ordered mode dictionary sharing family, waist and wavelength. LG bases are
// ordered by (l ascending, p ascending), HG by (n ascending, m ascending);
// that order is what all coefficient files and P-matrix axes refer to.
struct ModeBasis {
  std::vector<ModeSpec> modes;

  int size() const { return static_cast<int>(modes.size()); }
  const ModeSpec& operator[](int k) const { return modes[k]; }
  int find(ModeFamily fam, int a, int b) const;  // -1 when absent
  std::vector<std::string> labels() const;

  static ModeBasis lg(int l_min, int l_max, int p_max, double w0, double lambda,
                      double n_medium);
  static ModeBasis hg(int n_max, int m_max, double w0, double lambda,
                      double n_medium);
};

using CoeffVector = Eigen::VectorXcd;

// Discretized mode at plane z, L2-normalized on the continuum (the discrete
// norm is 1 up to sampling error, which gram_matrix surfaces rather than
// hiding). Throws WindowTooSmall when the grid window is < min_window_factor
// times the mode radius at z; 6x is the beam-containment default. Callers
// that measure or tolerate truncation (gram diagnostics, material patterns)
// pass a smaller factor.
ComplexField eval_mode(const ModeSpec& spec, double z, const GridSpec& grid,
                       double min_window_factor = 6.0);

// c_k = <M_k(z), field> with Riemann dx dy weights (conjugate-linear in the
// mode, linear in the field).
CoeffVector decompose(const ComplexField& field, const ModeBasis& basis, double z);

// G_jk = <M_j, M_k> on the grid at z; Hermitian by construction. Deviation
// from identity measures grid adequacy.
Eigen::MatrixXcd gram_matrix(const ModeBasis& basis, const GridSpec& grid, double z);

// All basis modes evaluated at z (cached stack used by the hot paths).
std::vector<ComplexField> eval_basis(const ModeBasis& basis, double z,
                                     const GridSpec& grid);

}  // namespace spdc

#endif  // SPDC_MODES_HPP
