#ifndef SPDC_GRID_HPP
#define SPDC_GRID_HPP

#include <Eigen/Core>
#include <complex>

#include "spdc/errors.hpp"

namespace spdc {

using Complex = std::complex<double>;
using ArrayXcd = Eigen::ArrayXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Discretized transverse plane plus the z slicing of the crystal.
// Transverse pixels are centered so that index nx/2 sits at x = 0; the
// x-fastest linear index is y*nx + x (matching the raw-volume export order).
struct GridSpec {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;  // meters
  int nz = 1;
  double dz = 0.0;  // meters

  GridSpec() = default;
  GridSpec(int nx_, int ny_, double dx_, double dy_, int nz_, double dz_)
      : nx(nx_), ny(ny_), dx(dx_), dy(dy_), nz(nz_), dz(dz_) {
    validate();
  }

  static bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

  void validate() const {
    if (nx < 8 || ny < 8 || !is_pow2(nx) || !is_pow2(ny))
      throw InvalidArgument("grid nx, ny must be powers of two and >= 8");
    if (dx <= 0 || dy <= 0) throw InvalidArgument("grid dx, dy must be > 0");
    if (nz < 1 || dz <= 0) throw InvalidArgument("grid nz >= 1, dz > 0");
  }

  int npix() const { return nx * ny; }
  double pixel_area() const { return dx * dy; }
  double length() const { return nz * dz; }
  double window_x() const { return nx * dx; }
  double window_y() const { return ny * dy; }
  double x(int i) const { return (i - nx / 2) * dx; }
  double y(int j) const { return (j - ny / 2) * dy; }
  // Spatial angular frequency of FFT bin i (unshifted DFT order).
  double kx(int i) const {
    const int f = i < nx / 2 ? i : i - nx;
    return 2.0 * kPi * f / (nx * dx);
  }
  double ky(int j) const {
    const int f = j < ny / 2 ? j : j - ny;
    return 2.0 * kPi * f / (ny * dy);
  }

  bool same_transverse(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy;
  }
};

// Complex amplitudes on a GridSpec's transverse plane. Squared magnitude
// integrates to photon flux for signal/idler envelopes and to watts for the
// pump.
struct ComplexField {
  GridSpec grid;
  ArrayXcd v;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), v(ArrayXcd::Zero(g.npix())) {}
  ComplexField(const GridSpec& g, ArrayXcd values) : grid(g), v(std::move(values)) {
    if (v.size() != g.npix()) throw ShapeMismatch("field size != nx*ny");
  }

  Complex& at(int ix, int iy) { return v[iy * grid.nx + ix]; }
  Complex at(int ix, int iy) const { return v[iy * grid.nx + ix]; }

  // Discrete l2 norm (no pixel-area weight); what the unitary FFT preserves.
  double sum_sq() const { return v.abs2().sum(); }
  // Continuum-weighted power/flux: sum |f|^2 dx dy.
  double power() const { return sum_sq() * grid.pixel_area(); }
  bool all_finite() const { return v.allFinite(); }
};

// Continuum-weighted inner product <a, b> = sum conj(a) b dx dy.
inline Complex inner(const ComplexField& a, const ComplexField& b) {
  if (!a.grid.same_transverse(b.grid)) throw ShapeMismatch("inner: grid mismatch");
  return (a.v.conjugate() * b.v).sum() * a.grid.pixel_area();
}

}  // namespace spdc

#endif  // SPDC_GRID_HPP
