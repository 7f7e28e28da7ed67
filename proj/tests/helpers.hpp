#ifndef SPDC_TESTS_HELPERS_HPP
#define SPDC_TESTS_HELPERS_HPP

#include <cmath>

#include "spdc/grid.hpp"
#include "spdc/medium.hpp"
#include "spdc/rng.hpp"

namespace spdc_test {

using namespace spdc;

// The shipped LiNbO3 configuration: 532 nm e-pump, degenerate 1064 nm pair,
// extraordinary indices from the Zelmon 1997 Sellmeier fit, first-order QPM.
inline InteractionParams linbo3_params(double kappa) {
  InteractionParams p;
  p.lambda_p = 532e-9;
  p.lambda_s = 1064e-9;
  p.lambda_i = 1064e-9;
  p.n_p = 2.2335;
  p.n_s = 2.1556;
  p.n_i = 2.1556;
  p.kappa = kappa;
  p.pump_power = 1e-3;
  p.poling_period = p.auto_period();
  return p;
}

// Deterministic pseudo-random field (unit-variance complex pixels).
inline ComplexField random_field(const GridSpec& g, std::uint64_t seed) {
  ComplexField f(g);
  for (int p = 0; p < g.npix(); ++p) {
    auto [re, im] = gaussian_pair(seed, 0, 0, static_cast<std::uint32_t>(p));
    f.v[p] = Complex(re, im);
  }
  return f;
}

inline double rel_l2_error(const ArrayXcd& a, const ArrayXcd& b) {
  return std::sqrt((a - b).abs2().sum() / b.abs2().sum());
}

// Beam radius from the second moment of |f|^2: w = 2 sqrt(<x^2>) for a
// fundamental Gaussian exp(-r^2/w^2).
inline double second_moment_width(const ComplexField& f) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const double w = std::norm(f.v[j * f.grid.nx + i]);
      const double x = f.grid.x(i), y = f.grid.y(j);
      num += w * (x * x + y * y) / 2.0;
      den += w;
    }
  return 2.0 * std::sqrt(num / den);
}

// Complex bilinear interpolation at physical (x, y).
inline Complex interp(const ComplexField& f, double x, double y) {
  const auto& g = f.grid;
  const double fx = x / g.dx + g.nx / 2;
  const double fy = y / g.dy + g.ny / 2;
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0, ty = fy - j0;
  auto at = [&](int i, int j) { return f.v[j * g.nx + i]; };
  return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
         (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
}

// Accumulated phase around a centered circle (OAM winding measure).
inline double winding_phase(const ComplexField& f, double radius, int samples = 720) {
  double acc = 0.0;
  Complex prev = interp(f, radius, 0.0);
  for (int k = 1; k <= samples; ++k) {
    const double th = 2.0 * kPi * k / samples;
    const Complex cur = interp(f, radius * std::cos(th), radius * std::sin(th));
    acc += std::arg(cur / prev);
    prev = cur;
  }
  return acc;
}

}  // namespace spdc_test

#endif
