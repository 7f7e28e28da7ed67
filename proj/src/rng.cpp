#include "spdc/rng.hpp"

#include <cmath>

namespace spdc {

std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint32_t sample,
                                        std::uint32_t field_idx, std::uint32_t pixel) {
  const auto r = Philox4x32::block(seed, {pixel, field_idx, sample, 0u});
  const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
  // u1 in (0, 1] so the log is finite; u2 in [0, 1).
  const double u1 = ((a >> 11) + 1) * 0x1.0p-53;
  const double u2 = (b >> 11) * 0x1.0p-53;
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * kPi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

VacuumBatch::VacuumBatch(std::uint64_t seed, int B, const GridSpec& g, double s0sq)
    : rng_seed(seed), batch_size(B), grid(g), sigma0_sq(s0sq) {
  if (B < 1) throw InvalidArgument("VacuumBatch: batch size must be >= 1");
  if (s0sq <= 0) throw InvalidArgument("VacuumBatch: sigma0_sq must be > 0");
}

std::pair<ComplexField, ComplexField> VacuumBatch::sample(int b) const {
  if (b < 0 || b >= batch_size) throw InvalidArgument("VacuumBatch: sample index");
  const double stddev = std::sqrt(sigma0_sq / (2.0 * grid.pixel_area()));
  ComplexField s(grid), i(grid);
  const auto sb = static_cast<std::uint32_t>(b);
  for (int p = 0; p < grid.npix(); ++p) {
    auto [re, im] = gaussian_pair(rng_seed, sb, 0u, static_cast<std::uint32_t>(p));
    s.v[p] = Complex(re * stddev, im * stddev);
  }
  for (int p = 0; p < grid.npix(); ++p) {
    auto [re, im] = gaussian_pair(rng_seed, sb, 1u, static_cast<std::uint32_t>(p));
    i.v[p] = Complex(re * stddev, im * stddev);
  }
  return {std::move(s), std::move(i)};
}

}  // namespace spdc
