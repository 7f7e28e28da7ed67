#ifndef SPDC_RNG_HPP
#define SPDC_RNG_HPP

#include <array>
#include <cstdint>

#include "spdc/grid.hpp"

namespace spdc {

// Philox4x32-10 counter-based generator (Salmon et al. 2011). Every output
// block is a pure function of (key, counter), which is what makes vacuum
// sampling reproducible independently of scheduling.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                            std::array<std::uint32_t, 4> ctr) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return ctr;
  }
};

// SplitMix64 finalizer; used to derive independent sub-seeds (per step,
// per purpose) from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Standard-normal pair for pixel `pixel` of field `field_idx` (0 signal,
// 1 idler) in sample `sample`: one Philox block -> two uniforms -> Box-Muller.
std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint32_t sample,
                                        std::uint32_t field_idx, std::uint32_t pixel);

// The reparameterized random node: B i.i.d. complex-Gaussian field pairs.
// Pixels have per-component variance sigma0_sq / (2 dx dy), so the projection
// onto any orthonormal transverse mode has complex variance sigma0_sq
// regardless of the grid resolution. Samples are generated on demand; the
// batch is fully determined by (rng_seed, batch_size, grid, sigma0_sq).
struct VacuumBatch {
  std::uint64_t rng_seed = 0;
  int batch_size = 0;
  GridSpec grid;
  double sigma0_sq = 0.5;

  VacuumBatch() = default;
  VacuumBatch(std::uint64_t seed, int B, const GridSpec& g, double s0sq = 0.5);

  // Signal and idler seed fields of sample b (deterministic in (seed, b)).
  std::pair<ComplexField, ComplexField> sample(int b) const;
};

inline VacuumBatch sample_vacuum(std::uint64_t seed, int B, const GridSpec& grid,
                                 double sigma0_sq = 0.5) {
  return VacuumBatch(seed, B, grid, sigma0_sq);
}

}  // namespace spdc

#endif  // SPDC_RNG_HPP
