#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "spdc/medium.hpp"

using namespace spdc;
using namespace spdc_test;

namespace {

PumpParams fundamental_pump(double w0, const InteractionParams& ip) {
  PumpParams p;
  p.basis = ModeBasis::lg(0, 0, 0, w0, ip.lambda_p, ip.n_p);
  p.coeffs = CoeffVector::Ones(1);
  p.power = ip.pump_power;
  return p;
}

// First harmonic of the exported pattern at one pixel, projected over whole
// poling periods.
Complex first_harmonic(const PolingVolume& vol, int ix, int iy, double period) {
  const int per_period = static_cast<int>(std::llround(period / vol.dz_sub));
  const int n_use = (vol.nz_sub / per_period) * per_period;
  const std::size_t plane = static_cast<std::size_t>(vol.nx) * vol.ny;
  Complex acc = 0.0;
  for (int j = 0; j < n_use; ++j) {
    const double th = 2.0 * kPi * (j + 0.5) * vol.dz_sub / period;
    acc += static_cast<double>(vol.s[j * plane + iy * vol.nx + ix]) *
           Complex(std::cos(th), -std::sin(th));
  }
  return acc / static_cast<double>(n_use);
}

}  // namespace

TEST_CASE("energy conservation is enforced") {
  InteractionParams p = linbo3_params(0.1);
  CHECK_NOTHROW(p.validate());
  p.lambda_s = 1000e-9;
  p.lambda_i = 1000e-9;
  CHECK_THROWS_AS(p.validate(), UnitError);
}

TEST_CASE("sellmeier oracle: shipped LiNbO3 indices match Zelmon 1997") {
  // n_e^2 - 1 = 2.9804 L/(L-0.02047) + 0.5981 L/(L-0.0666) + 8.9543 L/(L-416.08),
  // L = lambda^2 in um^2 (test-side dispersion oracle; the core takes indices
  // as plain config numbers).
  auto ne = [](double lambda_um) {
    const double L = lambda_um * lambda_um;
    return std::sqrt(1.0 + 2.9804 * L / (L - 0.02047) + 0.5981 * L / (L - 0.0666) +
                     8.9543 * L / (L - 416.08));
  };
  const InteractionParams p = linbo3_params(0.1);
  CHECK(std::abs(ne(0.532) - p.n_p) < 2e-4);
  CHECK(std::abs(ne(1.064) - p.n_s) < 2e-4);
  // and the auto QPM period lands in the few-micron range expected for
  // type-II 532 -> 1064 + 1064
  CHECK(p.auto_period() > 2e-6);
  CHECK(p.auto_period() < 20e-6);
  CHECK(std::abs(p.delta_k()) < 1e-9 * p.k_p());
}

TEST_CASE("pump width after one Rayleigh range follows the Gaussian beam law") {
  const InteractionParams ip = linbo3_params(0.1);
  const double w0 = 40e-6;
  PumpParams pump = fundamental_pump(w0, ip);
  const double zr = pump.basis[0].rayleigh_range();
  GridSpec g(256, 256, 2.2e-6, 2.2e-6, 1, 1e-6);
  const ComplexField at_zr = build_pump(pump, zr, g);
  const double w_meas = second_moment_width(at_zr);
  CHECK(std::abs(w_meas - w0 * std::sqrt(2.0)) < 0.005 * w0 * std::sqrt(2.0));
}

TEST_CASE("pump power is normalized to the configured value at z = 0") {
  const InteractionParams ip = linbo3_params(0.1);
  PumpParams pump;
  pump.basis = ModeBasis::lg(-1, 1, 1, 40e-6, ip.lambda_p, ip.n_p);
  pump.coeffs = CoeffVector(6);
  pump.coeffs << Complex(0.3, 1.0), Complex(-0.2, 0.1), Complex(0.8, 0),
      Complex(0.05, -0.4), Complex(0, 0.7), Complex(-1.1, 0.2);
  pump.power = 1e-3;
  GridSpec g(256, 256, 2.8e-6, 2.8e-6, 1, 1e-6);
  const ComplexField ep = build_pump(pump, 0.0, g);
  CHECK(std::abs(ep.power() - 1e-3) < 1e-9 * 1e-3);
}

TEST_CASE("pump power is conserved along z") {
  const InteractionParams ip = linbo3_params(0.1);
  PumpParams pump;
  pump.basis = ModeBasis::lg(0, 2, 1, 40e-6, ip.lambda_p, ip.n_p);
  pump.coeffs = CoeffVector(6);
  pump.coeffs << Complex(1.0, 0.2), Complex(0.1, -0.3), Complex(0.4, 0),
      Complex(-0.2, 0.6), Complex(0.3, 0.3), Complex(0, -0.5);
  pump.power = 1e-3;
  GridSpec g(256, 256, 3.2e-6, 3.2e-6, 1, 1e-6);
  for (double z : {0.0, 0.25e-3, 0.5e-3, 1.0e-3}) {
    const ComplexField ep = build_pump(pump, z, g);
    CHECK(std::abs(ep.power() - 1e-3) < 1e-6 * 1e-3);
  }
}

TEST_CASE("pump normalization is projective: theta and 2 theta coincide") {
  const InteractionParams ip = linbo3_params(0.1);
  PumpParams pump = fundamental_pump(40e-6, ip);
  pump.basis = ModeBasis::lg(0, 1, 0, 40e-6, ip.lambda_p, ip.n_p);
  pump.coeffs = CoeffVector(2);
  pump.coeffs << Complex(0.6, -0.2), Complex(0.3, 0.9);
  GridSpec g(128, 128, 4e-6, 4e-6, 1, 1e-6);
  const ComplexField a = build_pump(pump, 0.3e-3, g);
  PumpParams doubled = pump;
  doubled.coeffs *= 2.0;
  const ComplexField b = build_pump(doubled, 0.3e-3, g);
  CHECK((a.v - b.v).abs().maxCoeff() < 1e-14 * a.v.abs().maxCoeff());
}

TEST_CASE("all-zero pump coefficients are rejected") {
  const InteractionParams ip = linbo3_params(0.1);
  PumpParams pump = fundamental_pump(40e-6, ip);
  pump.coeffs.setZero();
  GridSpec g(128, 128, 4e-6, 4e-6, 1, 1e-6);
  CHECK_THROWS_AS(build_pump(pump, 0.0, g), AllZeroPump);
}

TEST_CASE("hologram synthesis and clip") {
  const InteractionParams ip = linbo3_params(0.1);
  GridSpec g(64, 64, 8e-6, 8e-6, 4, 0.25e-3);
  ModeBasis basis = ModeBasis::lg(0, 0, 0, 56.57e-6, ip.lambda_s, ip.n_s);
  HologramParams h = HologramParams::modal(basis, 2);

  SUBCASE("all-zero coefficients give A = 0") {
    const ComplexField a = build_hologram(h, 1, g);
    CHECK(a.v.abs().maxCoeff() == 0.0);
  }
  SUBCASE("small synthesis passes through the clip untouched") {
    // scale so the pre-clip peak is 0.1
    h.raw(0, 0) = 1.0;
    const double peak = hologram_preclip(h, 0, g).v.abs().maxCoeff();
    h.raw(0, 0) = 0.1 / peak;
    const ComplexField u = hologram_preclip(h, 0, g);
    const ComplexField a = build_hologram(h, 0, g);
    CHECK((a.v == u.v).all());
    CHECK(std::abs(u.v.abs().maxCoeff() - 0.1) < 1e-12);
  }
  SUBCASE("saturated synthesis clips to unit magnitude") {
    h.raw(0, 0) = 1.0;
    const double peak = hologram_preclip(h, 0, g).v.abs().maxCoeff();
    h.raw(0, 0) = 3.0 / peak;
    const ComplexField a = build_hologram(h, 0, g);
    int argmax = 0;
    hologram_preclip(h, 0, g).v.abs().maxCoeff(&argmax);
    CHECK(std::abs(std::abs(a.v[argmax]) - 1.0) < 1e-12);
  }
  SUBCASE("clip bound holds for adversarial coefficients") {
    ModeBasis rich = ModeBasis::lg(-3, 3, 2, 56.57e-6, ip.lambda_s, ip.n_s);
    HologramParams hr = HologramParams::modal(rich, 4);
    for (int s = 0; s < 4; ++s)
      for (int k = 0; k < rich.size(); ++k)
        hr.raw(s, k) = Complex(1e9 * ((s * 31 + k * 7) % 13 - 6),
                               1e9 * ((s * 17 + k * 3) % 11 - 5));
    GridSpec g4(64, 64, 8e-6, 8e-6, 4, 0.25e-3);
    for (int slice = 0; slice < 4; ++slice) {
      const ComplexField a = build_hologram(hr, slice, g4);
      CHECK(a.v.abs().maxCoeff() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("effective coupling absorbs the QPM carrier") {
  InteractionParams ip = linbo3_params(0.1);
  GridSpec g(32, 32, 8e-6, 8e-6, 20, 0.05e-3);
  ComplexField ones(g, ArrayXcd::Ones(g.npix()));

  SUBCASE("delta_k = 0 is the identity, bitwise") {
    for (int s : {0, 7, 19}) {
      const ComplexField out = effective_coupling(ones, s, ip, g);
      CHECK((out.v == ones.v).all());
    }
  }
  SUBCASE("delta_k L = 2 pi winds the carrier phase exactly once") {
    const double L = g.length();
    InteractionParams detuned = ip.with_mismatch(2.0 * kPi / L);
    CHECK(std::abs(detuned.delta_k() - 2.0 * kPi / L) < 1e-6);
    double prev = std::arg(Complex(effective_coupling(ones, 0, detuned, g).v[0]));
    double acc = 0.0;
    for (int s = 1; s < g.nz; ++s) {
      const double cur = std::arg(Complex(effective_coupling(ones, s, detuned, g).v[0]));
      double d = cur - prev;
      while (d > kPi) d -= 2.0 * kPi;
      while (d < -kPi) d += 2.0 * kPi;
      acc += d;
      prev = cur;
    }
    // nz - 1 inter-slice steps of -2 pi / nz each
    CHECK(std::abs(acc + 2.0 * kPi * (g.nz - 1) / g.nz) < 1e-9);
  }
}

TEST_CASE("binarized poling reproduces the first-order hologram") {
  InteractionParams ip = linbo3_params(0.1);
  GridSpec g(8, 8, 8e-6, 8e-6, 4, 0.25e-3);
  const int subs = 64;

  SUBCASE("uniform hologram: 50% duty, first harmonic 2/pi") {
    const HologramParams h = HologramParams::uniform();
    const PolingVolume vol = binarize_poling(h, ip, g, subs);
    // duty cycle
    std::size_t on = 0;
    for (auto v : vol.s) on += v > 0;
    CHECK(std::abs(static_cast<double>(on) / vol.s.size() - 0.5) < 0.01);
    const Complex c1 = first_harmonic(vol, 3, 4, ip.poling_period);
    CHECK(std::abs(std::abs(c1) - 2.0 / kPi) < 1e-3);
    CHECK(std::abs(std::arg(c1)) < 1e-3);
  }

  SUBCASE("values are strictly +/-1") {
    const PolingVolume vol = binarize_poling(HologramParams::uniform(), ip, g, subs);
    for (auto v : vol.s) CHECK((v == 1 || v == -1));
  }

  SUBCASE("a pi/2 hologram phase shifts the pattern by a quarter period") {
    auto constant_volume = [&](Complex value) {
      std::vector<ComplexField> slices(
          g.nz, ComplexField(g, ArrayXcd::Constant(g.npix(), value)));
      return binarize_volume(slices, ip, g, subs);
    };
    const PolingVolume rot = constant_volume(Complex(0, 1));
    const PolingVolume ref = constant_volume(Complex(1, 0));
    const int quarter = subs / 4;
    const std::size_t plane = static_cast<std::size_t>(g.nx) * g.ny;
    int agree = 0, total = 0;
    // exp(+i pi/2) moves the ON window back by Lambda/4; stay clear of the
    // clamped first/last periods
    for (int j = subs; j + subs < rot.nz_sub; ++j) {
      ++total;
      agree += rot.s[j * plane] == ref.s[(j + quarter) * plane];
    }
    CHECK(agree == total);
  }

  SUBCASE("half-amplitude hologram: first harmonic (2/pi) * 0.5") {
    std::vector<ComplexField> slices(
        g.nz, ComplexField(g, ArrayXcd::Constant(g.npix(), Complex(0.5, 0))));
    const PolingVolume vol = binarize_volume(slices, ip, g, subs);
    const Complex c1 = first_harmonic(vol, 2, 5, ip.poling_period);
    CHECK(std::abs(std::abs(c1) - 0.5 * 2.0 / kPi) < 1e-3);
  }

  SUBCASE("first-order equivalence for a random smooth hologram") {
    // arbitrary per-pixel amplitudes and phases covering [0.05, 1] x phase
    ComplexField a(g);
    for (int p = 0; p < g.npix(); ++p) {
      const double mag = 0.05 + 0.95 * ((p * 37) % 101) / 100.0;
      const double ph = 2.0 * kPi * ((p * 53) % 97) / 97.0 - kPi;
      a.v[p] = mag * Complex(std::cos(ph), std::sin(ph));
    }
    std::vector<ComplexField> slices(g.nz, a);
    const PolingVolume vol = binarize_volume(slices, ip, g, subs);
    double worst = 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const Complex av = a.v[iy * g.nx + ix];
        const double duty = std::asin(std::min(1.0, std::abs(av))) / kPi;
        const Complex target = (2.0 / kPi) * std::sin(kPi * duty) *
                               Complex(std::cos(std::arg(av)), std::sin(std::arg(av)));
        const Complex got = first_harmonic(vol, ix, iy, ip.poling_period);
        worst = std::max(worst, std::abs(got - target));
      }
    CHECK(worst < 0.01 * (2.0 / kPi));
  }

  SUBCASE("too-coarse subsampling is rejected") {
    CHECK_THROWS_AS(binarize_poling(HologramParams::uniform(), ip, g, 8),
                    InvalidArgument);
  }
}
