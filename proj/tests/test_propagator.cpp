#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "spdc/propagator.hpp"

using namespace spdc;
using namespace spdc_test;

namespace {

PumpParams gaussian_pump(const InteractionParams& ip, double w0) {
  PumpParams p;
  p.basis = ModeBasis::lg(0, 0, 0, w0, ip.lambda_p, ip.n_p);
  p.coeffs = CoeffVector::Ones(1);
  p.power = ip.pump_power;
  return p;
}

}  // namespace

TEST_CASE("diffraction preserves the norm to machine precision") {
  const InteractionParams ip = linbo3_params(0.0);
  GridSpec g(64, 64, 6e-6, 6e-6, 20, 0.05e-3);
  DiffractionOp op(g, ip.k_s(), ip.k_i(), g.dz / 2.0);
  FieldPair pair(random_field(g, 3), random_field(g, 4));
  const double before = pair.a_s.sum_sq();
  for (int s = 0; s < 2 * g.nz; ++s) op.apply(pair);
  CHECK(std::abs(pair.a_s.sum_sq() - before) < 1e-12 * before);
}

TEST_CASE("zero-length diffraction step is the identity, bitwise") {
  const InteractionParams ip = linbo3_params(0.0);
  GridSpec g(32, 32, 6e-6, 6e-6, 1, 1e-6);
  const FieldPair pair(random_field(g, 5), random_field(g, 6));
  const FieldPair out = diffraction_half_step(pair, 0.0, ip);
  CHECK((out.a_s.v == pair.a_s.v).all());
  CHECK((out.a_i.v == pair.a_i.v).all());
}

TEST_CASE("split-step diffraction reproduces the Gaussian beam law") {
  const InteractionParams ip = linbo3_params(0.0);
  const double w0 = 30e-6;
  const ModeSpec m{ModeFamily::LG, 0, 0, w0, ip.lambda_s, ip.n_s};
  const double zr = m.rayleigh_range();
  const int nz = 64;
  GridSpec g(128, 128, 8.0 * w0 / 128, 8.0 * w0 / 128, nz, zr / nz);
  DiffractionOp half(g, ip.k_s(), ip.k_i(), g.dz / 2.0);
  FieldPair pair(eval_mode(m, 0.0, g), ComplexField(g));
  for (int s = 0; s < 2 * nz; ++s) half.apply(pair);
  const double w_meas = second_moment_width(pair.a_s);
  CHECK(std::abs(w_meas - w0 * std::sqrt(2.0)) < 0.005 * w0 * std::sqrt(2.0));
}

TEST_CASE("coupling step with kappa = 0 is the identity, bitwise") {
  const InteractionParams ip = linbo3_params(0.0);
  GridSpec g(16, 16, 8e-6, 8e-6, 1, 1e-3);
  const FieldPair pair(random_field(g, 7), random_field(g, 8));
  ComplexField pump(g, ArrayXcd::Ones(g.npix()));
  ComplexField aeff(g, ArrayXcd::Ones(g.npix()));
  const FieldPair out = coupling_step(pair, pump, aeff, 0.0, g.dz);
  CHECK((out.a_s.v == pair.a_s.v).all());
  CHECK((out.a_i.v == pair.a_i.v).all());
}

TEST_CASE("coupling step solves the two-mode squeezer exactly") {
  GridSpec g(8, 8, 8e-6, 8e-6, 1, 1e-3);
  const double kappa = 0.4, dz = 1e-3;
  ComplexField pump(g, ArrayXcd::Constant(g.npix(), Complex(310.0, 95.0)));
  ComplexField aeff(g, ArrayXcd::Constant(g.npix(), Complex(0.6, -0.3)));
  FieldPair pair{ComplexField(g), ComplexField(g)};
  const Complex a0(0.8, -0.45);
  pair.a_s.at(3, 5) = a0;
  const FieldPair out = coupling_step(pair, pump, aeff, kappa, dz);
  const double gain = kappa * std::abs(aeff.v[0] * pump.v[0]);
  CHECK(std::abs(std::abs(out.a_s.at(3, 5)) - std::abs(a0) * std::cosh(gain * dz)) <
        1e-12 * std::abs(a0));
  CHECK(std::abs(std::abs(out.a_i.at(3, 5)) - std::abs(a0) * std::sinh(gain * dz)) <
        1e-12 * std::abs(a0));
  // all other pixels stay dark
  for (int p = 0; p < g.npix(); ++p) {
    if (p == 5 * g.nx + 3) continue;
    CHECK(std::abs(out.a_s.v[p]) == 0.0);
    CHECK(std::abs(out.a_i.v[p]) == 0.0);
  }
}

TEST_CASE("coupling step conserves |A_s|^2 - |A_i|^2 per pixel") {
  GridSpec g(16, 16, 8e-6, 8e-6, 1, 1e-3);
  ComplexField pump = random_field(g, 11);
  pump.v *= 400.0;
  const ComplexField aeff = random_field(g, 12);
  const FieldPair pair(random_field(g, 13), random_field(g, 14));
  const FieldPair out = coupling_step(pair, pump, aeff, 0.5, g.dz);
  for (int p = 0; p < g.npix(); ++p) {
    const double before = std::norm(pair.a_s.v[p]) - std::norm(pair.a_i.v[p]);
    const double after = std::norm(out.a_s.v[p]) - std::norm(out.a_i.v[p]);
    const double scale = std::norm(out.a_s.v[p]) + std::norm(out.a_i.v[p]);
    CHECK(std::abs(after - before) < 1e-12 * scale);
  }
}

TEST_CASE("zero hologram reduces propagate to free diffraction") {
  InteractionParams ip = linbo3_params(0.5);
  const double w0 = 40e-6;
  GridSpec g(128, 128, 4e-6, 4e-6, 20, 0.05e-3);
  PumpParams pump = gaussian_pump(ip, 28e-6);
  ModeBasis hbasis = ModeBasis::lg(0, 0, 0, w0, ip.lambda_s, ip.n_s);
  HologramParams holo = HologramParams::modal(hbasis, 4);  // raw stays zero

  const ModeSpec seed_mode{ModeFamily::LG, 0, 1, w0, ip.lambda_s, ip.n_s};
  FieldPair seed(eval_mode(seed_mode, 0.0, g), ComplexField(g));
  auto [out, record] = propagate(seed, pump, holo, ip, g);
  const ComplexField analytic = eval_mode(seed_mode, g.length(), g);
  CHECK(rel_l2_error(out.a_s.v, analytic.v) < 1e-3);
  CHECK(out.a_i.v.abs().maxCoeff() == 0.0);
  CHECK(record.slice_in.size() == 20);
}

TEST_CASE("propagation conserves the photon-flux difference") {
  InteractionParams ip = linbo3_params(0.6);
  GridSpec g(64, 64, 7.2e-6, 7.2e-6, 16, 1e-3 / 16);
  PumpParams pump;
  pump.basis = ModeBasis::lg(-1, 1, 0, 25e-6, ip.lambda_p, ip.n_p);
  pump.coeffs = CoeffVector(3);
  pump.coeffs << Complex(0.7, 0.1), Complex(0.5, -0.6), Complex(-0.2, 0.9);
  pump.power = ip.pump_power;
  ModeBasis hbasis = ModeBasis::lg(-2, 2, 1, 35e-6, ip.lambda_s, ip.n_s);
  HologramParams holo = HologramParams::modal(hbasis, 4);
  for (int s = 0; s < holo.raw.rows(); ++s)
    for (int k = 0; k < holo.raw.cols(); ++k)
      holo.raw(s, k) = Complex(0.3 * ((s + 2 * k) % 5 - 2), 0.2 * ((3 * s + k) % 7 - 3));

  VacuumBatch batch(77, 4, g);
  for (int b = 0; b < 4; ++b) {
    auto [ss, si] = batch.sample(b);
    FieldPair seed(std::move(ss), std::move(si));
    const double d0 = seed.flux_difference();
    auto [out, rec] = propagate(seed, pump, holo, ip, g);
    CHECK(std::abs(out.flux_difference() - d0) < 1e-10 * out.total_flux());
  }
}

TEST_CASE("Strang splitting self-converges at second order") {
  InteractionParams base = linbo3_params(0.8);
  const double L = 1e-3;
  InteractionParams ip = base.with_mismatch(1.7 * 2.0 * kPi / L);
  PumpParams pump = gaussian_pump(ip, 25e-6);
  ModeBasis hbasis = ModeBasis::lg(-1, 1, 1, 35e-6, ip.lambda_s, ip.n_s);

  const int nx = 64;
  const double dx = 7.2e-6;
  GridSpec g10(nx, nx, dx, dx, 10, L / 10);
  const VacuumBatch batch(5, 1, g10);
  auto [seed_s, seed_i] = batch.sample(0);

  std::vector<ArrayXcd> outs;
  std::vector<int> nzs = {10, 20, 40, 80};
  for (int nz : nzs) {
    GridSpec g(nx, nx, dx, dx, nz, L / nz);
    HologramParams holo = HologramParams::modal(hbasis, 10);
    for (int s = 0; s < 10; ++s)
      for (int k = 0; k < hbasis.size(); ++k)
        holo.raw(s, k) = Complex(0.25 * ((s + k) % 3 - 1), 0.2 * ((s * k) % 5 - 2));
    FieldPair seed(ComplexField(g, seed_s.v), ComplexField(g, seed_i.v));
    auto [out, rec] = propagate(seed, pump, holo, ip, g);
    outs.push_back(out.a_s.v);
  }
  std::vector<double> err;
  for (std::size_t k = 0; k + 1 < outs.size(); ++k)
    err.push_back(std::sqrt((outs[k] - outs[k + 1]).abs2().sum()));
  CHECK(err[0] / err[1] > 3.0);
  CHECK(err[0] / err[1] < 5.0);
  CHECK(err[1] / err[2] > 3.0);
  CHECK(err[1] / err[2] < 5.0);

  // least-squares slope of log(err) vs log(nz)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < 3; ++k) {
    const double x = std::log(static_cast<double>(nzs[k]));
    const double y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = -(3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  CHECK(slope > 1.7);
  CHECK(slope < 2.3);
}

TEST_CASE("records replay bit-exactly") {
  InteractionParams ip = linbo3_params(0.7);
  GridSpec g(32, 32, 12e-6, 12e-6, 8, 1e-3 / 8);
  PumpParams pump = gaussian_pump(ip, 40e-6);
  HologramParams holo = HologramParams::uniform();
  VacuumBatch batch(31, 1, g);
  auto [ss, si] = batch.sample(0);
  FieldPair seed(std::move(ss), std::move(si));

  InteractionCache cache(g, ip, pump.basis, holo.basis, true);
  const SliceStack stack = cache.build(pump, holo);
  PropagationRecord rec;
  const FieldPair out = propagate_with_stack(seed, stack, cache.half_step(), &rec);
  REQUIRE(rec.slice_in.size() == 8);

  // replay each slice from its checkpoint and compare with the next
  for (int j = 0; j < g.nz; ++j) {
    FieldPair state = rec.slice_in[j];
    cache.half_step().apply(state);
    coupling_step_inplace(state.a_s.v, state.a_i.v, stack.q[j], g.dz);
    cache.half_step().apply(state);
    const FieldPair& expect = (j + 1 < g.nz) ? rec.slice_in[j + 1] : out;
    CHECK((state.a_s.v == expect.a_s.v).all());
    CHECK((state.a_i.v == expect.a_i.v).all());
  }
}

TEST_CASE("field overflow raises NonFiniteField") {
  InteractionParams ip = linbo3_params(1e30);
  GridSpec g(16, 16, 24e-6, 24e-6, 4, 0.25e-3);
  PumpParams pump = gaussian_pump(ip, 40e-6);
  HologramParams holo = HologramParams::uniform();
  VacuumBatch batch(1, 1, g);
  auto [ss, si] = batch.sample(0);
  FieldPair seed(std::move(ss), std::move(si));
  CHECK_THROWS_AS(propagate(seed, pump, holo, ip, g), NonFiniteField);
}
