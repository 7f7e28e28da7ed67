#include "spdc/adjoint.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "spdc/parallel.hpp"

namespace spdc {

namespace primitives {

namespace {
// Stable hyperbolic factors of the squeeze update: S = sinh(u)/g,
// W = sinh(u) dz / (2g), T = (dz cosh(u) g - sinh(u)) / (2 g^3), u = g dz.
// Series below u = 1e-2 keep the cancellation-prone T accurate.
struct CouplingFactors {
  double c, S, W, T;
};

CouplingFactors factors(double g, double dz) {
  CouplingFactors f;
  const double u = g * dz;
  f.c = std::cosh(u);
  if (u < 1e-2) {
    const double u2 = u * u;
    f.S = dz * (1.0 + u2 / 6.0 * (1.0 + u2 / 20.0));
    f.W = 0.5 * dz * dz * (1.0 + u2 / 6.0 * (1.0 + u2 / 20.0));
    f.T = dz * dz * dz * (1.0 / 6.0 + u2 / 60.0);
  } else {
    const double s = std::sinh(u);
    f.S = s / g;
    f.W = s * dz / (2.0 * g);
    f.T = (dz * f.c * g - s) / (2.0 * g * g * g);
  }
  return f;
}
}  // namespace

void coupling_adjoint(Complex xs, Complex xi, Complex q, double dz, Complex ys_bar,
                      Complex yi_bar, Complex& xs_bar, Complex& xi_bar, Complex& q_bar) {
  const double g = std::abs(q);
  if (g == 0.0) {
    xs_bar = ys_bar;
    xi_bar = yi_bar;
    q_bar += dz * (ys_bar * xi + yi_bar * xs);
    return;
  }
  const auto f = factors(g, dz);
  xs_bar = f.c * ys_bar + f.S * q * std::conj(yi_bar);
  xi_bar = f.c * yi_bar + f.S * q * std::conj(ys_bar);
  q_bar += q * f.W *
               (std::conj(ys_bar) * xs + ys_bar * std::conj(xs) +
                std::conj(yi_bar) * xi + yi_bar * std::conj(xi)) +
           q * q * f.T * (std::conj(ys_bar) * std::conj(xi) +
                          std::conj(yi_bar) * std::conj(xs)) +
           (f.S + f.T * g * g) * (ys_bar * xi + yi_bar * xs);
}

void coupling_tangent(Complex xs, Complex xi, Complex q, double dz, Complex dxs,
                      Complex dxi, Complex dq, Complex& dys, Complex& dyi) {
  const double g = std::abs(q);
  if (g == 0.0) {
    dys = dxs + dz * dq * std::conj(xi);
    dyi = dxi + dz * dq * std::conj(xs);
    return;
  }
  const auto f = factors(g, dz);
  const double dg = (std::conj(q) * dq).real() / g;
  const double dc = std::sinh(g * dz) * dz * dg;
  const double ds = 2.0 * g * f.T * dg;  // dS = S'(g) dg, S' = 2 g T
  dys = dc * xs + f.c * dxs + (ds * q + f.S * dq) * std::conj(xi) +
        f.S * q * std::conj(dxi);
  dyi = dc * xi + f.c * dxi + (ds * q + f.S * dq) * std::conj(xs) +
        f.S * q * std::conj(dxs);
}

ArrayXcd clip_backward(const ArrayXcd& u, const ArrayXcd& a_bar) {
  ArrayXcd u_bar(u.size());
  for (Eigen::Index p = 0; p < u.size(); ++p) {
    const double mag = std::abs(u[p]);
    if (mag < 1.0) {
      u_bar[p] = a_bar[p];
    } else {
      const Complex a = u[p] / mag;
      u_bar[p] = (a_bar[p] - std::conj(a_bar[p]) * a * a) / (2.0 * mag);
    }
  }
  return u_bar;
}

ArrayXcd clip_tangent(const ArrayXcd& u, const ArrayXcd& du) {
  ArrayXcd da(u.size());
  for (Eigen::Index p = 0; p < u.size(); ++p) {
    const double mag = std::abs(u[p]);
    if (mag < 1.0) {
      da[p] = du[p];
    } else {
      // a = u / |u|: da = du / |u| - u Re(conj(u) du) / |u|^3
      da[p] = du[p] / mag -
              u[p] * (std::conj(u[p]) * du[p]).real() / (mag * mag * mag);
    }
  }
  return da;
}

}  // namespace primitives

SpdcPipeline::SpdcPipeline(const GridSpec& grid, const InteractionParams& params,
                           ModeBasis basis_s, ModeBasis basis_i,
                           const ModeBasis& pump_basis, const ModeBasis& holo_basis,
                           bool holo_uniform, Eigen::MatrixXd target,
                           LossWeights weights, double sigma0_sq, int threads)
    : basis_s_(std::move(basis_s)),
      basis_i_(std::move(basis_i)),
      target_(std::move(target)),
      weights_(weights),
      sigma0_sq_(sigma0_sq),
      threads_(threads),
      cache_(grid, params, pump_basis, holo_basis, holo_uniform) {
  if (target_.rows() != basis_s_.size() || target_.cols() != basis_i_.size())
    throw ShapeMismatch("pipeline: target shape != measurement bases");
  const double zl = grid.length();
  for (const auto& f : eval_basis(basis_s_, zl, grid)) ms_L_.push_back(f.v);
  for (const auto& f : eval_basis(basis_i_, zl, grid)) mi_L_.push_back(f.v);
  for (const auto& f : eval_basis(basis_s_, 0.0, grid)) ms_0_.push_back(f.v);
  for (const auto& f : eval_basis(basis_i_, 0.0, grid)) mi_0_.push_back(f.v);
}

BatchProjections SpdcPipeline::forward_batch(const SliceStack& stack,
                                             const VacuumBatch& batch) const {
  const int B = batch.batch_size;
  const int Ms = basis_s_.size(), Mi = basis_i_.size();
  const double da = grid().pixel_area();
  BatchProjections proj;
  proj.c_s.resize(B, Ms);
  proj.c_i.resize(B, Mi);
  proj.c0_s.resize(B, Ms);
  proj.c0_i.resize(B, Mi);
  parallel_for(B, threads_, [&](std::size_t b) {
    auto [ss, si] = batch.sample(static_cast<int>(b));
    for (int m = 0; m < Ms; ++m)
      proj.c0_s(b, m) = (ms_0_[m].conjugate() * ss.v).sum() * da;
    for (int n = 0; n < Mi; ++n)
      proj.c0_i(b, n) = (mi_0_[n].conjugate() * si.v).sum() * da;
    FieldPair out = propagate_with_stack(FieldPair(std::move(ss), std::move(si)),
                                         stack, cache_.half_step());
    for (int m = 0; m < Ms; ++m)
      proj.c_s(b, m) = (ms_L_[m].conjugate() * out.a_s.v).sum() * da;
    for (int n = 0; n < Mi; ++n)
      proj.c_i(b, n) = (mi_L_[n].conjugate() * out.a_i.v).sum() * da;
  });
  return proj;
}

SpdcPipeline::Eval SpdcPipeline::evaluate(const PumpParams& pump,
                                          const HologramParams& holo,
                                          const VacuumBatch& batch) const {
  const SliceStack stack = cache_.build(pump, holo);
  Eval ev;
  ev.moments = accumulate_moments(forward_batch(stack, batch), sigma0_sq_);
  ev.P = compute_P(ev.moments);
  ev.P.labels_s = basis_s_.labels();
  ev.P.labels_i = basis_i_.labels();
  ev.loss = loss_value(ev.P.p, target_, weights_);
  return ev;
}

void SpdcPipeline::moments_backward(const BatchProjections& proj,
                                    const Eigen::VectorXd& n_s_bar,
                                    const Eigen::VectorXd& n_i_bar,
                                    const Eigen::MatrixXcd& phi_bar,
                                    Eigen::MatrixXcd& cs_bar, Eigen::MatrixXcd& ci_bar) {
  const int B = proj.batch();
  // N(m) = mean(|c(m)|^2 - cv):           c_bar += (2/B) N_bar(m) c
  // Phi(m,n) = mean(c_s(m) c_i(n) - cv):  c_s_bar += (1/B) Phi_bar conj(c_i)
  cs_bar.resize(proj.c_s.rows(), proj.c_s.cols());
  ci_bar.resize(proj.c_i.rows(), proj.c_i.cols());
  for (int b = 0; b < B; ++b) {
    for (int m = 0; m < proj.c_s.cols(); ++m)
      cs_bar(b, m) = (2.0 / B) * n_s_bar[m] * proj.c_s(b, m);
    for (int n = 0; n < proj.c_i.cols(); ++n)
      ci_bar(b, n) = (2.0 / B) * n_i_bar[n] * proj.c_i(b, n);
  }
  cs_bar.noalias() += (1.0 / B) * proj.c_i.conjugate() * phi_bar.transpose();
  ci_bar.noalias() += (1.0 / B) * proj.c_s.conjugate() * phi_bar;
}

SpdcPipeline::GradEval SpdcPipeline::grad(const PumpParams& pump,
                                          const HologramParams& holo,
                                          const VacuumBatch& batch) const {
  const GridSpec& g = grid();
  const SliceStack stack = cache_.build(pump, holo);
  const int B = batch.batch_size;
  const int Ms = basis_s_.size(), Mi = basis_i_.size();
  const double da = g.pixel_area();
  const bool holo_modal = holo.kind == HologramParams::Kind::Modal;
  const int Kp = static_cast<int>(pump.coeffs.size());
  const int Kc = holo_modal ? holo.basis.size() : 0;

  GradEval ev;
  const BatchProjections proj = forward_batch(stack, batch);
  ev.moments = accumulate_moments(proj, sigma0_sq_);
  ev.P = compute_P(ev.moments);
  ev.P.labels_s = basis_s_.labels();
  ev.P.labels_i = basis_i_.labels();
  ev.loss = loss_value(ev.P.p, target_, weights_);

  // ---- reverse sweep, batch level -------------------------------------
  // loss -> P -> (floor, normalize) -> P_raw -> (N_s, N_i, Phi)
  const Eigen::MatrixXd p_bar = loss_backward(ev.P.p, target_, weights_);
  const Eigen::MatrixXd raw =
      ev.moments.phi.cwiseAbs2().matrix() + ev.moments.n_s * ev.moments.n_i.transpose();
  const Eigen::MatrixXd floored = raw.cwiseMax(0.0);
  const double total = floored.sum();
  const double inner = (p_bar.array() * ev.P.p.array()).sum();
  Eigen::MatrixXd raw_bar(raw.rows(), raw.cols());
  for (Eigen::Index m = 0; m < raw.rows(); ++m)
    for (Eigen::Index n = 0; n < raw.cols(); ++n)
      raw_bar(m, n) = raw(m, n) > 0.0 ? (p_bar(m, n) - inner) / total : 0.0;

  Eigen::MatrixXcd phi_bar(raw.rows(), raw.cols());
  for (Eigen::Index m = 0; m < raw.rows(); ++m)
    for (Eigen::Index n = 0; n < raw.cols(); ++n)
      phi_bar(m, n) = 2.0 * raw_bar(m, n) * ev.moments.phi(m, n);
  const Eigen::VectorXd n_s_bar = raw_bar * ev.moments.n_i;
  const Eigen::VectorXd n_i_bar = raw_bar.transpose() * ev.moments.n_s;

  Eigen::MatrixXcd cs_bar, ci_bar;
  moments_backward(proj, n_s_bar, n_i_bar, phi_bar, cs_bar, ci_bar);

  // ---- reverse sweep, per sample ---------------------------------------
  // Checkpointed adjoint: re-run the forward recording slice entry states,
  // then walk the slices backwards recomputing intra-slice values.
  std::vector<Eigen::VectorXcd> dpump(B);
  std::vector<Eigen::MatrixXcd> dholo(B);
  const int n_seg = stack.n_seg;

  parallel_for(B, threads_, [&](std::size_t b) {
    auto [ss, si] = batch.sample(static_cast<int>(b));
    PropagationRecord rec;
    propagate_with_stack(FieldPair(std::move(ss), std::move(si)), stack,
                         cache_.half_step(), &rec);

    ArrayXcd fbar_s = ArrayXcd::Zero(g.npix());
    ArrayXcd fbar_i = ArrayXcd::Zero(g.npix());
    for (int m = 0; m < Ms; ++m) fbar_s += (cs_bar(b, m) * da) * ms_L_[m];
    for (int n = 0; n < Mi; ++n) fbar_i += (ci_bar(b, n) * da) * mi_L_[n];

    std::vector<ArrayXcd> abar;
    if (holo_modal && holo.trainable)
      abar.assign(n_seg, ArrayXcd::Zero(g.npix()));
    Eigen::VectorXcd dp = Eigen::VectorXcd::Zero(Kp);
    double beta_bar = 0.0;
    ArrayXcd qbar(g.npix()), xs_bar(g.npix()), xi_bar(g.npix());

    for (int j = g.nz - 1; j >= 0; --j) {
      cache_.half_step().apply_single(fbar_s, false, true);
      cache_.half_step().apply_single(fbar_i, true, true);

      FieldPair pre = rec.slice_in[j];
      cache_.half_step().apply(pre);  // recompute pre-coupling fields

      qbar.setZero();
      for (int p = 0; p < g.npix(); ++p) {
        Complex xsb, xib;
        primitives::coupling_adjoint(pre.a_s.v[p], pre.a_i.v[p], stack.q[j][p],
                                     g.dz, fbar_s[p], fbar_i[p], xsb, xib, qbar[p]);
        xs_bar[p] = xsb;
        xi_bar[p] = xib;
      }
      fbar_s.swap(xs_bar);
      fbar_i.swap(xi_bar);

      // q = (i kappa carrier) a_seg E_p with E_p = beta pump_raw.
      const Complex mfac = std::conj(Complex(0.0, params().kappa) * stack.carrier[j]);
      const int seg = stack.segment_of(j);
      if (holo_modal && holo.trainable)
        abar[seg] += qbar * mfac * (stack.beta * stack.pump_raw[j]).conjugate();
      if (pump.trainable) {
        const ArrayXcd ep_bar = qbar * mfac * stack.holo_a[seg].conjugate();
        beta_bar += (ep_bar.conjugate() * stack.pump_raw[j]).sum().real();
        for (int k = 0; k < Kp; ++k)
          dp[k] += stack.beta *
                   (ep_bar * cache_.pump_modes()[j][k].conjugate()).sum();
      }

      cache_.half_step().apply_single(fbar_s, false, true);
      cache_.half_step().apply_single(fbar_i, true, true);
    }

    if (pump.trainable) {
      // Power normalization path: beta = sqrt(P / Pi), Pi the z = 0 power.
      const double pi_bar = -beta_bar * stack.beta / (2.0 * stack.power_raw0);
      const ArrayXcd raw0_bar = (2.0 * pi_bar * da) * stack.pump_raw0;
      for (int k = 0; k < Kp; ++k)
        dp[k] += (raw0_bar * cache_.pump_modes0()[k].conjugate()).sum();
    }
    dpump[b] = std::move(dp);

    Eigen::MatrixXcd dh = Eigen::MatrixXcd::Zero(holo_modal ? holo.n_seg : 0, Kc);
    if (holo_modal && holo.trainable) {
      for (int s = 0; s < n_seg; ++s) {
        const ArrayXcd ubar = primitives::clip_backward(stack.holo_u[s], abar[s]);
        for (int k = 0; k < Kc; ++k)
          dh(s, k) = (ubar * cache_.holo_profiles()[k].conjugate()).sum();
      }
    }
    dholo[b] = std::move(dh);
  });

  // Ordered reduction over samples: bit-identical for any thread count.
  ev.grad.d_pump = Eigen::VectorXcd::Zero(Kp);
  ev.grad.d_holo = Eigen::MatrixXcd::Zero(holo_modal ? holo.n_seg : 0, Kc);
  for (int b = 0; b < B; ++b) {
    if (pump.trainable) ev.grad.d_pump += dpump[b];
    if (holo_modal && holo.trainable) ev.grad.d_holo += dholo[b];
  }
  return ev;
}

std::string GradCheckReport::to_text() const {
  std::ostringstream os;
  os << "grad_check: fd_step=" << fd_step << " tolerance=" << tolerance << "\n";
  os << "  component            analytic              fd            rel_err\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-16s %+.10e %+.10e %.3e\n", r.name.c_str(),
                  r.analytic, r.fd, r.rel_err);
    os << buf;
  }
  os << "max_rel_err=" << max_rel_err << " -> " << (pass ? "pass" : "fail") << "\n";
  return os.str();
}

std::string GradCheckReport::to_csv() const {
  std::ostringstream os;
  os << "component,analytic,fd,rel_err\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", r.name.c_str(),
                  r.analytic, r.fd, r.rel_err);
    os << buf;
  }
  return os.str();
}

GradCheckReport grad_check(const SpdcPipeline& pipeline, const PumpParams& pump,
                           const HologramParams& holo, const VacuumBatch& batch,
                           double fd_step, double tolerance) {
  GradCheckReport report;
  report.fd_step = fd_step;
  report.tolerance = tolerance;

  const auto ge = pipeline.grad(pump, holo, batch);
  const bool holo_modal = holo.kind == HologramParams::Kind::Modal;

  struct Entry {
    std::string name;
    double analytic;
    std::function<void(double)> bump;  // adds h to this real component
  };
  std::vector<Entry> entries;
  PumpParams p = pump;
  HologramParams h = holo;
  if (pump.trainable) {
    for (int k = 0; k < p.coeffs.size(); ++k) {
      entries.push_back({"pump[" + std::to_string(k) + "].re", ge.grad.d_pump[k].real(),
                         [&p, k](double d) { p.coeffs[k] += d; }});
      entries.push_back({"pump[" + std::to_string(k) + "].im", ge.grad.d_pump[k].imag(),
                         [&p, k](double d) { p.coeffs[k] += Complex(0, d); }});
    }
  }
  if (holo_modal && holo.trainable) {
    for (int s = 0; s < h.raw.rows(); ++s)
      for (int k = 0; k < h.raw.cols(); ++k) {
        const std::string base = "holo[" + std::to_string(s) + "," + std::to_string(k) + "]";
        entries.push_back({base + ".re", ge.grad.d_holo(s, k).real(),
                           [&h, s, k](double d) { h.raw(s, k) += d; }});
        entries.push_back({base + ".im", ge.grad.d_holo(s, k).imag(),
                           [&h, s, k](double d) { h.raw(s, k) += Complex(0, d); }});
      }
  }

  double scale = 0.0;
  std::vector<double> fds(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    entries[e].bump(fd_step);
    const double lp = pipeline.evaluate(p, h, batch).loss;
    entries[e].bump(-2.0 * fd_step);
    const double lm = pipeline.evaluate(p, h, batch).loss;
    entries[e].bump(fd_step);
    fds[e] = (lp - lm) / (2.0 * fd_step);
    scale = std::max(scale, std::abs(fds[e]));
  }
  for (std::size_t e = 0; e < entries.size(); ++e) {
    GradCheckReport::Row row;
    row.name = entries[e].name;
    row.analytic = entries[e].analytic;
    row.fd = fds[e];
    const double denom =
        std::max({std::abs(row.fd), std::abs(row.analytic), 1e-6 * scale, 1e-300});
    row.rel_err = std::abs(row.analytic - row.fd) / denom;
    report.max_rel_err = std::max(report.max_rel_err, row.rel_err);
    report.rows.push_back(std::move(row));
  }
  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace spdc
