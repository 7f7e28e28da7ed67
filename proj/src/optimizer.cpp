#include "spdc/optimizer.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>

namespace spdc {

CorrelationMatrix make_target(const TargetSpec& spec, const ModeBasis& basis_s,
                              const ModeBasis& basis_i) {
  CorrelationMatrix out;
  out.p = Eigen::MatrixXd::Zero(basis_s.size(), basis_i.size());
  out.labels_s = basis_s.labels();
  out.labels_i = basis_i.labels();

  auto lg_cell = [&](int ls, int li) -> std::pair<int, int> {
    const int ms = basis_s.find(ModeFamily::LG, 0, ls);
    const int mi = basis_i.find(ModeFamily::LG, 0, li);
    if (ms < 0 || mi < 0)
      throw ModeNotInBasis("target needs LG l=" + std::to_string(ls) + "," +
                           std::to_string(li));
    return {ms, mi};
  };

  switch (spec.kind) {
    case TargetKind::LgQudit: {
      if (spec.d < 2) throw InvalidArgument("qudit target needs d >= 2");
      for (int l = 1; l <= spec.d; ++l) {
        auto [ms, mi] = lg_cell(l, l);
        out.p(ms, mi) = 1.0 / spec.d;
      }
      break;
    }
    case TargetKind::LgHighOrderQubit: {
      if (spec.l < 1) throw InvalidArgument("qubit target needs l >= 1");
      auto [a, b] = lg_cell(spec.l, -spec.l);
      auto [c, d] = lg_cell(-spec.l, spec.l);
      out.p(a, b) = 0.5;
      out.p(c, d) = 0.5;
      break;
    }
    case TargetKind::HgQuquad: {
      for (int n = 0; n <= 3; ++n) {
        const int ms = basis_s.find(ModeFamily::HG, n, 0);
        const int mi = basis_i.find(ModeFamily::HG, n, 0);
        if (ms < 0 || mi < 0)
          throw ModeNotInBasis("target needs HG n=" + std::to_string(n) + ", m=0");
        out.p(ms, mi) = 0.25;
      }
      break;
    }
    case TargetKind::Custom: {
      if (spec.custom.rows() != basis_s.size() || spec.custom.cols() != basis_i.size())
        throw ShapeMismatch("custom target shape != measurement bases");
      if ((spec.custom.array() < 0.0).any())
        throw InvalidArgument("custom target has negative entries");
      const double s = spec.custom.sum();
      if (!(s > 0.0)) throw InvalidArgument("custom target has zero mass");
      out.p = spec.custom / s;
      break;
    }
  }
  return out;
}

void adam_update(AdamState& st, Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                 const OptConfig& cfg) {
  if (st.m.size() != params.size()) {
    st.m = Eigen::VectorXd::Zero(params.size());
    st.v = Eigen::VectorXd::Zero(params.size());
    st.t = 0;
  }
  if (grad.size() != params.size()) throw ShapeMismatch("adam: grad/param size");
  st.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grad[i];
    st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mhat = st.m[i] / bc1;
    const double vhat = st.v[i] / bc2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

namespace {

// Packing order of the trainable groups into the flat Adam vector: pump
// coefficients (Re, Im interleaved) then hologram rows. Frozen groups are
// not packed at all, so Adam state never touches them.
int packed_size(const TrainState& s) {
  int n = 0;
  if (s.pump.trainable) n += 2 * static_cast<int>(s.pump.coeffs.size());
  if (s.holo.trainable && s.holo.kind == HologramParams::Kind::Modal)
    n += 2 * static_cast<int>(s.holo.raw.size());
  return n;
}

void pack(const TrainState& s, const ParamGradient* g, Eigen::VectorXd& params,
          Eigen::VectorXd* grad) {
  const int n = packed_size(s);
  params.resize(n);
  if (grad) grad->resize(n);
  int at = 0;
  auto put = [&](Complex value, Complex gvalue) {
    params[at] = value.real();
    if (grad) (*grad)[at] = gvalue.real();
    ++at;
    params[at] = value.imag();
    if (grad) (*grad)[at] = gvalue.imag();
    ++at;
  };
  if (s.pump.trainable)
    for (int k = 0; k < s.pump.coeffs.size(); ++k)
      put(s.pump.coeffs[k], g ? g->d_pump[k] : Complex(0));
  if (s.holo.trainable && s.holo.kind == HologramParams::Kind::Modal)
    for (int r = 0; r < s.holo.raw.rows(); ++r)
      for (int c = 0; c < s.holo.raw.cols(); ++c)
        put(s.holo.raw(r, c), g ? g->d_holo(r, c) : Complex(0));
}

void unpack(const Eigen::VectorXd& params, TrainState& s) {
  int at = 0;
  auto get = [&]() {
    const Complex z(params[at], params[at + 1]);
    at += 2;
    return z;
  };
  if (s.pump.trainable)
    for (int k = 0; k < s.pump.coeffs.size(); ++k) s.pump.coeffs[k] = get();
  if (s.holo.trainable && s.holo.kind == HologramParams::Kind::Modal)
    for (int r = 0; r < s.holo.raw.rows(); ++r)
      for (int c = 0; c < s.holo.raw.cols(); ++c) s.holo.raw(r, c) = get();
}

}  // namespace

TrainState adam_step(TrainState state, const ParamGradient& grad, const OptConfig& cfg) {
  Eigen::VectorXd params, g;
  pack(state, &grad, params, &g);
  adam_update(state.adam, params, g, cfg);
  unpack(params, state);
  state.step += 1;
  return state;
}

std::uint64_t derived_seed(std::uint64_t run_seed, std::uint64_t purpose, std::uint64_t t) {
  return mix_seed(mix_seed(run_seed, purpose << 48), t);
}

std::uint64_t step_noise_seed(std::uint64_t run_seed, int step) {
  return derived_seed(run_seed, 1, static_cast<std::uint64_t>(step));
}

TrainResult train(const SpdcPipeline& pipeline, TrainState state, const OptConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  const GridSpec& grid = pipeline.grid();
  while (state.step < cfg.iterations) {
    const int t = state.step;
    const std::uint64_t seed = step_noise_seed(state.run_seed, cfg.fixed_noise ? 0 : t);
    const VacuumBatch batch(seed, cfg.batch, grid, pipeline.sigma0_sq());
    SpdcPipeline::GradEval ge;
    try {
      ge = pipeline.grad(state.pump, state.holo, batch);
    } catch (const NonFiniteField& e) {
      throw NonFiniteField(std::string(e.what()) + " at optimizer step " +
                           std::to_string(t));
    }
    state.loss_history.push_back(ge.loss);
    state = adam_step(std::move(state), ge.grad, cfg);
    if (hooks.on_step) hooks.on_step(t, ge.loss);
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 &&
        state.step % cfg.checkpoint_every == 0)
      hooks.on_checkpoint(state);
  }

  TrainResult result;
  const int eval_b = cfg.eval_batch > 0 ? cfg.eval_batch : cfg.batch;
  const VacuumBatch eval_batch(derived_seed(state.run_seed, 2, 0), eval_b, grid,
                               pipeline.sigma0_sq());
  auto ev = pipeline.evaluate(state.pump, state.holo, eval_batch);
  result.P = std::move(ev.P);
  result.moments = std::move(ev.moments);
  result.state = std::move(state);
  return result;
}

// ---- checkpoint serialization ------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'P', 'D', 'C', 'C', 'K', 'P', '1'};

struct Writer {
  std::vector<std::uint8_t> bytes;
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i32(std::int32_t v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void cvec(const Eigen::VectorXcd& v) {
    i32(static_cast<std::int32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      f64(v[i].real());
      f64(v[i].imag());
    }
  }
  void dvec(const Eigen::VectorXd& v) {
    i32(static_cast<std::int32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
};

struct Reader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t at = 0;
  void raw(void* p, std::size_t n) {
    if (at + n > bytes.size()) throw MetadataMismatch("checkpoint truncated");
    std::memcpy(p, bytes.data() + at, n);
    at += n;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    raw(&v, 4);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  Eigen::VectorXcd cvec() {
    const int n = i32();
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) {
      const double re = f64();
      const double im = f64();
      v[i] = Complex(re, im);
    }
    return v;
  }
  Eigen::VectorXd dvec() {
    const int n = i32();
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> TrainState::serialize() const {
  Writer w;
  w.raw(kMagic, 8);
  w.u64(config_hash);
  w.u64(run_seed);
  w.i32(step);
  w.i32(pump.trainable ? 1 : 0);
  w.i32(holo.trainable ? 1 : 0);
  w.i32(holo.kind == HologramParams::Kind::Uniform ? 1 : 0);
  w.cvec(pump.coeffs);
  w.f64(pump.power);
  w.i32(holo.kind == HologramParams::Kind::Modal ? holo.n_seg : 0);
  if (holo.kind == HologramParams::Kind::Modal) {
    w.i32(static_cast<std::int32_t>(holo.raw.cols()));
    for (int r = 0; r < holo.raw.rows(); ++r)
      for (int c = 0; c < holo.raw.cols(); ++c) {
        w.f64(holo.raw(r, c).real());
        w.f64(holo.raw(r, c).imag());
      }
  }
  w.dvec(adam.m);
  w.dvec(adam.v);
  w.u64(static_cast<std::uint64_t>(adam.t));
  w.i32(static_cast<std::int32_t>(loss_history.size()));
  for (double v : loss_history) w.f64(v);
  const auto crc = crc32(0, w.bytes.data(), static_cast<uInt>(w.bytes.size()));
  w.u64(crc);
  return std::move(w.bytes);
}

TrainState TrainState::deserialize(const std::vector<std::uint8_t>& bytes,
                                   const TrainState& templ) {
  if (bytes.size() < 16) throw MetadataMismatch("checkpoint too short");
  const std::size_t payload = bytes.size() - 8;
  std::uint64_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + payload, 8);
  if (stored_crc != crc32(0, bytes.data(), static_cast<uInt>(payload)))
    throw MetadataMismatch("checkpoint crc mismatch");

  Reader r{bytes};
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw MetadataMismatch("not a checkpoint file");

  TrainState s = templ;
  s.config_hash = r.u64();
  if (templ.config_hash != 0 && s.config_hash != templ.config_hash)
    throw MetadataMismatch("checkpoint config hash differs from current config");
  s.run_seed = r.u64();
  s.step = r.i32();
  const bool pump_tr = r.i32() != 0;
  const bool holo_tr = r.i32() != 0;
  const bool holo_uniform = r.i32() != 0;
  if (pump_tr != templ.pump.trainable || holo_tr != templ.holo.trainable ||
      holo_uniform != (templ.holo.kind == HologramParams::Kind::Uniform))
    throw MetadataMismatch("checkpoint trainable flags differ from config");
  s.pump.coeffs = r.cvec();
  if (s.pump.coeffs.size() != templ.pump.coeffs.size())
    throw MetadataMismatch("checkpoint pump size differs from config");
  s.pump.power = r.f64();
  const int n_seg = r.i32();
  if (n_seg > 0) {
    if (templ.holo.kind != HologramParams::Kind::Modal ||
        n_seg != templ.holo.n_seg)
      throw MetadataMismatch("checkpoint hologram segmentation differs");
    const int kc = r.i32();
    if (kc != templ.holo.basis.size())
      throw MetadataMismatch("checkpoint hologram basis size differs");
    s.holo.raw.resize(n_seg, kc);
    for (int row = 0; row < n_seg; ++row)
      for (int c = 0; c < kc; ++c) {
        const double re = r.f64();
        const double im = r.f64();
        s.holo.raw(row, c) = Complex(re, im);
      }
  }
  s.adam.m = r.dvec();
  s.adam.v = r.dvec();
  s.adam.t = static_cast<std::int64_t>(r.u64());
  const int nh = r.i32();
  s.loss_history.assign(nh, 0.0);
  for (int i = 0; i < nh; ++i) s.loss_history[i] = r.f64();
  return s;
}

}  // namespace spdc
