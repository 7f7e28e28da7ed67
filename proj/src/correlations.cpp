#include "spdc/correlations.hpp"

#include <cmath>

#include "spdc/parallel.hpp"

namespace spdc {

BatchProjections project_batch(const std::vector<FieldPair>& outputs,
                               const std::vector<FieldPair>* seeds,
                               const ModeBasis& basis_s, const ModeBasis& basis_i,
                               double z_out, int threads) {
  const int B = static_cast<int>(outputs.size());
  if (B < 1) throw InvalidArgument("project_batch: empty batch");
  if (seeds && static_cast<int>(seeds->size()) != B)
    throw ShapeMismatch("project_batch: seeds/outputs size");
  const GridSpec& grid = outputs[0].a_s.grid;
  const auto ms_L = eval_basis(basis_s, z_out, grid);
  const auto mi_L = eval_basis(basis_i, z_out, grid);
  const auto ms_0 = seeds ? eval_basis(basis_s, 0.0, grid) : std::vector<ComplexField>{};
  const auto mi_0 = seeds ? eval_basis(basis_i, 0.0, grid) : std::vector<ComplexField>{};

  BatchProjections proj;
  proj.c_s.resize(B, basis_s.size());
  proj.c_i.resize(B, basis_i.size());
  if (seeds) {
    proj.c0_s.resize(B, basis_s.size());
    proj.c0_i.resize(B, basis_i.size());
  }
  const double da = grid.pixel_area();
  parallel_for(B, threads, [&](std::size_t b) {
    for (int m = 0; m < basis_s.size(); ++m)
      proj.c_s(b, m) = (ms_L[m].v.conjugate() * outputs[b].a_s.v).sum() * da;
    for (int n = 0; n < basis_i.size(); ++n)
      proj.c_i(b, n) = (mi_L[n].v.conjugate() * outputs[b].a_i.v).sum() * da;
    if (seeds) {
      for (int m = 0; m < basis_s.size(); ++m)
        proj.c0_s(b, m) = (ms_0[m].v.conjugate() * (*seeds)[b].a_s.v).sum() * da;
      for (int n = 0; n < basis_i.size(); ++n)
        proj.c0_i(b, n) = (mi_0[n].v.conjugate() * (*seeds)[b].a_i.v).sum() * da;
    }
  });
  return proj;
}

MomentSet accumulate_moments(const BatchProjections& proj, double sigma0_sq) {
  const int B = proj.batch();
  if (B < 2) throw InvalidArgument("estimate_moments: batch must be >= 2");
  const int Ms = static_cast<int>(proj.c_s.cols());
  const int Mi = static_cast<int>(proj.c_i.cols());
  const bool cv = proj.c0_s.size() > 0;

  MomentSet mom;
  mom.batch = B;
  Eigen::MatrixXcd g1s = Eigen::MatrixXcd::Zero(Ms, Ms);
  Eigen::MatrixXcd g1i = Eigen::MatrixXcd::Zero(Mi, Mi);
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(Ms, Mi);
  Eigen::MatrixXcd exch = Eigen::MatrixXcd::Zero(Ms, Mi);
  Eigen::MatrixXd phi2 = Eigen::MatrixXd::Zero(Ms, Mi);  // sum |per-sample product|^2

  // Fixed sample order: the reduction is deterministic for any thread count
  // used upstream of projection.
  for (int b = 0; b < B; ++b) {
    const auto cs = proj.c_s.row(b);
    const auto ci = proj.c_i.row(b);
    if (cv) {
      const auto c0s = proj.c0_s.row(b);
      const auto c0i = proj.c0_i.row(b);
      g1s.noalias() += cs.adjoint() * cs - c0s.adjoint() * c0s;
      g1i.noalias() += ci.adjoint() * ci - c0i.adjoint() * c0i;
      const Eigen::MatrixXcd prod =
          cs.transpose() * ci - c0s.transpose() * c0i;
      phi += prod;
      phi2 += prod.cwiseAbs2();
      exch.noalias() += cs.adjoint() * ci - c0s.adjoint() * c0i;
    } else {
      g1s.noalias() += cs.adjoint() * cs;
      g1i.noalias() += ci.adjoint() * ci;
      const Eigen::MatrixXcd prod = cs.transpose() * ci;
      phi += prod;
      phi2 += prod.cwiseAbs2();
      exch.noalias() += cs.adjoint() * ci;
    }
  }
  g1s /= B;
  g1i /= B;
  phi /= B;
  exch /= B;
  if (!cv) {
    g1s -= sigma0_sq * Eigen::MatrixXcd::Identity(Ms, Ms);
    g1i -= sigma0_sq * Eigen::MatrixXcd::Identity(Mi, Mi);
  }
  mom.g1_s = 0.5 * (g1s + g1s.adjoint());
  mom.g1_i = 0.5 * (g1i + g1i.adjoint());
  mom.n_s = mom.g1_s.diagonal().real();
  mom.n_i = mom.g1_i.diagonal().real();
  mom.phi = phi;
  mom.exchange = exch;
  // Squared standard error of each Phi entry, kept for the degeneracy check.
  mom.phi_sem_sq = (phi2 / B - phi.cwiseAbs2().matrix()).cwiseMax(0.0) / (B - 1.0);
  return mom;
}

MomentSet estimate_moments(const std::vector<FieldPair>& outputs,
                           const std::vector<FieldPair>* seeds,
                           const ModeBasis& basis_s, const ModeBasis& basis_i,
                           double z_out, double sigma0_sq, int threads) {
  if (outputs.size() < 2) throw InvalidArgument("estimate_moments: batch must be >= 2");
  return accumulate_moments(
      project_batch(outputs, seeds, basis_s, basis_i, z_out, threads), sigma0_sq);
}

CorrelationMatrix compute_P(const MomentSet& mom) {
  if (!mom.phi.allFinite() || !mom.n_s.allFinite() || !mom.n_i.allFinite())
    throw InvalidArgument("compute_P: non-finite moments");
  // Pair signal must rise above the estimator noise floor; otherwise the
  // normalized matrix would be pure noise (kappa = 0, or B too small).
  const double signal = mom.phi.cwiseAbs2().sum();
  const double floor = mom.phi_sem_sq.sum();
  if (signal <= 4.0 * floor)
    throw DegenerateP("pair amplitude below estimator noise floor");

  Eigen::MatrixXd raw =
      mom.phi.cwiseAbs2().matrix() + mom.n_s * mom.n_i.transpose();
  const Eigen::MatrixXd floored = raw.cwiseMax(0.0);
  const double total = floored.sum();
  if (!(total > 0.0)) throw DegenerateP("no positive mass in P");
  CorrelationMatrix out;
  out.p = floored / total;
  out.floored_mass = (floored - raw).sum() / total;
  return out;
}

Eigen::MatrixXd fourth_moment_G2(const BatchProjections& proj, double sigma0_sq) {
  const int B = proj.batch();
  const int Ms = static_cast<int>(proj.c_s.cols());
  const int Mi = static_cast<int>(proj.c_i.cols());
  Eigen::MatrixXd m4 = Eigen::MatrixXd::Zero(Ms, Mi);
  Eigen::VectorXd ns = Eigen::VectorXd::Zero(Ms);
  Eigen::VectorXd ni = Eigen::VectorXd::Zero(Mi);
  for (int b = 0; b < B; ++b) {
    const Eigen::VectorXd is = proj.c_s.row(b).cwiseAbs2().real().transpose();
    const Eigen::VectorXd ii = proj.c_i.row(b).cwiseAbs2().real().transpose();
    m4.noalias() += is * ii.transpose();
    ns += is;
    ni += ii;
  }
  m4 /= B;
  ns = ns / B - Eigen::VectorXd::Constant(Ms, sigma0_sq);
  ni = ni / B - Eigen::VectorXd::Constant(Mi, sigma0_sq);
  // Symmetric-ordered fourth moment back to normal ordering:
  // <n_s n_i> = m4 - s0 N_s - s0 N_i - s0^2 elementwise.
  Eigen::MatrixXd g2 = m4;
  g2.colwise() -= sigma0_sq * ns;
  g2.rowwise() -= (sigma0_sq * ni).transpose();
  g2.array() -= sigma0_sq * sigma0_sq;
  return g2;
}

Eigen::MatrixXcd perturbative_jsa(const PumpParams& pump, const HologramParams& holo,
                                  const InteractionParams& params,
                                  const ModeBasis& basis_s, const ModeBasis& basis_i,
                                  const GridSpec& grid) {
  params.validate();
  holo.validate(grid.nz);
  const double da = grid.pixel_area();
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(basis_s.size(), basis_i.size());
  for (int j = 0; j < grid.nz; ++j) {
    const double zc = (j + 0.5) * grid.dz;
    const ComplexField ep = build_pump(pump, zc, grid);
    const ComplexField a = build_hologram(holo, j, grid);
    const ComplexField aeff = effective_coupling(a, j, params, grid);
    const ArrayXcd f =
        Complex(0.0, params.kappa) * aeff.v * ep.v * (grid.dz * da);
    const auto ms = eval_basis(basis_s, zc, grid);
    const auto mi = eval_basis(basis_i, zc, grid);
    for (int m = 0; m < basis_s.size(); ++m) {
      const ArrayXcd fm = f * ms[m].v.conjugate();
      for (int n = 0; n < basis_i.size(); ++n)
        phi(m, n) += (fm * mi[n].v.conjugate()).sum();
    }
  }
  return phi;
}

double fidelity(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols())
    throw ShapeMismatch("fidelity: matrix shapes differ");
  double f = 0.0;
  for (Eigen::Index j = 0; j < p.rows(); ++j)
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
      const double a = p(j, k), b = q(j, k);
      if (a > 0.0 && b > 0.0) f += std::sqrt(a * b);
    }
  return f;
}

double fidelity(const CorrelationMatrix& p, const CorrelationMatrix& target) {
  return fidelity(p.p, target.p);
}

}  // namespace spdc
