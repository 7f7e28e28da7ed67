#include "spdc/modes.hpp"

#include <algorithm>
#include <cmath>

namespace spdc {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Associated Laguerre polynomial L_p^a(x) by the three-term recurrence.
double laguerre(int p, int a, double x) {
  if (p == 0) return 1.0;
  double lm1 = 1.0;
  double l = 1.0 + a - x;
  for (int k = 2; k <= p; ++k) {
    const double next = ((2 * k - 1 + a - x) * l - (k - 1 + a) * lm1) / k;
    lm1 = l;
    l = next;
  }
  return l;
}

// Physicists' Hermite polynomial H_n(x).
double hermite(int n, double x) {
  if (n == 0) return 1.0;
  double hm1 = 1.0;
  double h = 2.0 * x;
  for (int k = 2; k <= n; ++k) {
    const double next = 2.0 * x * h - 2.0 * (k - 1) * hm1;
    hm1 = h;
    h = next;
  }
  return h;
}

}  // namespace

void ModeSpec::validate() const {
  if (a < 0) throw InvalidArgument("mode index a must be >= 0");
  if (family == ModeFamily::HG && b < 0)
    throw InvalidArgument("HG mode index m must be >= 0");
  if (w0 <= 0 || lambda <= 0 || n_medium <= 0)
    throw InvalidArgument("mode waist, wavelength, index must be > 0");
}

double ModeSpec::waist_at(double z) const {
  const double zr = rayleigh_range();
  return w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
}

double ModeSpec::mode_radius(double z) const {
  const double w = waist_at(z);
  if (family == ModeFamily::LG) return w * std::sqrt(2.0 * a + std::abs(b) + 1.0);
  return w * std::sqrt(static_cast<double>(a + b + 1));
}

std::string ModeSpec::label() const {
  char buf[48];
  if (family == ModeFamily::LG)
    std::snprintf(buf, sizeof(buf), "LG(p%d;l%+d)", a, b);
  else
    std::snprintf(buf, sizeof(buf), "HG(n%d;m%d)", a, b);
  return buf;
}

int ModeBasis::find(ModeFamily fam, int a, int b) const {
  for (int k = 0; k < size(); ++k) {
    const auto& m = modes[k];
    if (m.family == fam && m.a == a && m.b == b) return k;
  }
  return -1;
}

std::vector<std::string> ModeBasis::labels() const {
  std::vector<std::string> out;
  out.reserve(modes.size());
  for (const auto& m : modes) out.push_back(m.label());
  return out;
}

ModeBasis ModeBasis::lg(int l_min, int l_max, int p_max, double w0, double lambda,
                        double n_medium) {
  if (l_min > l_max || p_max < 0) throw InvalidArgument("lg basis index range");
  ModeBasis basis;
  for (int l = l_min; l <= l_max; ++l)
    for (int p = 0; p <= p_max; ++p) {
      ModeSpec m{ModeFamily::LG, p, l, w0, lambda, n_medium};
      m.validate();
      basis.modes.push_back(m);
    }
  return basis;
}

ModeBasis ModeBasis::hg(int n_max, int m_max, double w0, double lambda,
                        double n_medium) {
  if (n_max < 0 || m_max < 0) throw InvalidArgument("hg basis index range");
  ModeBasis basis;
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= m_max; ++m) {
      ModeSpec s{ModeFamily::HG, n, m, w0, lambda, n_medium};
      s.validate();
      basis.modes.push_back(s);
    }
  return basis;
}

ComplexField eval_mode(const ModeSpec& spec, double z, const GridSpec& grid,
                       double min_window_factor) {
  spec.validate();
  const double radius = spec.mode_radius(z);
  if (std::min(grid.window_x(), grid.window_y()) < min_window_factor * radius)
    throw WindowTooSmall(spec.label() + " at z=" + std::to_string(z) +
                         ": window < containment factor x mode radius");

  const double zr = spec.rayleigh_range();
  const double w = spec.waist_at(z);
  const double k = spec.wavenumber();
  const double inv_r = z / (z * z + zr * zr);  // 1/R(z), finite at z = 0
  const double gouy = std::atan2(z, zr);

  ComplexField out(grid);
  if (spec.family == ModeFamily::LG) {
    const int p = spec.a, l = spec.b;
    const int al = std::abs(l);
    const double norm = std::sqrt(2.0 * factorial(p) / (kPi * factorial(p + al))) / w;
    const double phase_gouy = (2 * p + al + 1) * gouy;
    for (int j = 0; j < grid.ny; ++j) {
      const double yy = grid.y(j);
      for (int i = 0; i < grid.nx; ++i) {
        const double xx = grid.x(i);
        const double r2 = xx * xx + yy * yy;
        const double rho = std::sqrt(2.0 * r2) / w;
        const double amp = norm * std::pow(rho, al) * laguerre(p, al, rho * rho) *
                           std::exp(-r2 / (w * w));
        // Sign conventions match the split-step propagator: diverging
        // curvature carries +i k r^2 / 2R, Gouy advances as -i (2p+|l|+1) psi.
        const double ph = l * std::atan2(yy, xx) + 0.5 * k * r2 * inv_r - phase_gouy;
        out.v[j * grid.nx + i] = amp * Complex(std::cos(ph), std::sin(ph));
      }
    }
  } else {
    const int n = spec.a, m = spec.b;
    const double norm =
        std::sqrt(2.0 / kPi) /
        (w * std::sqrt(std::pow(2.0, n + m) * factorial(n) * factorial(m)));
    const double phase_gouy = (n + m + 1) * gouy;
    const double s = std::sqrt(2.0) / w;
    for (int j = 0; j < grid.ny; ++j) {
      const double yy = grid.y(j);
      for (int i = 0; i < grid.nx; ++i) {
        const double xx = grid.x(i);
        const double r2 = xx * xx + yy * yy;
        const double amp = norm * hermite(n, s * xx) * hermite(m, s * yy) *
                           std::exp(-r2 / (w * w));
        const double ph = 0.5 * k * r2 * inv_r - phase_gouy;
        out.v[j * grid.nx + i] = amp * Complex(std::cos(ph), std::sin(ph));
      }
    }
  }
  return out;
}

std::vector<ComplexField> eval_basis(const ModeBasis& basis, double z,
                                     const GridSpec& grid) {
  std::vector<ComplexField> out;
  out.reserve(basis.size());
  for (const auto& m : basis.modes) out.push_back(eval_mode(m, z, grid));
  return out;
}

CoeffVector decompose(const ComplexField& field, const ModeBasis& basis, double z) {
  CoeffVector c(basis.size());
  for (int k = 0; k < basis.size(); ++k)
    c[k] = inner(eval_mode(basis[k], z, field.grid), field);
  return c;
}

Eigen::MatrixXcd gram_matrix(const ModeBasis& basis, const GridSpec& grid, double z) {
  // No containment precondition here: the gram deviation is the diagnostic
  // that tells the preflight the grid is inadequate.
  std::vector<ComplexField> fields;
  fields.reserve(basis.size());
  for (const auto& m : basis.modes) fields.push_back(eval_mode(m, z, grid, 0.0));
  const int n = basis.size();
  Eigen::MatrixXcd g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      const Complex v = inner(fields[j], fields[k]);
      g(j, k) = v;
      g(k, j) = std::conj(v);
    }
    g(j, j) = Complex(g(j, j).real(), 0.0);
  }
  return g;
}

}  // namespace spdc
