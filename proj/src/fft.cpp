#include "spdc/fft.hpp"

#include <cmath>

namespace spdc {

Fft2::Plan1d Fft2::make_plan(int n) {
  Plan1d p;
  p.n = n;
  p.bitrev.resize(n);
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < log2n; ++b)
      if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
    p.bitrev[i] = r;
  }
  // Stage m of the Danielson-Lanczos recursion uses roots exp(-2 pi i j / m),
  // j < m/2; stages are packed back to back (total n - 1 entries).
  p.twiddle_fwd.reserve(n);
  p.twiddle_inv.reserve(n);
  for (int m = 2; m <= n; m <<= 1) {
    for (int j = 0; j < m / 2; ++j) {
      const double ang = -2.0 * kPi * j / m;
      p.twiddle_fwd.push_back(Complex(std::cos(ang), std::sin(ang)));
      p.twiddle_inv.push_back(Complex(std::cos(ang), -std::sin(ang)));
    }
  }
  return p;
}

void Fft2::fft_strided(Complex* data, int stride, const Plan1d& plan, bool inverse) {
  const int n = plan.n;
  const auto& rev = plan.bitrev;
  for (int i = 0; i < n; ++i) {
    const int j = rev[i];
    if (j > i) std::swap(data[i * stride], data[j * stride]);
  }
  const Complex* tw = inverse ? plan.twiddle_inv.data() : plan.twiddle_fwd.data();
  for (int m = 2; m <= n; m <<= 1) {
    const int half = m / 2;
    for (int base = 0; base < n; base += m) {
      for (int j = 0; j < half; ++j) {
        Complex* lo = data + (base + j) * stride;
        Complex* hi = data + (base + j + half) * stride;
        const Complex t = tw[j] * *hi;
        *hi = *lo - t;
        *lo += t;
      }
    }
    tw += half;
  }
}

Fft2::Fft2(int nx, int ny) : nx_(nx), ny_(ny) {
  if (!GridSpec::is_pow2(nx) || !GridSpec::is_pow2(ny))
    throw InvalidArgument("Fft2 requires power-of-two sizes");
  px_ = make_plan(nx);
  py_ = make_plan(ny);
  scale_ = 1.0 / std::sqrt(static_cast<double>(nx) * ny);
}

void Fft2::apply(ArrayXcd& data, FftDirection dir) const {
  const bool inv = dir == FftDirection::Inverse;
  Complex* d = data.data();
  for (int row = 0; row < ny_; ++row) fft_strided(d + row * nx_, 1, px_, inv);
  for (int col = 0; col < nx_; ++col) fft_strided(d + col, nx_, py_, inv);
  data *= scale_;
}

ComplexField fft2_unitary(const ComplexField& field, FftDirection direction) {
  ComplexField out = field;
  Fft2 fft(field.grid.nx, field.grid.ny);
  fft.apply(out.v, direction);
  return out;
}

}  // namespace spdc
