#ifndef SPDC_FFT_HPP
#define SPDC_FFT_HPP

#include <vector>

#include "spdc/grid.hpp"

namespace spdc {

enum class FftDirection { Forward, Inverse };

// Unitary 2D FFT for power-of-two grids (1/sqrt(N) scaling both ways, so
// forward and inverse are exact adjoints of each other). Twiddle tables are
// built once per size; apply() is const and safe to call concurrently.
class Fft2 {
public:
  Fft2(int nx, int ny);

  void apply(ArrayXcd& data, FftDirection dir) const;
  int nx() const { return nx_; }
  int ny() const { return ny_; }

private:
  struct Plan1d {
    int n = 0;
    std::vector<int> bitrev;
    std::vector<Complex> twiddle_fwd;  // per-stage packed roots of unity
    std::vector<Complex> twiddle_inv;
  };
  static Plan1d make_plan(int n);
  static void fft_strided(Complex* data, int stride, const Plan1d& plan, bool inverse);

  int nx_, ny_;
  Plan1d px_, py_;
  double scale_;
};

// Unitary transform of a whole field (returns a new field).
ComplexField fft2_unitary(const ComplexField& field, FftDirection direction);

}  // namespace spdc

#endif  // SPDC_FFT_HPP
