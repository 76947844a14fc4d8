#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rigiditylab/common.hpp"

namespace rigiditylab {

// Deterministic sampling on top of the mt19937_64 stream.  The standard pins
// the raw engine output bit-for-bit, but not the distribution adaptors, so
// everything downstream of the engine is spelled out here by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], both ends included.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
  }

  // Standard normal via Box-Muller.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  // Standard complex normal (unit variance overall).
  cx gaussian_cx() {
    double re = gaussian();
    double im = gaussian();
    return cx(re, im) / std::sqrt(2.0);
  }

  Mat gaussian_matrix(int rows, int cols) {
    Mat g(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) g(i, j) = gaussian_cx();
    return g;
  }

  // Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
  // diagonal folded into Q.
  Mat haar_unitary(int d) {
    Mat g = gaussian_matrix(d, d);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
      cx rv = r(j, j);
      cx phase = std::abs(rv) > 0 ? rv / std::abs(rv) : cx(1, 0);
      q.col(j) *= phase;
    }
    return q;
  }

  // Random skew-hermitian matrix, entries O(1).
  Mat skew_hermitian(int d) {
    Mat g = gaussian_matrix(d, d);
    return 0.5 * (g - g.adjoint());
  }

  Vec unit_vector(int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = gaussian_cx();
    double n = v.norm();
    while (n == 0.0) {
      for (int i = 0; i < d; ++i) v(i) = gaussian_cx();
      n = v.norm();
    }
    return v / n;
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rigiditylab
