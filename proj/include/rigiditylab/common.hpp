#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace rigiditylab {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Thrown when a scenario or argument fails validation.  `where` is a
// slash-separated path to the offending field so the CLI can point at it.
struct ValidationError : std::runtime_error {
  std::string where;
  ValidationError(std::string where_, const std::string& what_)
      : std::runtime_error(what_ + " (at " + where_ + ")"), where(std::move(where_)) {}
};

// Thrown when a computation leaves its numerical domain (for example a
// matrix logarithm past the principal-branch cutoff).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Global worker count, settable from the CLI (--threads) or the
// RIGIDITYLAB_THREADS environment variable.  0 means "hardware concurrency".
inline int& thread_count() {
  static int n = 0;
  return n;
}

inline int effective_threads() {
  int n = thread_count();
  if (n <= 0) {
    unsigned hc = std::thread::hardware_concurrency();
    n = hc == 0 ? 1 : static_cast<int>(hc);
  }
  return n;
}

// Runs fn(i) for i in [0, n) across worker threads.  Results must be written
// to pre-sized slots indexed by i so the outcome never depends on scheduling.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  int workers = effective_threads();
  if (workers <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace rigiditylab
