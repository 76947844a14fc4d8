#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "rigiditylab/reps.hpp"
#include "rigiditylab/rng.hpp"

namespace rigiditylab {

// Vector in a graded module: (component index, coefficients) pairs with
// strictly ascending indices.
struct GradedVector {
  std::vector<std::pair<int, Vec>> comps;
};

inline void validate_graded_vector(const GradedModule& m, const GradedVector& v,
                                   const std::string& where = "vector") {
  int prev = -1;
  for (const auto& [j, coeffs] : v.comps) {
    if (j <= prev) throw ValidationError(where, "component indices must be strictly ascending");
    if (j < 0 || j >= static_cast<int>(m.components.size()))
      throw ValidationError(where, "component index outside the module");
    if (coeffs.size() != m.components[static_cast<std::size_t>(j)].rep.dim)
      throw ValidationError(where, "coefficient length does not match the component dimension");
    prev = j;
  }
}

// Graded Sobolev norm sqrt(sum_j (1+lambda_j)^k ||v_j||^2).
inline double sobolev_norm(const GradedModule& m, const GradedVector& v, int k) {
  double sum = 0.0;
  for (const auto& [j, coeffs] : v.comps) {
    double lam = m.components[static_cast<std::size_t>(j)].lambda;
    sum += std::pow(1.0 + lam, k) * coeffs.squaredNorm();
  }
  return std::sqrt(sum);
}

// Frequency band of an eigenvalue: floor(log(1+lambda)), with exact
// boundaries 1+lambda = e^(k+1) resolving upward into band k+1.
inline int band_index(double lambda) {
  return static_cast<int>(std::floor(std::log1p(lambda) + 1e-12));
}

struct BandDecomposition {
  std::map<int, std::vector<int>> bands;  // band -> component indices
};

inline BandDecomposition band_decompose(const GradedModule& m) {
  BandDecomposition out;
  for (std::size_t j = 0; j < m.components.size(); ++j)
    out.bands[band_index(m.components[j].lambda)].push_back(static_cast<int>(j));
  return out;
}

// Splits a graded vector along the module's bands.  Coefficients are moved
// verbatim, so reconstruct is an exact inverse.
inline std::map<int, GradedVector> band_split(const GradedModule& m, const GradedVector& v) {
  std::map<int, GradedVector> out;
  for (const auto& [j, coeffs] : v.comps)
    out[band_index(m.components[static_cast<std::size_t>(j)].lambda)].comps.emplace_back(j, coeffs);
  return out;
}

inline GradedVector band_reconstruct(const std::map<int, GradedVector>& bands) {
  std::vector<std::pair<int, Vec>> all;
  for (const auto& [band, part] : bands)
    all.insert(all.end(), part.comps.begin(), part.comps.end());
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  GradedVector out;
  out.comps = std::move(all);
  return out;
}

// sum_k e^(n k) ||f_k|| over the given per-band norms.
inline double sigma_seminorm(const std::vector<std::pair<int, double>>& band_norms, int n) {
  double sum = 0.0;
  for (const auto& [k, norm] : band_norms) sum += std::exp(static_cast<double>(n * k)) * norm;
  return sum;
}

struct FitPoint {
  double lambda = 0.0;
  double sigma = 0.0;
  bool trivial = false;
};

struct TameFit {
  double epsilon = 0.0;
  int alpha = 0;
  double slope = 0.0;   // log-log least-squares slope of sigma against lambda
  int slope_cap = 0;    // ceil(-slope), the alpha search bound
  std::vector<FitPoint> points;  // points that entered the fit
};

inline constexpr int kMaxTameAlpha = 16;

// Envelope fit of gap data: alpha is the smallest integer in [0, ceil(-slope)]
// whose envelope eps(alpha) = min_j sigma_j * max(lambda_j, 1)^alpha already
// attains the cap's envelope, and epsilon is that envelope value.
inline TameFit fit_tame_constants(const std::vector<FitPoint>& raw, bool only_nontrivial = true) {
  TameFit fit;
  for (const FitPoint& p : raw) {
    if (only_nontrivial && p.trivial) continue;
    if (!std::isfinite(p.sigma) || !(p.sigma > 0.0)) continue;
    fit.points.push_back(p);
  }
  if (fit.points.empty())
    throw ValidationError("points", "no usable gap points to fit");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const FitPoint& p : fit.points) {
    double x = std::log(std::max(p.lambda, 1.0));
    double y = std::log(p.sigma);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(fit.points.size());
  double var = sxx - sx * sx / n;
  fit.slope = var > 1e-12 ? (sxy - sx * sy / n) / var : 0.0;

  int cap = static_cast<int>(std::ceil(-fit.slope - 1e-12));
  cap = std::clamp(cap, 0, kMaxTameAlpha);
  fit.slope_cap = cap;

  auto envelope = [&](int alpha) {
    double env = kInf;
    for (const FitPoint& p : fit.points)
      env = std::min(env, p.sigma * std::pow(std::max(p.lambda, 1.0), alpha));
    return env;
  };
  double target = envelope(cap);
  fit.alpha = cap;
  for (int a = 0; a <= cap; ++a) {
    if (envelope(a) >= target) {
      fit.alpha = a;
      break;
    }
  }
  fit.epsilon = envelope(fit.alpha);
  return fit;
}

// Operator acting component by component on a graded family; the output of
// component j keeps the eigenvalue lambda_j (the grading is preserved even
// when the fiber dimension changes, as for the stacked difference maps).
using ComponentOperator = std::function<Vec(int, const Vec&)>;

inline ComponentOperator identity_op() {
  return [](int, const Vec& v) { return v; };
}

inline ComponentOperator multiply_lambda_op(const GradedModule& m) {
  return [&m](int j, const Vec& v) -> Vec {
    return (1.0 + m.components[static_cast<std::size_t>(j)].lambda) * v;
  };
}

// Stacks v - rho_j(gamma) v over the generators of component j.
inline ComponentOperator d0_op(const GradedModule& m) {
  return [&m](int j, const Vec& v) -> Vec {
    const UnitaryRep& rep = m.components[static_cast<std::size_t>(j)].rep;
    Vec out(static_cast<Eigen::Index>(rep.gens.size()) * rep.dim);
    for (std::size_t g = 0; g < rep.gens.size(); ++g)
      out.segment(static_cast<Eigen::Index>(g) * rep.dim, rep.dim) = v - rep.gens[g] * v;
    return out;
  };
}

struct ProbeReport {
  int degree = 0;
  bool tame_in_window = true;
  double slope = 0.0;                  // envelope slope of gain against log(1+lambda)
  std::map<int, double> constants;     // k -> observed max ||Lv||_k / ||v||_(k+degree)
  std::vector<double> component_gain;  // per component, at the plain norm
};

// Estimates the tameness degree of L over the family: per-component gains
// give a log-log slope s, the degree is the nearest integer to 2s (clamped to
// the window), and the constants are observed ratio maxima at that degree.
inline ProbeReport tame_degree_probe(const ComponentOperator& op, const GradedModule& m,
                                     int samples, int k_min, int k_max, int r_window,
                                     std::uint64_t seed) {
  if (k_max < k_min) std::swap(k_min, k_max);
  ProbeReport rep;
  Rng rng(seed);
  std::size_t nc = m.components.size();

  std::vector<GradedVector> probes;
  for (std::size_t j = 0; j < nc; ++j) {
    int d = m.components[j].rep.dim;
    double gain = 0.0;
    for (int s = 0; s < std::max(1, samples); ++s) {
      Vec v = s == 0 ? Vec(Vec::Unit(d, 0)) : rng.unit_vector(d);
      GradedVector gv;
      gv.comps.emplace_back(static_cast<int>(j), v);
      probes.push_back(gv);
      gain = std::max(gain, op(static_cast<int>(j), v).norm() / v.norm());
    }
    rep.component_gain.push_back(gain);
  }

  // Mixed probes exercise cross-component weighting in the Sobolev ratios.
  for (int s = 0; s < std::max(1, samples); ++s) {
    GradedVector gv;
    for (std::size_t j = 0; j < nc; ++j)
      gv.comps.emplace_back(static_cast<int>(j), Vec(rng.unit_vector(m.components[j].rep.dim)));
    probes.push_back(gv);
  }

  // Fit the gain slope on the upper half of the log(1+lambda) range: the
  // asymptotic degree lives in the tail, and a bounded operator whose gain
  // rises before saturating would otherwise read as fractional growth.
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < nc; ++j) {
    if (rep.component_gain[j] < 1e-14) continue;
    pts.emplace_back(std::log1p(m.components[j].lambda), std::log(rep.component_gain[j]));
  }
  if (pts.size() >= 2) {
    double xlo = pts.front().first, xhi = pts.front().first;
    for (const auto& [x, y] : pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
    }
    double cut = 0.5 * (xlo + xhi);
    std::vector<std::pair<double, double>> tail;
    for (const auto& p : pts)
      if (p.first >= cut) tail.push_back(p);
    if (tail.size() < 2) tail = pts;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : tail) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double n = static_cast<double>(tail.size());
    double var = sxx - sx * sx / n;
    rep.slope = var > 1e-12 ? (sxy - sx * sy / n) / var : 0.0;
  }

  long r = std::lround(2.0 * rep.slope);
  rep.tame_in_window = r <= r_window;
  rep.degree = static_cast<int>(std::clamp(r, 0l, static_cast<long>(r_window)));

  // The image keeps the input grading, so the same module weights both sides
  // even when fiber dimensions change.
  for (int k = k_min; k <= k_max; ++k) {
    double ck = 0.0;
    for (const GradedVector& gv : probes) {
      GradedVector image;
      for (const auto& [j, v] : gv.comps) image.comps.emplace_back(j, op(j, v));
      double denom = sobolev_norm(m, gv, k + rep.degree);
      if (denom < 1e-300) continue;
      ck = std::max(ck, sobolev_norm(m, image, k) / denom);
    }
    rep.constants[k] = ck;
  }
  return rep;
}

}  // namespace rigiditylab
