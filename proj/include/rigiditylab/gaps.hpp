#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rigiditylab/cochain.hpp"
#include "rigiditylab/reps.hpp"
#include "rigiditylab/s3grid.hpp"
#include "rigiditylab/tame.hpp"
#include "rigiditylab/words.hpp"

namespace rigiditylab {

struct GapEntry {
  double lambda = 0.0;
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  int witness = 0;       // generator attaining the gap on the minimizing vector
  double lambda_plus_min_q = 0.0;
  int invariant_dim = 0;  // dimension of the excluded common fixed space
};

// Sandwich bounds for min over unit v (orthogonal to the common fixed space)
// of max_gamma ||v - rho(gamma) v||, from the smallest nonzero eigenvalue of
// Q = sum (I - rho)^H (I - rho):
//   delta_lo = sqrt(lambda_min+ / |S|),  delta_hi = min(2, sqrt(lambda_min+)).
inline GapEntry generator_gap_bounds(const UnitaryRep& rho, double rank_tol = kDefaultRankTol) {
  if (rho.gens.empty()) throw ValidationError("rep", "no generators");
  if (rep_is_trivial(rho)) throw ValidationError("rep", "trivial module");
  int d = rho.dim;
  Mat q = Mat::Zero(d, d);
  Mat id = Mat::Identity(d, d);
  for (const Mat& g : rho.gens) {
    Mat diff = id - g;
    q += diff.adjoint() * diff;
  }
  HermitianSpectrum spec = hermitian_spectrum(q, rank_tol);
  GapEntry e;
  e.invariant_dim = spec.kernel_dim;
  if (spec.plus_min_index < 0)
    throw ValidationError("rep", "trivial module");
  e.lambda_plus_min_q = spec.lambda_plus_min;
  double s = static_cast<double>(rho.gens.size());
  e.delta_lo = std::sqrt(spec.lambda_plus_min / s);
  e.delta_hi = std::min(2.0, std::sqrt(spec.lambda_plus_min));
  Vec v = spec.eigenvectors.col(spec.plus_min_index);
  double best = -1.0;
  for (std::size_t g = 0; g < rho.gens.size(); ++g) {
    double r = (v - rho.gens[g] * v).norm();
    if (r > best) {
      best = r;
      e.witness = static_cast<int>(g);
    }
  }
  return e;
}

struct SweepRow {
  double spin = 0.0;
  double lambda = 0.0;
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  int witness = 0;
};

struct DolgopyatReport {
  std::vector<SweepRow> rows;
  double eps0 = kInf;  // min over rows of delta_lo * log(1+lambda)^4
  bool gap_failure = false;
  double rank_tol = kDefaultRankTol;
};

// Gap bounds for every SU(2) irreducible of spin 1/2 .. max_spin on the given
// rotations, with the fourth-power log envelope constant.
inline DolgopyatReport dolgopyat_sweep(const std::vector<AxisAngle>& rotations, double max_spin,
                                       double rank_tol = kDefaultRankTol) {
  if (rotations.size() < 2)
    throw ValidationError("rotations", "at least two rotations are required");
  DolgopyatReport rep;
  rep.rank_tol = rank_tol;
  su2_irrep(0.5, rotations);  // validate axes before entering worker threads
  int n = static_cast<int>(std::floor(2.0 * max_spin + 1e-9));
  if (n < 1) return rep;
  rep.rows.resize(static_cast<std::size_t>(n));
  parallel_for(n, [&](std::int64_t i) {
    double spin = 0.5 * static_cast<double>(i + 1);
    Su2Irrep irr = su2_irrep(spin, rotations);
    SweepRow row;
    row.spin = spin;
    row.lambda = irr.lambda;
    try {
      GapEntry e = generator_gap_bounds(irr.rep, rank_tol);
      row.delta_lo = e.delta_lo;
      row.delta_hi = e.delta_hi;
      row.witness = e.witness;
    } catch (const ValidationError&) {
      row.delta_lo = row.delta_hi = 0.0;
    }
    rep.rows[static_cast<std::size_t>(i)] = row;
  });
  for (const SweepRow& row : rep.rows) {
    if (!(row.delta_lo > 0.0)) rep.gap_failure = true;
    double env = row.delta_lo * std::pow(std::log1p(row.lambda), 4.0);
    rep.eps0 = std::min(rep.eps0, env);
  }
  return rep;
}

struct NetReport {
  int radius = 0;
  std::size_t ball_size = 0;
  double eps_hat = 0.0;
  double probe_bias = 0.0;
};

// Covering radius of a point set in SU(2): the farthest probe-grid point from
// the set, biased by at most the probe mesh width.
inline NetReport covering_radius(const std::vector<Quat>& points,
                                 int probe_size = kDefaultProbeSize) {
  if (points.empty()) throw ValidationError("points", "empty point set");
  NetReport rep;
  rep.ball_size = points.size();
  rep.probe_bias = probe_mesh_bound(probe_size);

  Eigen::Matrix<double, 4, Eigen::Dynamic> pts(4, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    pts.col(static_cast<Eigen::Index>(i)) << points[i].w, points[i].x, points[i].y, points[i].z;

  const std::vector<Quat> probes = super_fibonacci(probe_size);
  constexpr int kChunk = 4096;
  int chunks = (probe_size + kChunk - 1) / kChunk;
  std::vector<double> chunk_min_dot(static_cast<std::size_t>(chunks), 1.0);
  parallel_for(chunks, [&](std::int64_t c) {
    int lo = static_cast<int>(c) * kChunk;
    int hi = std::min(probe_size, lo + kChunk);
    Eigen::Matrix<double, 4, Eigen::Dynamic> block(4, hi - lo);
    for (int i = lo; i < hi; ++i) {
      const Quat& q = probes[static_cast<std::size_t>(i)];
      block.col(i - lo) << q.w, q.x, q.y, q.z;
    }
    // Per probe, the nearest input point maximizes the inner product.
    Eigen::MatrixXd dots = pts.transpose() * block;
    double worst = 1.0;
    for (Eigen::Index j = 0; j < dots.cols(); ++j)
      worst = std::min(worst, dots.col(j).maxCoeff());
    chunk_min_dot[static_cast<std::size_t>(c)] = worst;
  });
  double min_dot = 1.0;
  for (double v : chunk_min_dot) min_dot = std::min(min_dot, v);
  rep.eps_hat = std::acos(std::clamp(min_dot, -1.0, 1.0));
  return rep;
}

struct NetGrowthReport {
  std::vector<NetReport> rows;   // one per radius 0..n_max
  double fit_constant = 0.0;     // slope of n against log(1/eps)^4 through 0
  double dedup_tol = 1e-9;
  int probe_size = kDefaultProbeSize;
};

// Word-ball nets in SU(2) for the spin-1/2 image of the given rotations:
// enumerates balls of radius 0..n_max, deduplicates elements within
// dedup_tol, and measures each covering radius on the shared probe grid.
inline NetGrowthReport net_growth_experiment(const std::vector<AxisAngle>& rotations, int n_max,
                                             int probe_size = kDefaultProbeSize,
                                             double dedup_tol = 1e-9) {
  if (rotations.empty()) throw ValidationError("rotations", "empty generator list");
  if (n_max < 0) throw ValidationError("radius", "radius must be nonnegative");
  NetGrowthReport rep;
  rep.dedup_tol = dedup_tol;
  rep.probe_size = probe_size;
  UnitaryRep rho = su2_irrep(0.5, rotations).rep;
  int k = rho.generator_count();

  std::vector<Quat> points;
  Eigen::Matrix<double, 4, Eigen::Dynamic> pts(4, 64);
  Eigen::Index used = 0;
  auto try_add = [&](const Quat& q) {
    Eigen::Vector4d col(q.w, q.x, q.y, q.z);
    if (used > 0) {
      double best = (pts.leftCols(used).transpose() * col).maxCoeff();
      if (std::acos(std::clamp(best, -1.0, 1.0)) < dedup_tol) return false;
    }
    if (used == pts.cols()) pts.conservativeResize(Eigen::NoChange, 2 * pts.cols());
    pts.col(used++) = col;
    points.push_back(q);
    return true;
  };

  std::vector<Mat> frontier = {Mat::Identity(2, 2)};
  try_add(quat_from_su2(frontier[0]));
  const std::vector<int> letters = letter_order(k);
  std::vector<Word> frontier_words = {Word{}};

  for (int radius = 0; radius <= n_max; ++radius) {
    if (radius > 0) {
      std::vector<Mat> next;
      std::vector<Word> next_words;
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        for (int letter : letters) {
          const Word& w = frontier_words[i];
          if (!w.empty() && w.back() == -letter) continue;
          std::size_t g = static_cast<std::size_t>(std::abs(letter)) - 1;
          Mat m = letter > 0 ? Mat(frontier[i] * rho.gens[g])
                             : Mat(frontier[i] * rho.gens[g].adjoint());
          try_add(quat_from_su2(m));
          Word cw = w;
          cw.push_back(letter);
          next.push_back(std::move(m));
          next_words.push_back(std::move(cw));
        }
      }
      frontier = std::move(next);
      frontier_words = std::move(next_words);
    }
    NetReport row = covering_radius(points, probe_size);
    row.radius = radius;
    rep.rows.push_back(row);
  }

  // n = C log(1/eps)^4 through the origin, over rows that made it below 1.
  double sxy = 0.0, sxx = 0.0;
  for (const NetReport& row : rep.rows) {
    if (!(row.eps_hat < 1.0) || !(row.eps_hat > 0.0)) continue;
    double x = std::pow(std::log(1.0 / row.eps_hat), 4.0);
    sxy += x * static_cast<double>(row.radius);
    sxx += x * x;
  }
  rep.fit_constant = sxx > 0.0 ? sxy / sxx : 0.0;
  return rep;
}

struct AveragingCertificate {
  std::vector<Word> words;
  double eta = 1.0;             // min pairwise gap hypothesis
  double sigma_plus_min = kInf; // brute smallest nonzero singular value of A
  bool pass = false;            // sigma_plus_min >= eta - 1e-8
  std::vector<double> pair_gaps;
  // Diagnostic variant: pairs drawn from the word images together with -I,
  // capped at 1.  Strictly smaller hypothesis, kept alongside for analysis.
  double eta_augmented = 1.0;
  bool pass_augmented = false;
};

inline constexpr double kAveragingSlack = 1e-8;

// Lower-bound certificate for the averaging operator A = sum_j rho(gamma_j):
// eta is the smallest spectral gap among the relative rotations
// rho(gamma_i^-1 gamma_j), and the pass flag compares it against the true
// smallest nonzero singular value of A.
inline AveragingCertificate averaging_lower_bound(const UnitaryRep& rho,
                                                  const std::vector<Word>& words,
                                                  double rank_tol = kDefaultRankTol) {
  if (words.empty()) throw ValidationError("words", "empty word list");
  AveragingCertificate cert;
  cert.words = words;

  std::vector<Mat> images;
  images.reserve(words.size());
  for (const Word& w : words) images.push_back(eval_word(rho, w));

  Mat a = Mat::Zero(rho.dim, rho.dim);
  for (const Mat& u : images) a += u;
  cert.sigma_plus_min = sigma_min_nonzero(a, rank_tol);

  if (words.size() == 1) {
    cert.eta = 1.0;
    cert.eta_augmented = 1.0;
    cert.pass = cert.pass_augmented = true;
    return cert;
  }

  double eta = kInf;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      double g = unitary_gap(images[i].adjoint() * images[j]);
      cert.pair_gaps.push_back(g);
      if (g < eta) eta = g;
    }
  }
  // Pairs whose relative rotation is the identity carry no hypothesis; when
  // every pair is like that, fall back to the single-word convention.
  cert.eta = std::isfinite(eta) ? eta : 1.0;
  cert.pass = cert.sigma_plus_min >= cert.eta - kAveragingSlack;

  double aug = std::min(eta, 1.0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    aug = std::min(aug, unitary_gap(Mat(-images[i])));
    for (std::size_t j = i + 1; j < images.size(); ++j)
      aug = std::min(aug, unitary_gap(Mat(-(images[i].adjoint() * images[j]))));
  }
  cert.eta_augmented = std::isfinite(aug) ? aug : 1.0;
  cert.pass_augmented = cert.sigma_plus_min >= cert.eta_augmented - kAveragingSlack;
  return cert;
}

struct DiophantineRow {
  int alpha = 0;
  double eps = kInf;
  std::vector<long> minimizer;
};

struct DiophantineReport {
  std::vector<DiophantineRow> rows;  // alpha = 0 .. alpha_max
  long excluded = 0;                 // weights with <theta, l> integral
  long scanned = 0;
  int weight_bound = 0;
};

// Exhaustive diophantine gap scan: over integer weights 0 < ||l||_inf <= L
// with <theta, l> not an integer (within 1e-12), minimize
// |e^(2 pi i <theta,l>) - 1| * ||l||_2^alpha for each alpha.
inline DiophantineReport torus_gap_scan(const std::vector<double>& theta, int weight_bound,
                                        int alpha_max = 4) {
  if (theta.empty()) throw ValidationError("theta", "empty torus element");
  for (double t : theta)
    if (!(t >= 0.0) || t >= 1.0)
      throw ValidationError("theta", "angles must lie in [0, 1)");
  if (weight_bound < 1) throw ValidationError("weight_bound", "weight bound must be at least 1");
  if (alpha_max < 0) throw ValidationError("alpha", "alpha must be nonnegative");
  std::size_t m = theta.size();
  double total = std::pow(2.0 * weight_bound + 1.0, static_cast<double>(m));
  if (total > 2e7)
    throw ValidationError("weight_bound", "scan too large for this torus dimension");

  DiophantineReport rep;
  rep.weight_bound = weight_bound;
  rep.rows.resize(static_cast<std::size_t>(alpha_max) + 1);
  for (int a = 0; a <= alpha_max; ++a) rep.rows[static_cast<std::size_t>(a)].alpha = a;

  std::vector<long> l(m, -static_cast<long>(weight_bound));
  bool done = false;
  while (!done) {
    bool zero = true;
    for (long v : l)
      if (v != 0) {
        zero = false;
        break;
      }
    if (!zero) {
      ++rep.scanned;
      double pairing = 0.0;
      double norm2 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        pairing += theta[i] * static_cast<double>(l[i]);
        norm2 += static_cast<double>(l[i]) * static_cast<double>(l[i]);
      }
      double frac = std::abs(pairing - std::round(pairing));
      if (frac <= 1e-12) {
        ++rep.excluded;
      } else {
        double gap = 2.0 * std::abs(std::sin(kPi * pairing));
        double norm = std::sqrt(norm2);
        double factor = 1.0;
        for (int a = 0; a <= alpha_max; ++a) {
          double val = gap * factor;
          DiophantineRow& row = rep.rows[static_cast<std::size_t>(a)];
          if (val < row.eps) {
            row.eps = val;
            row.minimizer = l;
          }
          factor *= norm;
        }
      }
    }
    // odometer over [-L, L]^m
    std::size_t pos = 0;
    while (pos < m) {
      if (l[pos] < weight_bound) {
        ++l[pos];
        break;
      }
      l[pos] = -static_cast<long>(weight_bound);
      ++pos;
    }
    done = pos == m;
  }
  return rep;
}

}  // namespace rigiditylab
