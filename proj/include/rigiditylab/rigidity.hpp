#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "rigiditylab/cochain.hpp"
#include "rigiditylab/common.hpp"
#include "rigiditylab/linalg.hpp"
#include "rigiditylab/reps.hpp"
#include "rigiditylab/rng.hpp"
#include "rigiditylab/words.hpp"

namespace rigiditylab {

// Column-major reshape between d x d matrices and d^2 coordinate vectors.
// All cochain data for matrix-valued modules uses this layout.
inline Vec vec_mat(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unvec_mat(const Vec& v, int d) {
  if (v.size() != Eigen::Index(d) * d)
    throw ValidationError("vector", "length does not match a square matrix of the requested size");
  return Eigen::Map<const Mat>(v.data(), d, d);
}

// Conjugation action X -> U X U^H on d x d matrices, as a unitary rep on C^(d^2).
// vec(U X U^H) = (conj(U) (x) U) vec(X) in column-major layout.
inline UnitaryRep adjoint_rep(const UnitaryRep& rho) {
  UnitaryRep ad;
  ad.dim = rho.dim * rho.dim;
  ad.unitarity_tol = rho.unitarity_tol;
  ad.gens.reserve(rho.gens.size());
  for (const Mat& g : rho.gens)
    ad.gens.push_back(Eigen::kroneckerProduct(g.conjugate(), g));
  return ad;
}

// A tuple of unitary matrices indexed by the generators, with no requirement
// that the relators hold.  Inverse letters act by the adjoint.
struct ActionTuple {
  int dim = 0;
  std::vector<Mat> images;

  int generator_count() const { return int(images.size()); }
};

inline ActionTuple make_action(const UnitaryRep& rho) { return {rho.dim, rho.gens}; }

inline UnitaryRep action_rep(const ActionTuple& t) {
  UnitaryRep rho;
  rho.dim = t.dim;
  rho.gens = t.images;
  return rho;
}

inline double relator_residual(const Presentation& p, const ActionTuple& t) {
  if (t.generator_count() != p.generators)
    throw ValidationError("action/images", "image count does not match the presentation");
  UnitaryRep rho = action_rep(t);
  double worst = 0.0;
  for (const Word& w : p.relators)
    worst = std::max(worst, op_norm(eval_word(rho, w) - Mat::Identity(t.dim, t.dim)));
  return worst;
}

// One-parameter deformation t -> Exp(t phi_i Z0) pi(gamma_i).  With Z0 in the
// commutant and phi vanishing on the abelianized relators, every sample
// satisfies the relators exactly, so the family moves without leaving the
// space of actions.
struct DeformationFamily {
  Presentation presentation;
  ActionTuple base;
  Mat z0;
  std::vector<long> phi;

  ActionTuple sample(double t) const {
    ActionTuple out;
    out.dim = base.dim;
    out.images.reserve(base.images.size());
    for (std::size_t i = 0; i < base.images.size(); ++i)
      out.images.push_back(expm((t * double(phi[i])) * z0) * base.images[i]);
    return out;
  }
};

inline DeformationFamily deformation_family(const Presentation& p, const ActionTuple& base,
                                            const Mat& z0, const std::vector<long>& phi,
                                            double tol = 1e-12) {
  validate_presentation(p);
  if (base.generator_count() != p.generators)
    throw ValidationError("base/images", "image count does not match the presentation");
  if (z0.rows() != base.dim || z0.cols() != base.dim)
    throw ValidationError("z0", "direction must be square of the action dimension");
  if (int(phi.size()) != p.generators)
    throw ValidationError("phi", "one integer weight per generator is required");
  if (op_norm(z0 + z0.adjoint()) > tol)
    throw ValidationError("z0", "direction must be skew-hermitian");
  for (int i = 0; i < base.generator_count(); ++i)
    if (op_norm(z0 * base.images[i] - base.images[i] * z0) > tol)
      throw ValidationError("z0", "direction must commute with the image of generator " + std::to_string(i + 1));
  for (std::size_t r = 0; r < p.relators.size(); ++r) {
    std::vector<long> sums = exponent_sums(p.relators[r], p.generators);
    long pairing = 0;
    for (int i = 0; i < p.generators; ++i) pairing += sums[i] * phi[i];
    if (pairing != 0)
      throw ValidationError("phi", "weights do not vanish on relator " + std::to_string(r + 1) +
                                       " in abelianization");
  }
  return {p, base, z0, phi};
}

enum class PerturbMode { planted, centralizer, raw };

namespace detail {

// Smallest integer weight vector (by l1 norm, ties broken toward the
// lexicographically largest, so (1,0,..) beats (0,1,..) and (-1,0,..))
// vanishing on all abelianized relators.  Entries are searched in [-3, 3];
// a kernel that needs larger entries is out of scope for a test generator.
inline std::vector<long> centralizer_weights(const Presentation& p) {
  std::vector<std::vector<long>> sums;
  sums.reserve(p.relators.size());
  for (const Word& w : p.relators) sums.push_back(exponent_sums(w, p.generators));
  const int k = p.generators;
  std::vector<long> best;
  long best_l1 = std::numeric_limits<long>::max();
  std::vector<long> cand(k, -3);
  for (;;) {
    bool zero = true;
    for (long v : cand) zero = zero && v == 0;
    if (!zero) {
      bool kills = true;
      for (const auto& s : sums) {
        long pairing = 0;
        for (int i = 0; i < k; ++i) pairing += s[i] * cand[i];
        kills = kills && pairing == 0;
      }
      if (kills) {
        long l1 = 0;
        for (long v : cand) l1 += std::abs(v);
        if (l1 < best_l1 || (l1 == best_l1 && cand > best)) {
          best = cand;
          best_l1 = l1;
        }
      }
    }
    int pos = k - 1;
    while (pos >= 0 && cand[pos] == 3) cand[pos--] = -3;
    if (pos < 0) break;
    ++cand[pos];
  }
  if (best.empty())
    throw NumericalError("perturb_action: no centralizer weights vanish on the relators");
  return best;
}

// Random skew-hermitian element of the commutant of the images, unit operator
// norm.  vec(gZ - Zg) = (I (x) g - g^T (x) I) vec(Z), so the commutant is the
// kernel of those blocks stacked over the generators.
inline Mat commutant_direction(const ActionTuple& base, Rng& rng) {
  const int d = base.dim;
  const int k = base.generator_count();
  Mat stacked(Eigen::Index(k) * d * d, Eigen::Index(d) * d);
  Mat eye = Mat::Identity(d, d);
  for (int i = 0; i < k; ++i)
    stacked.block(Eigen::Index(i) * d * d, 0, Eigen::Index(d) * d, Eigen::Index(d) * d) =
        Eigen::kroneckerProduct(eye, base.images[i]) -
        Eigen::kroneckerProduct(base.images[i].transpose(), eye);
  Mat proj = kernel_projector(stacked);
  Mat z = unvec_mat(proj * vec_mat(rng.gaussian_matrix(d, d)), d);
  z = 0.5 * (z - z.adjoint());
  double norm = op_norm(z);
  if (norm < 1e-12)
    throw NumericalError("perturb_action: sampled commutant direction is numerically zero");
  return z / norm;
}

}  // namespace detail

// Test-case generator.  planted conjugates by a single Exp(X) with
// ||X||_2 = magnitude, so the relators survive exactly; centralizer samples a
// deformation family through the base point; raw left-multiplies each image
// by an independent Exp(X_i) and generically breaks the relators.
inline ActionTuple perturb_action(const Presentation& p, const ActionTuple& base, PerturbMode mode,
                                  double magnitude, std::uint64_t seed) {
  if (base.generator_count() != p.generators)
    throw ValidationError("base/images", "image count does not match the presentation");
  if (!(magnitude >= 0.0))
    throw ValidationError("magnitude", "perturbation size must be nonnegative");
  if (magnitude == 0.0) return base;
  Rng rng(seed);
  const int d = base.dim;
  switch (mode) {
    case PerturbMode::planted: {
      Mat x = rng.skew_hermitian(d);
      x *= magnitude / op_norm(x);
      Mat e = expm(x);
      ActionTuple out;
      out.dim = d;
      out.images.reserve(base.images.size());
      for (const Mat& g : base.images) out.images.push_back(e * g * e.adjoint());
      return out;
    }
    case PerturbMode::centralizer: {
      std::vector<long> phi = detail::centralizer_weights(p);
      Mat z0 = detail::commutant_direction(base, rng);
      return deformation_family(p, base, z0, phi).sample(magnitude);
    }
    case PerturbMode::raw: {
      ActionTuple out;
      out.dim = d;
      out.images.reserve(base.images.size());
      for (const Mat& g : base.images) {
        Mat x = rng.skew_hermitian(d);
        x *= magnitude / op_norm(x);
        out.images.push_back(expm(x) * g);
      }
      return out;
    }
  }
  throw ValidationError("mode", "unknown perturbation mode");
}

// The adjoint-module cochain complex at a base action, with its splitting and
// harmonic projector.  Everything downstream of the Newton solver reuses this
// single precomputation; the base point never moves during iteration.
struct AdjointComplex {
  UnitaryRep rep;
  CochainComplex complex;
  SplitOperators split;
  Mat harmonic;
  double rank_tol = kDefaultRankTol;
};

inline AdjointComplex build_adjoint_complex(const Presentation& p, const ActionTuple& base,
                                            double rank_tol = kDefaultRankTol) {
  AdjointComplex ac;
  ac.rep = adjoint_rep(action_rep(base));
  ac.complex = build_complex(p, ac.rep);
  ac.split = build_splitting(ac.complex, rank_tol);
  ac.harmonic = harmonic_projector(ac.complex, rank_tol);
  ac.rank_tol = rank_tol;
  return ac;
}

namespace detail {

// Log of the right-translated residuals c_i = Log(target_i base_i^H).  The
// chart refuses eigenvalues near the branch cut, where the local conjugacy
// problem is ill-posed.
inline std::vector<Mat> log_residuals(const ActionTuple& base, const ActionTuple& target) {
  if (base.dim != target.dim || base.generator_count() != target.generator_count())
    throw ValidationError("target", "actions must share dimension and generator count");
  std::vector<Mat> cs;
  cs.reserve(base.images.size());
  for (std::size_t i = 0; i < base.images.size(); ++i) {
    try {
      cs.push_back(log_unitary(target.images[i] * base.images[i].adjoint()));
    } catch (const NumericalError&) {
      throw NumericalError("perturbation too large for the logarithmic chart (generator " +
                           std::to_string(i + 1) + ")");
    }
  }
  return cs;
}

inline Vec stack_cochain(const std::vector<Mat>& cs) {
  const Eigen::Index d2 = cs.empty() ? 0 : cs.front().size();
  Vec v(Eigen::Index(cs.size()) * d2);
  for (std::size_t i = 0; i < cs.size(); ++i) v.segment(Eigen::Index(i) * d2, d2) = vec_mat(cs[i]);
  return v;
}

}  // namespace detail

struct ObstructionReport {
  Vec harmonic;
  double norm = 0.0;
};

// Harmonic part of the log-residual cochain.  Zero (up to tolerance) exactly
// when the first-order conjugacy equation d0 v = c is solvable.
inline ObstructionReport obstruction_class(const Presentation& p, const ActionTuple& base,
                                           const ActionTuple& target,
                                           double rank_tol = kDefaultRankTol) {
  AdjointComplex ac = build_adjoint_complex(p, base, rank_tol);
  Vec c = detail::stack_cochain(detail::log_residuals(base, target));
  ObstructionReport out;
  out.harmonic = ac.harmonic * c;
  out.norm = out.harmonic.norm();
  return out;
}

struct NewtonOptions {
  int max_iter = 30;
  double tol = 1e-10;
  double rank_tol = kDefaultRankTol;
  // Relator residual above which the target is flagged as a non-action; the
  // solver then only solves the equation projected to the action directions.
  double action_tol = 1e-8;
};

struct ConjugacyResult {
  Mat u;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
  double obstruction = 0.0;
  bool projected_only = false;
  double action_residual = 0.0;
};

// Newton iteration for the conjugacy equation u base(.) u^H = target(.).
// Each step solves the linearized equation d0 v = c through the splitting of
// the fixed base complex, then pulls the target back by Exp(v); the
// conjugator accumulates on the right so that on convergence the composite
// maps base onto the original target.  A nonzero harmonic component of c is
// invisible to the step and is reported as the obstruction.
inline ConjugacyResult weil_newton(const Presentation& p, const ActionTuple& base,
                                   const ActionTuple& target, NewtonOptions opts = {}) {
  validate_presentation(p);
  if (base.generator_count() != p.generators)
    throw ValidationError("base/images", "image count does not match the presentation");
  if (relator_residual(p, base) > opts.action_tol)
    throw ValidationError("base", "base tuple is not an action within tolerance");
  if (opts.max_iter < 0) throw ValidationError("max_iter", "iteration budget must be nonnegative");
  if (!(opts.tol > 0.0)) throw ValidationError("tol", "stopping tolerance must be positive");

  const int d = base.dim;
  AdjointComplex ac = build_adjoint_complex(p, base, opts.rank_tol);

  ConjugacyResult res;
  res.action_residual = relator_residual(p, target);
  res.projected_only = res.action_residual > opts.action_tol;
  res.u = Mat::Identity(d, d);

  ActionTuple current = target;
  Vec cvec;
  for (;;) {
    std::vector<Mat> cs = detail::log_residuals(base, current);
    double r = 0.0;
    for (const Mat& c : cs) r = std::max(r, op_norm(c));
    res.history.push_back(r);
    cvec = detail::stack_cochain(cs);
    if (r <= opts.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opts.max_iter) break;
    Mat v = unvec_mat(ac.split.D1 * cvec, d);
    v = 0.5 * (v - v.adjoint());
    Mat e = expm(v);
    for (Mat& g : current.images) g = e.adjoint() * g * e;
    res.u = res.u * e;
    ++res.iterations;
  }
  res.obstruction = (ac.harmonic * cvec).norm();
  return res;
}

struct ExpProbeRow {
  double t = 0.0;
  double bch = 0.0;
  double dq = 0.0;
  double equivariance = 0.0;
  double twisted = 0.0;
};

struct ExpLemmaReport {
  std::vector<ExpProbeRow> rows;
  double slope_bch = 0.0;
  double slope_dq = 0.0;
  double slope_twisted = 0.0;
  double max_equivariance = 0.0;
};

// Residuals below this are rounding noise and are excluded from slope fits.
inline constexpr double kSlopeFloor = 1e-13;

inline std::vector<double> default_probe_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(std::pow(10.0, -1.0 - 0.25 * i));
  return grid;
}

namespace detail {

// Least-squares slope of log residual against log t over measurable rows.
// All rows at rounding noise mean the residual vanishes faster than any
// measurable power, reported as an infinite slope.
inline double fit_slope(const std::vector<double>& ts, const std::vector<double>& vals) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (vals[i] > kSlopeFloor) {
      xs.push_back(std::log(ts[i]));
      ys.push_back(std::log(vals[i]));
    }
  }
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

}  // namespace detail

// Scaling probes for the exponential chart:
//   (a) ||Exp(tX)Exp(tY) - Exp(t(X+Y))||, quadratic in t with leading term
//       driven by [X, Y];
//   (b) ||(Exp(tX) - I)/t - X||, linear in t;
//   (c) conjugation equivariance under a unitary phi, zero up to rounding;
//   (c') the same comparison against the twisted chart M -> Exp(M + M C M),
//       which agrees with Exp only to first order, so the gap is quadratic.
inline ExpLemmaReport exp_lemma_probe(const Mat& x, const Mat& y, const Mat& phi, const Mat& twist,
                                      const std::vector<double>& t_grid) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows())
    throw ValidationError("x", "probe arguments must be square matrices of one size");
  if (phi.rows() != x.rows() || phi.cols() != x.cols() || twist.rows() != x.rows() ||
      twist.cols() != x.cols())
    throw ValidationError("phi", "conjugator and twist must match the argument size");
  if (op_norm(x + x.adjoint()) > 1e-10 || op_norm(y + y.adjoint()) > 1e-10)
    throw ValidationError("x", "probe arguments must be skew-hermitian");
  if (op_norm(phi * phi.adjoint() - Mat::Identity(phi.rows(), phi.cols())) > 1e-10)
    throw ValidationError("phi", "conjugator must be unitary");
  if (t_grid.empty()) throw ValidationError("t_grid", "at least one scale is required");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0)) throw ValidationError("t_grid", "scales must be positive");
    if (i > 0 && !(t_grid[i] < t_grid[i - 1]))
      throw ValidationError("t_grid", "scales must be strictly decreasing");
  }

  const Mat eye = Mat::Identity(x.rows(), x.cols());
  ExpLemmaReport report;
  std::vector<double> bch, dq, tw;
  for (double t : t_grid) {
    ExpProbeRow row;
    row.t = t;
    Mat ex = expm(t * x);
    row.bch = op_norm(ex * expm(t * y) - expm(t * (x + y)));
    row.dq = op_norm((ex - eye) / t - x);
    Mat conj_arg = phi * (t * x) * phi.adjoint();
    row.equivariance = op_norm(phi * ex * phi.adjoint() - expm(conj_arg));
    Mat m = t * x;
    row.twisted = op_norm(ex - expm(m + m * twist * m));
    report.rows.push_back(row);
    bch.push_back(row.bch);
    dq.push_back(row.dq);
    tw.push_back(row.twisted);
    report.max_equivariance = std::max(report.max_equivariance, row.equivariance);
  }
  report.slope_bch = detail::fit_slope(t_grid, bch);
  report.slope_dq = detail::fit_slope(t_grid, dq);
  report.slope_twisted = detail::fit_slope(t_grid, tw);
  return report;
}

}  // namespace rigiditylab
