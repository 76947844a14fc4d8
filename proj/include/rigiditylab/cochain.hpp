#pragma once

#include "rigiditylab/reps.hpp"

namespace rigiditylab {

// Differentials of the presentation complex C^0 -> C^1 -> C^2 at a
// representation: C^0 = C^d, C^1 = C^(kd), C^2 = C^(rd).
struct CochainComplex {
  Mat d0;  // kd x d
  Mat d1;  // rd x kd
  int module_dim = 0;
  Presentation presentation;
};

// d0(v) stacks v - rho(gamma_j) v over the generators.
inline Mat build_d0(const Presentation& p, const UnitaryRep& rho) {
  int d = rho.dim;
  int k = p.generators;
  Mat d0(k * d, d);
  Mat id = Mat::Identity(d, d);
  for (int j = 0; j < k; ++j)
    d0.block(j * d, 0, d, d) = id - rho.gens[static_cast<std::size_t>(j)];
  return d0;
}

// Block (i, m) of d1 is the free-derivative of relator i with respect to
// generator m, evaluated through rho.
inline Mat build_d1(const Presentation& p, const UnitaryRep& rho) {
  int d = rho.dim;
  int k = p.generators;
  int r = static_cast<int>(p.relators.size());
  Mat d1 = Mat::Zero(r * d, k * d);
  for (int i = 0; i < r; ++i) {
    for (const FoxTerm& t : fox_terms(p.relators[static_cast<std::size_t>(i)])) {
      Mat term = static_cast<double>(t.sign) * eval_word(rho, t.prefix);
      d1.block(i * d, (t.generator - 1) * d, d, d) += term;
    }
  }
  return d1;
}

inline CochainComplex build_complex(const Presentation& p, const UnitaryRep& rho) {
  validate_presentation(p);
  if (rho.generator_count() != p.generators)
    throw ValidationError("rep/matrices", "generator count does not match the presentation");
  CochainComplex c;
  c.d0 = build_d0(p, rho);
  c.d1 = build_d1(p, rho);
  c.module_dim = rho.dim;
  c.presentation = p;
  return c;
}

struct CohomologyReport {
  int h0 = 0;
  int h1 = 0;
  int rank_d0 = 0;
  int rank_d1 = 0;
  double rank_tol = 0.0;
  // Set when a singular value sits within a factor 10 of the rank cut, i.e.
  // the reported dimensions are sensitive to rank_tol.
  bool near_threshold = false;
};

inline CohomologyReport cohomology_dims(const CochainComplex& c, double rank_tol = kDefaultRankTol) {
  CohomologyReport out;
  out.rank_tol = rank_tol;
  RankInfo r0 = svd_rank(c.d0, rank_tol);
  RankInfo r1 = svd_rank(c.d1, rank_tol);
  out.rank_d0 = r0.rank;
  out.rank_d1 = r1.rank;
  out.near_threshold = r0.near_threshold || r1.near_threshold;
  int d = c.module_dim;
  int kd = static_cast<int>(c.d0.rows());
  out.h0 = d - r0.rank;
  out.h1 = (kd - r1.rank) - r0.rank;
  return out;
}

struct SplitOperators {
  Mat D1;  // d x kd
  Mat D2;  // kd x rd
  double residual = 0.0;  // ||d0 D1 + D2 d1 - I|| on C^1
};

inline SplitOperators build_splitting(const CochainComplex& c, double rank_tol = kDefaultRankTol) {
  SplitOperators s;
  s.D1 = pinv(c.d0, rank_tol);
  s.D2 = pinv(c.d1, rank_tol);
  Eigen::Index kd = c.d0.rows();
  s.residual = op_norm(c.d0 * s.D1 + s.D2 * c.d1 - Mat::Identity(kd, kd));
  return s;
}

// Orthogonal projector onto ker(d1) intersect (im d0)^perp, obtained as the
// null space of the stacked map [d1; d0^H].
inline Mat harmonic_projector(const CochainComplex& c, double rank_tol = kDefaultRankTol) {
  Eigen::Index kd = c.d0.rows();
  Mat stack(c.d1.rows() + c.d0.cols(), kd);
  stack.topRows(c.d1.rows()) = c.d1;
  stack.bottomRows(c.d0.cols()) = c.d0.adjoint();
  return kernel_projector(stack, rank_tol);
}

}  // namespace rigiditylab
