#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "rigiditylab/linalg.hpp"
#include "rigiditylab/words.hpp"

namespace rigiditylab {

struct UnitaryRep {
  int dim = 0;
  std::vector<Mat> gens;
  double unitarity_tol = 1e-10;

  int generator_count() const { return static_cast<int>(gens.size()); }
};

// Product of generator matrices per the letters of w; inverse letters use the
// conjugate transpose (exact inverse within unitarity_tol).  Empty word -> I.
inline Mat eval_word(const UnitaryRep& rho, const Word& w) {
  Mat m = Mat::Identity(rho.dim, rho.dim);
  for (int letter : w) {
    int g = std::abs(letter) - 1;
    if (g < 0 || g >= rho.generator_count())
      throw ValidationError("word", "letter outside the generator range");
    if (letter > 0)
      m = m * rho.gens[static_cast<std::size_t>(g)];
    else
      m = m * rho.gens[static_cast<std::size_t>(g)].adjoint();
  }
  return m;
}

struct RepCheck {
  double max_unitarity = 0.0;
  std::vector<double> relator_residuals;
  double max_relator = 0.0;
  bool pass = false;
  double tol = 0.0;
};

// Unitarity and relator residuals of rho against P, pass/fail at tol.
inline RepCheck check_rep(const Presentation& p, const UnitaryRep& rho, double tol = 1e-10) {
  validate_presentation(p);
  if (rho.generator_count() != p.generators)
    throw ValidationError("rep/matrices", "generator count does not match the presentation");
  RepCheck out;
  out.tol = tol;
  Mat id = Mat::Identity(rho.dim, rho.dim);
  for (const Mat& g : rho.gens) {
    if (g.rows() != rho.dim || g.cols() != rho.dim)
      throw ValidationError("rep/matrices", "generator matrix dimension mismatch");
    out.max_unitarity = std::max(out.max_unitarity, op_norm(g.adjoint() * g - id));
  }
  for (const Word& w : p.relators) {
    double r = op_norm(eval_word(rho, w) - id);
    out.relator_residuals.push_back(r);
    out.max_relator = std::max(out.max_relator, r);
  }
  out.pass = out.max_unitarity <= tol && out.max_relator <= tol;
  return out;
}

struct AxisAngle {
  std::array<double, 3> axis{0.0, 0.0, 1.0};
  double angle = 0.0;
};

// Angular-momentum triple (Jx, Jy, Jz) for the given spin, basis ordered by
// descending weight m = j, j-1, ..., -j.
inline std::array<Mat, 3> angular_momentum(double spin) {
  int n = static_cast<int>(std::lround(2.0 * spin)) + 1;
  Mat jz = Mat::Zero(n, n);
  Mat jplus = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double m = spin - i;
    jz(i, i) = m;
    if (i >= 1) jplus(i - 1, i) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
  }
  Mat jminus = jplus.transpose();
  Mat jx = 0.5 * (jplus + jminus);
  Mat jy = cx(0.0, -0.5) * (jplus - jminus);
  return {jx, jy, jz};
}

struct Su2Irrep {
  UnitaryRep rep;
  double spin = 0.0;
  double lambda = 0.0;
};

// Irreducible SU(2) representation of the given half-integer spin; each
// rotation (axis, angle) maps to exp(-i * angle * (axis . J)).
inline Su2Irrep su2_irrep(double spin, const std::vector<AxisAngle>& rotations) {
  double twice = 2.0 * spin;
  if (spin < 0.0 || std::abs(twice - std::lround(twice)) > 1e-9)
    throw ValidationError("rep/spin", "spin must be a nonnegative half-integer");
  Su2Irrep out;
  out.spin = spin;
  out.lambda = spin * (spin + 1.0);
  int n = static_cast<int>(std::lround(twice)) + 1;
  auto j = angular_momentum(spin);
  out.rep.dim = n;
  out.rep.unitarity_tol = 1e-10;
  for (std::size_t r = 0; r < rotations.size(); ++r) {
    const auto& aa = rotations[r];
    double len = std::sqrt(aa.axis[0] * aa.axis[0] + aa.axis[1] * aa.axis[1] +
                           aa.axis[2] * aa.axis[2]);
    if (std::abs(len - 1.0) > 1e-6)
      throw ValidationError("rotations/" + std::to_string(r) + "/axis",
                            "axis must be a unit vector");
    Mat h = (aa.axis[0] / len) * j[0] + (aa.axis[1] / len) * j[1] + (aa.axis[2] / len) * j[2];
    out.rep.gens.push_back(expm(cx(0.0, -aa.angle) * h));
  }
  return out;
}

// One-dimensional character of a torus element: the single generator acts by
// exp(2*pi*i*<theta, l>).
inline UnitaryRep torus_weight_rep(const std::vector<double>& theta, const std::vector<long>& weight) {
  if (theta.size() != weight.size())
    throw ValidationError("rep/weight", "weight length must match the torus dimension");
  double phase = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i)
    phase += theta[i] * static_cast<double>(weight[i]);
  UnitaryRep rep;
  rep.dim = 1;
  Mat g(1, 1);
  g(0, 0) = std::polar(1.0, 2.0 * kPi * phase);
  rep.gens.push_back(g);
  rep.unitarity_tol = 1e-12;
  return rep;
}

inline UnitaryRep direct_sum(const std::vector<UnitaryRep>& parts) {
  UnitaryRep out;
  if (parts.empty()) return out;
  int k = parts[0].generator_count();
  for (const auto& p : parts) {
    if (p.generator_count() != k)
      throw ValidationError("rep/parts", "mismatched generator counts in direct sum");
    out.dim += p.dim;
    out.unitarity_tol = std::max(out.unitarity_tol, p.unitarity_tol);
  }
  for (int g = 0; g < k; ++g) {
    Mat block = Mat::Zero(out.dim, out.dim);
    int off = 0;
    for (const auto& p : parts) {
      block.block(off, off, p.dim, p.dim) = p.gens[static_cast<std::size_t>(g)];
      off += p.dim;
    }
    out.gens.push_back(std::move(block));
  }
  return out;
}

inline constexpr double kTrivialTol = 1e-10;

inline bool rep_is_trivial(const UnitaryRep& rep, double tol = kTrivialTol) {
  Mat id = Mat::Identity(rep.dim, rep.dim);
  for (const Mat& g : rep.gens)
    if (op_norm(g - id) > tol) return false;
  return true;
}

struct GradedComponent {
  UnitaryRep rep;
  double lambda = 0.0;
  bool trivial = false;
};

struct GradedModule {
  std::vector<GradedComponent> components;

  int generator_count() const {
    return components.empty() ? 0 : components[0].rep.generator_count();
  }
  int total_dim() const {
    int d = 0;
    for (const auto& c : components) d += c.rep.dim;
    return d;
  }
};

// Orders components by eigenvalue and tags trivial ones.
inline GradedModule make_graded(std::vector<GradedComponent> components) {
  GradedModule m;
  m.components = std::move(components);
  std::stable_sort(m.components.begin(), m.components.end(),
                   [](const GradedComponent& a, const GradedComponent& b) {
                     return a.lambda < b.lambda;
                   });
  for (std::size_t j = 1; j < m.components.size(); ++j) {
    if (m.components[j].rep.generator_count() != m.components[0].rep.generator_count())
      throw ValidationError("family", "mismatched generator counts across components");
  }
  for (auto& c : m.components) c.trivial = rep_is_trivial(c.rep);
  return m;
}

// Graded family of SU(2) irreducibles for spins min_spin, min_spin + 1/2,
// ..., max_spin, all evaluated on the same rotation list.
inline GradedModule su2_family(const std::vector<AxisAngle>& rotations, double max_spin,
                               double min_spin = 0.0) {
  std::vector<GradedComponent> comps;
  for (double s = min_spin; s <= max_spin + 1e-9; s += 0.5) {
    Su2Irrep irr = su2_irrep(s, rotations);
    comps.push_back({std::move(irr.rep), irr.lambda, false});
  }
  return make_graded(std::move(comps));
}

}  // namespace rigiditylab
