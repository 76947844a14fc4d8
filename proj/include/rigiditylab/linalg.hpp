#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "rigiditylab/common.hpp"

namespace rigiditylab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultRankTol = 1e-8;

// Largest singular value; 0 for an empty matrix.
inline double op_norm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(a).singularValues()(0);
}

// Rank cuts use rank_tol * max(sigma_max, 1).  The floor at 1 matters: the
// matrices here are assembled from unitaries, so a singular value of 1e-14
// is cancellation noise even when the whole matrix happens to be zero, and a
// purely relative cut would promote that noise to full rank.
inline double rank_threshold(double sigma_max, double rank_tol) {
  return rank_tol * (sigma_max > 1.0 ? sigma_max : 1.0);
}

// Smallest singular value above the rank threshold, or +inf when the matrix
// is (numerically) zero.  This is the "sigma restricted to the complement of
// the kernel" quantity used throughout.
inline double sigma_min_nonzero(const Mat& a, double rank_tol = kDefaultRankTol) {
  if (a.rows() == 0 || a.cols() == 0) return kInf;
  RVec s = Eigen::JacobiSVD<Mat>(a).singularValues();
  double thr = rank_threshold(s(0), rank_tol);
  double out = kInf;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) out = s(i);
  return out;
}

struct RankInfo {
  int rank = 0;
  // True when some singular value sits within a factor of 10 of the rank
  // threshold, i.e. the rank call is fragile at this tolerance.
  bool near_threshold = false;
  double sigma_max = 0.0;
};

inline RankInfo svd_rank(const Mat& a, double rank_tol = kDefaultRankTol) {
  RankInfo info;
  if (a.rows() == 0 || a.cols() == 0) return info;
  RVec s = Eigen::JacobiSVD<Mat>(a).singularValues();
  info.sigma_max = s(0);
  double thr = rank_threshold(info.sigma_max, rank_tol);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr) ++info.rank;
    if (s(i) > thr / 10.0 && s(i) < thr * 10.0) info.near_threshold = true;
  }
  return info;
}

// Moore-Penrose pseudoinverse with singular values below the rank threshold
// treated as zero.
inline Mat pinv(const Mat& a, double rank_tol = kDefaultRankTol) {
  if (a.rows() == 0 || a.cols() == 0) return Mat::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVec s = svd.singularValues();
  double thr = rank_threshold(s.size() > 0 ? s(0) : 0.0, rank_tol);
  RVec inv = RVec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal().toDenseMatrix().cast<cx>() * svd.matrixU().adjoint();
}

// Orthogonal projector onto the column space of a (at the given tolerance).
inline Mat range_projector(const Mat& a, double rank_tol = kDefaultRankTol) {
  if (a.rows() == 0) return Mat::Zero(0, 0);
  if (a.cols() == 0) return Mat::Zero(a.rows(), a.rows());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  RVec s = svd.singularValues();
  double thr = rank_threshold(s.size() > 0 ? s(0) : 0.0, rank_tol);
  Mat p = Mat::Zero(a.rows(), a.rows());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) p += svd.matrixU().col(i) * svd.matrixU().col(i).adjoint();
  return p;
}

// Orthogonal projector onto the null space of a.
inline Mat kernel_projector(const Mat& a, double rank_tol = kDefaultRankTol) {
  if (a.cols() == 0) return Mat::Zero(0, 0);
  Mat id = Mat::Identity(a.cols(), a.cols());
  if (a.rows() == 0) return id;
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinV);
  RVec s = svd.singularValues();
  double thr = rank_threshold(s.size() > 0 ? s(0) : 0.0, rank_tol);
  Mat p = id;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) p -= svd.matrixV().col(i) * svd.matrixV().col(i).adjoint();
  return p;
}

// Matrix exponential (scaling-and-squaring Pade).
inline Mat expm(const Mat& a) { return a.exp(); }

// Principal logarithm of a unitary matrix via its Schur form.  Eigenvalue
// arguments are required to stay `margin` away from the branch cut at pi;
// past that the iteration that calls this has left its basin anyway.
// The result is projected onto the skew-hermitian subspace.
inline Mat log_unitary(const Mat& u, double margin = 0.1) {
  Eigen::ComplexSchur<Mat> schur(u);
  const Mat& t = schur.matrixT();
  const Mat& q = schur.matrixU();
  Vec d(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    double arg = std::arg(t(i, i));
    if (kPi - std::abs(arg) < margin)
      throw NumericalError("log_unitary: eigenvalue argument within cutoff of the branch point");
    d(i) = cx(0.0, arg);
  }
  Mat l = q * d.asDiagonal() * q.adjoint();
  return 0.5 * (l - l.adjoint());
}

// Eigenvalues of a unitary matrix (diagonal of its Schur form).
inline Vec unitary_eigenvalues(const Mat& u) {
  Eigen::ComplexSchur<Mat> schur(u, /*computeU=*/false);
  return schur.matrixT().diagonal();
}

// min |1 - mu| over eigenvalues mu of u outside the fixed space, where the
// fixed space collects eigenvalues within fixed_tol of 1.  +inf when u acts
// as the identity.
inline double unitary_gap(const Mat& u, double fixed_tol = 1e-10) {
  if (u.rows() == 0) return kInf;
  Vec mu = unitary_eigenvalues(u);
  double gap = kInf;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    double dist = std::abs(cx(1.0, 0.0) - mu(i));
    if (dist > fixed_tol && dist < gap) gap = dist;
  }
  return gap;
}

struct HermitianSpectrum {
  RVec eigenvalues;       // ascending
  Mat eigenvectors;       // columns
  double lambda_plus_min = kInf;  // smallest eigenvalue above the kernel cut
  int kernel_dim = 0;
  int plus_min_index = -1;
};

// Spectral data of a hermitian PSD matrix with its kernel cut at
// rank_tol * max(lambda_max, 1).
inline HermitianSpectrum hermitian_spectrum(const Mat& q, double rank_tol = kDefaultRankTol) {
  HermitianSpectrum out;
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  if (out.eigenvalues.size() == 0) return out;
  double lmax = out.eigenvalues(out.eigenvalues.size() - 1);
  double thr = rank_tol * std::max(lmax, 1.0);
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    if (out.eigenvalues(i) <= thr) {
      ++out.kernel_dim;
    } else if (out.plus_min_index < 0) {
      out.plus_min_index = static_cast<int>(i);
      out.lambda_plus_min = out.eigenvalues(i);
    }
  }
  return out;
}

}  // namespace rigiditylab
