// Dense linear-algebra kernels used by the patch, randomizer and tracker
// layers.  Everything is templated on the Eigen expression type so the same
// code serves real fixtures and complex path data.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace adaptrack {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Numerical rank loss detected by a singular-value or pivot threshold.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

/// A singular value sigma counts as zero when
/// sigma <= max(m, n) * eps * sigma_max * 1e3.
inline double rank_tolerance(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon() * sigma_max * 1e3;
}

template <typename Scalar>
struct Svd {
  DenseMatrix<Scalar> U;
  Eigen::Matrix<RealOf<Scalar>, Eigen::Dynamic, 1> sigma;  // descending
  DenseMatrix<Scalar> V;
};

/// Thin SVD, M = U * diag(sigma) * V^H.
template <typename Derived>
Svd<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::JacobiSVD<DenseMatrix<Scalar>> solver(
      m.derived().eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw Error("svd: iteration did not converge");
  }
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

/// Moore-Penrose pseudoinverse V * Sigma^-1 * U^H of an n x N matrix with
/// full column rank N <= n.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> pseudoinverse(
    const Eigen::MatrixBase<Derived>& m) {
  if (m.cols() > m.rows()) {
    throw DimensionMismatch("pseudoinverse: expected rows >= cols, got " +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
  }
  const auto d = svd(m);
  const double smax = d.sigma.size() > 0 ? double(d.sigma(0)) : 0.0;
  const double smin = d.sigma.size() > 0 ? double(d.sigma(d.sigma.size() - 1)) : 0.0;
  if (!(smin > rank_tolerance(m.rows(), m.cols(), smax))) {
    throw RankDeficient("pseudoinverse: matrix lacks full column rank");
  }
  return d.V * d.sigma.cwiseInverse().asDiagonal() * d.U.adjoint();
}

template <typename Scalar>
struct PivotedQr {
  DenseMatrix<Scalar> Q;  // n x N, orthonormal columns
  DenseMatrix<Scalar> R;  // N x N, upper triangular, |R_kk| nonincreasing
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> P;  // M = Q R P
};

template <typename Derived>
PivotedQr<typename Derived::Scalar> qr_column_pivoted(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.cols() > m.rows()) {
    throw DimensionMismatch("qr_column_pivoted: expected rows >= cols");
  }
  Eigen::ColPivHouseholderQR<DenseMatrix<Scalar>> qr(m.derived().eval());
  const Index n = m.rows();
  const Index cols = m.cols();
  DenseMatrix<Scalar> q = qr.householderQ() * DenseMatrix<Scalar>::Identity(n, cols);
  DenseMatrix<Scalar> r =
      qr.matrixR().topLeftCorner(cols, cols).template triangularView<Eigen::Upper>();
  // Eigen factors M * Pc = Q R, so P = Pc^T.
  return {std::move(q), std::move(r), qr.colsPermutation().transpose()};
}

/// Ratio of the extreme singular values; +inf when the smallest vanishes.
template <typename Derived>
double cond2(const Eigen::MatrixBase<Derived>& m) {
  const auto sigma = svd(m).sigma;
  const double smax = double(sigma(0));
  const double smin = double(sigma(sigma.size() - 1));
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

template <typename Derived>
double norm_inf(const Eigen::MatrixBase<Derived>& m) {
  return double(m.cwiseAbs().rowwise().sum().maxCoeff());
}

template <typename Derived>
double norm_1(const Eigen::MatrixBase<Derived>& m) {
  return double(m.cwiseAbs().colwise().sum().maxCoeff());
}

/// Mixed condition number ||M||_inf * ||M^-1||_1 via an explicit inverse.
template <typename Derived>
double kappa_inf_1(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("kappa_inf_1: matrix must be square");
  }
  Eigen::FullPivLU<DenseMatrix<Scalar>> lu(m.derived().eval());
  if (!lu.isInvertible()) {
    throw SingularMatrix("kappa_inf_1: matrix is singular");
  }
  return norm_inf(m) * norm_1(lu.inverse());
}

/// Squared row norms of an orthonormal basis of the column span.
template <typename Derived>
RVector leverage_scores(const Eigen::MatrixBase<Derived>& m) {
  const auto qr = qr_column_pivoted(m);
  const Index cols = m.cols();
  const double r00 = cols > 0 ? std::abs(qr.R(0, 0)) : 0.0;
  const double rlast = cols > 0 ? std::abs(qr.R(cols - 1, cols - 1)) : 0.0;
  if (cols == 0 || !(rlast > rank_tolerance(m.rows(), cols, r00))) {
    throw RankDeficient("leverage_scores: matrix lacks full column rank");
  }
  return qr.Q.rowwise().squaredNorm().template cast<double>();
}

}  // namespace adaptrack
