#include <doctest.h>

#include "adaptrack/linalg.hpp"
#include "adaptrack/problems.hpp"
#include "support.hpp"

using namespace adaptrack;
using testing::gaussian_matrix;

namespace {

CMatrix unitary(Index n, Rng& rng) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian_matrix(n, n, rng));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

CMatrix duplicated_rows() {
  CMatrix m(4, 2);
  m << 1, 0, 1, 0, 0, 1, 0, 1;
  return m;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("svd of identity and diagonal") {
    CHECK((svd(CMatrix::Identity(3, 3)).sigma - RVector::Ones(3)).norm() < 1e-15);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 3.0;
    const auto s = svd(d);
    CHECK(s.sigma(0) == doctest::Approx(3.0));
    CHECK(s.sigma(1) == doctest::Approx(0.0));
  }

  TEST_CASE("svd reconstructs a random 5x4 matrix") {
    Rng rng(11);
    const CMatrix m = gaussian_matrix(5, 4, rng);
    const auto s = svd(m);
    const CMatrix back = s.U * s.sigma.cast<Complex>().asDiagonal() * s.V.adjoint();
    CHECK((back - m).norm() <= 1e-12 * m.norm());
    CHECK((s.U.adjoint() * s.U - CMatrix::Identity(4, 4)).norm() < 1e-12);
    CHECK((s.V.adjoint() * s.V - CMatrix::Identity(4, 4)).norm() < 1e-12);
    for (Index k = 1; k < s.sigma.size(); ++k) CHECK(s.sigma(k) <= s.sigma(k - 1));
  }

  TEST_CASE("pseudoinverse of the twisted-cubic Jacobian matches the printed matrix") {
    const ParamPolySystem h = fixtures::twisted_cubic_affine();
    CVector x(4);
    x << 1.0, -1.0, 1.0, -1.0;
    const CMatrix jh = h.jacobian_x(x, CVector(0));
    const CMatrix a = pseudoinverse(jh);
    CHECK((a - fixtures::pinv_example()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a * jh - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("pseudoinverse of square and tall matrices") {
    Rng rng(3);
    const CMatrix sq = gaussian_matrix(4, 4, rng);
    CHECK((pseudoinverse(sq) - sq.inverse()).norm() < 1e-10 * sq.inverse().norm());
    const CMatrix tall = gaussian_matrix(7, 3, rng);
    CHECK((pseudoinverse(tall) * tall - CMatrix::Identity(3, 3)).norm() < 1e-12);
  }

  TEST_CASE("pseudoinverse rejects rank loss and wide input") {
    CMatrix m(3, 2);
    m << 1, 2, 2, 4, 3, 6;
    CHECK_THROWS_AS(pseudoinverse(m), RankDeficient);
    CHECK_THROWS_AS(pseudoinverse(CMatrix::Ones(2, 3)), DimensionMismatch);
  }

  TEST_CASE("column pivoted QR") {
    const auto id = qr_column_pivoted(CMatrix::Identity(3, 3));
    CHECK((id.Q * id.R * id.P - CMatrix::Identity(3, 3)).norm() < 1e-15);

    const auto dup = qr_column_pivoted(duplicated_rows());
    for (Index i = 0; i < 4; ++i) CHECK(dup.Q.row(i).squaredNorm() == doctest::Approx(0.5));

    Rng rng(5);
    const CMatrix m = gaussian_matrix(6, 4, rng);
    const auto f = qr_column_pivoted(m);
    CHECK((f.Q * f.R * f.P - m).norm() <= 1e-12 * m.norm());
    CHECK((f.Q.adjoint() * f.Q - CMatrix::Identity(4, 4)).norm() < 1e-12);
    for (Index k = 1; k < 4; ++k) {
      CHECK(std::abs(f.R(k, k)) <= std::abs(f.R(k - 1, k - 1)) + 1e-14);
      for (Index i = k + 1; i < 4; ++i) CHECK(std::abs(f.R(i, k)) == 0.0);
    }
  }

  TEST_CASE("cond2") {
    Rng rng(9);
    const CMatrix u = unitary(5, rng);
    CHECK(cond2(u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(cond2(Eigen::MatrixXd::Zero(2, 2))));

    const CMatrix m = gaussian_matrix(5, 5, rng);
    const double c = cond2(m);
    CHECK(std::abs(cond2(u * m) - c) <= 1e-10 * c);
    CHECK(std::abs(cond2(m * unitary(5, rng)) - c) <= 1e-10 * c);
  }

  TEST_CASE("kappa_inf_1 matches brute-force norms") {
    CHECK(kappa_inf_1(CMatrix::Identity(4, 4)) == doctest::Approx(1.0));
    Rng rng(13);
    const CMatrix m = gaussian_matrix(4, 4, rng);
    const CMatrix inv = m.inverse();
    double row_max = 0.0, col_max = 0.0;
    for (Index i = 0; i < 4; ++i) {
      double r = 0.0, c = 0.0;
      for (Index j = 0; j < 4; ++j) {
        r += std::abs(m(i, j));
        c += std::abs(inv(j, i));
      }
      row_max = std::max(row_max, r);
      col_max = std::max(col_max, c);
    }
    CHECK(kappa_inf_1(m) == doctest::Approx(row_max * col_max).epsilon(1e-10));
    CHECK(kappa_inf_1(m) >= 1.0);
    CMatrix sing = CMatrix::Ones(3, 3);
    CHECK_THROWS_AS(kappa_inf_1(sing), SingularMatrix);
    CHECK_THROWS_AS(kappa_inf_1(CMatrix::Ones(2, 3)), DimensionMismatch);
  }

  TEST_CASE("leverage scores of the printed examples") {
    const RVector dup = leverage_scores(duplicated_rows());
    CHECK((dup - RVector::Constant(4, 0.5)).cwiseAbs().maxCoeff() < 1e-10);

    const ParamPolySystem h = fixtures::twisted_cubic_affine();
    CVector x(4);
    x << 1.0, -1.0, 1.0, -1.0;
    RVector want(5);
    want << 2.0 / 3, 2.0 / 3, 2.0 / 3, 1.0, 1.0;
    CHECK((leverage_scores(h.jacobian_x(x, CVector(0))) - want).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("leverage scores: range, sum, basis independence") {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix m = gaussian_matrix(8, 3, rng);
      const RVector l = leverage_scores(m);
      CHECK(l.sum() == doctest::Approx(3.0).epsilon(1e-10));
      CHECK(l.minCoeff() >= 0.0);
      CHECK(l.maxCoeff() <= 1.0 + 1e-12);
      const CMatrix g = gaussian_matrix(3, 3, rng);
      CHECK((leverage_scores(CMatrix(m * g)) - l).cwiseAbs().maxCoeff() < 1e-10);
    }
    CMatrix low(4, 2);
    low << 1, 2, 2, 4, 3, 6, 4, 8;
    CHECK_THROWS_AS(leverage_scores(low), RankDeficient);
  }

  TEST_CASE("leverage scores of an orthonormal basis are its squared row norms") {
    Rng rng(19);
    const CMatrix u = unitary(6, rng).leftCols(2);
    const RVector l = leverage_scores(u);
    CHECK((l - u.rowwise().squaredNorm()).cwiseAbs().maxCoeff() < 1e-12);
  }
}
