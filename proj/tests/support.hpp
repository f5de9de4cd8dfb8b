// Shared helpers for the unit and acceptance tests.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "adaptrack/polysys.hpp"
#include "adaptrack/random.hpp"

namespace testing {

using namespace adaptrack;

inline CMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n;
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline CVector gaussian_vector(Index size, Rng& rng) { return gaussian_matrix(size, 1, rng).col(0); }

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Random dense-ish polynomial in `arity` coordinates with degree <= max_degree.
inline Polynomial random_polynomial(Index arity, int max_degree, int terms, Rng& rng) {
  std::uniform_int_distribution<int> e(0, max_degree);
  std::normal_distribution<double> n;
  std::vector<Term> out;
  for (int k = 0; k < terms; ++k) {
    Exponents ex(static_cast<std::size_t>(arity), 0);
    int budget = e(rng);
    std::uniform_int_distribution<Index> pick(0, arity - 1);
    while (budget-- > 0) ++ex[static_cast<std::size_t>(pick(rng))];
    out.push_back({Complex(n(rng), n(rng)), ex});
  }
  return Polynomial(arity, std::move(out));
}

/// Polynomial homogeneous of degree d in [begin, end) and arbitrary elsewhere.
inline Polynomial random_homogeneous(Index arity, Index begin, Index end, int d, int terms,
                                     Rng& rng) {
  std::normal_distribution<double> n;
  std::uniform_int_distribution<Index> pick(begin, end - 1);
  std::uniform_int_distribution<Index> pick_rest(end, arity > end ? arity - 1 : end);
  std::uniform_int_distribution<int> extra(0, 2);
  std::vector<Term> out;
  for (int k = 0; k < terms; ++k) {
    Exponents ex(static_cast<std::size_t>(arity), 0);
    for (int i = 0; i < d; ++i) ++ex[static_cast<std::size_t>(pick(rng))];
    if (arity > end) {
      for (int i = extra(rng); i > 0; --i) ++ex[static_cast<std::size_t>(pick_rest(rng))];
    }
    out.push_back({Complex(n(rng), n(rng)), ex});
  }
  return Polynomial(arity, std::move(out));
}

/// Central differences of F in the variables.
inline CMatrix fd_jacobian(const ParamPolySystem& f, const CVector& x, const CVector& p,
                           double h = 1e-6) {
  CMatrix j(f.size(), x.size());
  for (Index k = 0; k < x.size(); ++k) {
    CVector xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    j.col(k) = (f.evaluate(xp, p) - f.evaluate(xm, p)) / (2.0 * h);
  }
  return j;
}

}  // namespace testing
