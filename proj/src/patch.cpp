#include "adaptrack/patch.hpp"

#include <cmath>

namespace adaptrack {

GroupPatch init_fixed(Index group_size, Rng& rng) {
  return fixed_patch(random_unit_vector(group_size, rng));
}

GroupPatch fixed_patch(CVector v) {
  if (v.size() == 0 || v.isZero(0.0)) throw ZeroVector("fixed_patch: zero patch vector");
  return GroupPatch{std::move(v), std::nullopt, 1.0};
}

CVector place_on_patch(const GroupPatch& patch, const CVector& x) {
  const Complex s = patch.v.dot(x);
  if (std::abs(s) <= 1e-300) {
    throw ZeroVector("place_on_patch: point lies on the hyperplane at infinity of the patch");
  }
  return x / s;
}

PatchedPoint update_orthogonal(const CVector& x) {
  const double n = x.norm();
  if (!(n > 0.0)) throw ZeroVector("update_orthogonal: zero vector");
  CVector unit = x / n;
  return PatchedPoint{GroupPatch{unit, std::nullopt, 1.0}, unit};
}

PatchedPoint update_coordwise(const CVector& x) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index k = 0; k < x.size(); ++k) {
    const double a = std::abs(x(k));
    if (a > best_abs) {
      best = k;
      best_abs = a;
    }
  }
  if (!(best_abs > 0.0)) throw ZeroVector("update_coordwise: zero vector");
  CVector rep = x / x(best);
  rep(best) = 1.0;
  CVector v = CVector::Zero(x.size());
  v(best) = 1.0;
  return PatchedPoint{GroupPatch{std::move(v), best, 1.0}, std::move(rep)};
}

Polynomial patch_equation(const GroupPatch& patch, const VarStructure& structure,
                          std::size_t group) {
  const Index arity = structure.arity();
  const Index offset = structure.group_offset(group);
  if (patch.v.size() != structure.groups()[group].size) {
    throw DimensionMismatch("patch_equation: patch vector does not match group size");
  }
  Polynomial eq = Polynomial::constant(arity, -1.0);
  for (Index k = 0; k < patch.v.size(); ++k) {
    if (patch.v(k) == Complex(0.0)) continue;
    eq += std::conj(patch.v(k)) * Polynomial::variable(arity, offset + k);
  }
  return eq;
}

std::vector<Polynomial> patch_equations(const PatchState& state,
                                        const VarStructure& structure) {
  const auto proj = structure.projective_groups();
  if (proj.size() != state.size()) {
    throw DimensionMismatch("patch_equations: one patch per projective group expected");
  }
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    out.push_back(patch_equation(state[i], structure, proj[i]));
  }
  return out;
}

ScaleResult optimal_scale(const CMatrix& J, const CVector& alpha, const CVector& z,
                          int degree, bool orthogonal) {
  if (degree <= 0) throw MixedDegrees("optimal_scale: requires a common degree d > 0");
  const Index n1 = J.cols();
  if (J.rows() != n1 - 1 || alpha.size() != n1 || z.size() != n1) {
    throw DimensionMismatch("optimal_scale: expected J of size N x (N+1)");
  }
  CMatrix m(n1, n1);
  m.topRows(n1 - 1) = J;
  m.row(n1 - 1) = alpha.adjoint();
  Eigen::FullPivLU<CMatrix> lu(m);
  if (!lu.isInvertible()) throw SingularMatrix("optimal_scale: M(1) is singular");
  const CMatrix inv = lu.inverse();

  ScaleResult r;
  r.j_inf = norm_inf(J);
  r.k_1 = norm_1(inv.leftCols(n1 - 1));
  r.alpha_1 = alpha.cwiseAbs().sum();
  r.beta_1 = inv.col(n1 - 1).cwiseAbs().sum();
  const double ratio = orthogonal ? r.j_inf / r.k_1
                                  : (r.j_inf * r.beta_1) / (r.k_1 * r.alpha_1);
  r.lambda = std::pow(ratio, 1.0 / (2.0 * degree));
  r.v = r.lambda * alpha;
  r.point = z / r.lambda;
  return r;
}

}  // namespace adaptrack
