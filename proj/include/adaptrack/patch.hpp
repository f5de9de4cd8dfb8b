// Affine coordinate patches v^H x = 1 for the projective variable groups.
#pragma once

#include <optional>
#include <vector>

#include "adaptrack/polysys.hpp"
#include "adaptrack/random.hpp"

namespace adaptrack {

enum class PatchKind { Fixed, Orthogonal, CoordinateWise };

struct PatchStrategy {
  PatchKind kind = PatchKind::Fixed;
  bool optimal_scaling = false;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class MixedDegrees : public Error {
 public:
  using Error::Error;
};

/// Patch for one projective group.  The defining equation is
/// v.dot(x) = v^H x = 1.
struct GroupPatch {
  CVector v;
  std::optional<Index> chosen_coord;  // coordinate-wise patches only
  double lambda = 1.0;
};

/// One entry per projective group, in group order.
using PatchState = std::vector<GroupPatch>;

struct PatchedPoint {
  GroupPatch patch;
  CVector representative;  // satisfies v^H x = 1
};

/// General patch with unit-modulus entries of random phase.
GroupPatch init_fixed(Index group_size, Rng& rng);
/// Fixed patch from an explicit vector v (v^H x = 1).
GroupPatch fixed_patch(CVector v);

/// Rescales x onto the patch: x / (v^H x).
CVector place_on_patch(const GroupPatch& patch, const CVector& x);

PatchedPoint update_orthogonal(const CVector& x);
/// Largest-modulus coordinate, lowest index on ties.
PatchedPoint update_coordwise(const CVector& x);

/// conj(v) . x - 1 in the flat variable layout of `structure`.
Polynomial patch_equation(const GroupPatch& patch, const VarStructure& structure,
                          std::size_t group);
std::vector<Polynomial> patch_equations(const PatchState& state,
                                        const VarStructure& structure);

struct ScaleResult {
  double lambda = 1.0;
  CVector v;      // lambda * alpha
  CVector point;  // z / lambda, on the scaled patch
  double j_inf = 0.0;
  double k_1 = 0.0;
  double alpha_1 = 0.0;
  double beta_1 = 0.0;
};

/// Patch scaling minimising kappa_inf_1 of M(lambda) = [J; lambda^d alpha^H].
///
/// J is the N x (N+1) Jacobian of N polynomials of common degree d at z,
/// with alpha^H z = 1.  [K beta] = M(1)^-1 and
///   lambda = (||J||_inf ||beta||_1 / (||K||_1 ||alpha||_1))^(1/2d).
/// When `orthogonal` is set (alpha = z, unit 2-norm) beta equals alpha and
/// lambda = (||J||_inf / ||K||_1)^(1/2d).
ScaleResult optimal_scale(const CMatrix& J, const CVector& alpha, const CVector& z,
                          int degree, bool orthogonal);

}  // namespace adaptrack
