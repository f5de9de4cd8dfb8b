// Representative-independent quantities on products of projective and
// affine spaces.
#pragma once

#include "adaptrack/polysys.hpp"

namespace adaptrack {

/// Each projective group is rotated so its largest-modulus coordinate
/// (lowest index on ties) is real positive, then scaled to unit 2-norm.
/// Affine groups are left untouched.
CVector phase_normalize(const VarStructure& structure, const CVector& x);

/// ||imag(phase_normalize(x))||_2.
double imag_norm(const VarStructure& structure, const CVector& x);

/// Maximum over groups of min_theta ||x/|x| - e^{i theta} y/|y|||
/// (projective groups) or ||x - y|| (affine groups).
double projective_distance(const VarStructure& structure, const CVector& x, const CVector& y);

}  // namespace adaptrack
