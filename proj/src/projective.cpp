#include "adaptrack/projective.hpp"

#include <algorithm>
#include <cmath>

namespace adaptrack {

namespace {

void check_length(const VarStructure& structure, const CVector& x) {
  if (x.size() != structure.variable_count()) {
    throw DimensionMismatch("point length does not match variable structure");
  }
}

}  // namespace

CVector phase_normalize(const VarStructure& structure, const CVector& x) {
  check_length(structure, x);
  CVector out = x;
  for (std::size_t g = 0; g < structure.groups().size(); ++g) {
    const auto& group = structure.groups()[g];
    if (group.kind != GroupKind::Projective) continue;
    auto seg = out.segment(structure.group_offset(g), group.size);
    Index best = 0;
    for (Index k = 1; k < seg.size(); ++k) {
      if (std::abs(seg(k)) > std::abs(seg(best))) best = k;
    }
    const double a = std::abs(seg(best));
    if (a == 0.0) continue;
    seg *= std::conj(seg(best)) / a;
    seg(best) = std::abs(seg(best));
    seg /= seg.norm();
  }
  return out;
}

double imag_norm(const VarStructure& structure, const CVector& x) {
  return phase_normalize(structure, x).imag().norm();
}

double projective_distance(const VarStructure& structure, const CVector& x, const CVector& y) {
  check_length(structure, x);
  check_length(structure, y);
  double worst = 0.0;
  for (std::size_t g = 0; g < structure.groups().size(); ++g) {
    const auto& group = structure.groups()[g];
    const Index off = structure.group_offset(g);
    const CVector a = x.segment(off, group.size);
    const CVector b = y.segment(off, group.size);
    double d = 0.0;
    if (group.kind == GroupKind::Affine) {
      d = (a - b).norm();
    } else {
      const CVector an = a / a.norm();
      const CVector bn = b / b.norm();
      const Complex ip = bn.dot(an);
      const Complex phase = std::abs(ip) > 0.0 ? ip / std::abs(ip) : Complex(1.0);
      d = (an - phase * bn).norm();
    }
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace adaptrack
