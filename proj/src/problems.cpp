#include "adaptrack/problems.hpp"

#include <array>
#include <cmath>
#include <random>

namespace adaptrack {

namespace {

using Poly3 = std::array<std::array<Polynomial, 3>, 3>;

Poly3 essential_variables(Index arity) {
  Poly3 e;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) e[r][c] = Polynomial::variable(arity, 3 * r + c);
  }
  return e;
}

std::vector<Polynomial> demazure_polys(const Poly3& e, Index arity) {
  Poly3 eet;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Polynomial s(arity);
      for (int k = 0; k < 3; ++k) s += e[i][k] * e[j][k];
      eet[i][j] = std::move(s);
    }
  }
  const Polynomial trace = eet[0][0] + eet[1][1] + eet[2][2];
  std::vector<Polynomial> out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      Polynomial s(arity);
      for (int j = 0; j < 3; ++j) s += eet[r][j] * e[j][c];
      out.push_back(2.0 * s - trace * e[r][c]);
    }
  }
  return out;
}

/// a^T E b for symbolic 3-vectors a, b.
Polynomial bilinear(const std::array<Polynomial, 3>& a, const Poly3& e,
                    const std::array<Polynomial, 3>& b, Index arity) {
  Polynomial s(arity);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) s += a[r] * e[r][c] * b[c];
  }
  return s;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Eigen::Vector3d random_direction(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::Vector3d t(n01(rng), n01(rng), n01(rng));
  return t.normalized();
}

constexpr double kMinDepth = 0.5;
constexpr double kMaxSlope = 2.0;  // |image coordinate| limit in both views

bool in_view(const Eigen::Vector3d& p) {
  return p.z() > kMinDepth && std::abs(p.x()) <= kMaxSlope * p.z() &&
         std::abs(p.y()) <= kMaxSlope * p.z();
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::TwistedCubic: return "twisted-cubic";
    case ProblemKind::FivePoint: return "five-point";
    case ProblemKind::SixPoint: return "six-point";
  }
  return "unknown";
}

ProblemKind parse_problem(const std::string& name) {
  if (name == "twisted-cubic") return ProblemKind::TwistedCubic;
  if (name == "five-point") return ProblemKind::FivePoint;
  if (name == "six-point") return ProblemKind::SixPoint;
  throw Error("unknown problem '" + name + "'");
}

ParamPolySystem twisted_cubic() {
  const Index n = 4;
  auto x = [&](Index i) { return Polynomial::variable(n, i); };
  std::vector<Polynomial> f{x(0) * x(2) - x(1) * x(1), x(1) * x(2) - x(0) * x(3),
                            x(1) * x(3) - x(2) * x(2), x(0) + x(1) + x(2) + x(3)};
  return ParamPolySystem(VarStructure({{GroupKind::Projective, 4}}, 0), std::move(f));
}

ParamPolySystem twisted_cubic_family() {
  const Index n = 7;
  auto x = [&](Index i) { return Polynomial::variable(n, i); };
  auto p = [&](Index i) { return Polynomial::variable(n, 4 + i); };
  std::vector<Polynomial> f{x(0) * x(2) - x(1) * x(1), x(1) * x(2) - x(0) * x(3),
                            x(1) * x(3) - x(2) * x(2),
                            x(2) + p(0) * x(0) + p(1) * x(1) + p(2) * x(3)};
  return ParamPolySystem(VarStructure({{GroupKind::Projective, 4}}, 3), std::move(f));
}

ParamPolySystem quadric_system() {
  const Index n = 4;
  auto x = [&](Index i) { return Polynomial::variable(n, i); };
  std::vector<Polynomial> f{x(0) * x(2) - x(1) * x(1),
                            x(0) * x(0) + x(1) * x(1) + x(2) * x(2) - x(3) * x(3),
                            x(1) * x(2) + x(1) * x(3) - x(0) * x(0)};
  return ParamPolySystem(VarStructure({{GroupKind::Projective, 4}}, 0), std::move(f));
}

ParamPolySystem five_point_system() {
  const Index nvars = 9;
  const Index arity = nvars + 20;
  const Poly3 e = essential_variables(arity);
  std::vector<Polynomial> polys = demazure_polys(e, arity);
  const Polynomial one = Polynomial::constant(arity, 1.0);
  for (Index i = 0; i < 5; ++i) {
    const Index base = nvars + 4 * i;
    const std::array<Polynomial, 3> xi{Polynomial::variable(arity, base),
                                       Polynomial::variable(arity, base + 1), one};
    const std::array<Polynomial, 3> yi{Polynomial::variable(arity, base + 2),
                                       Polynomial::variable(arity, base + 3), one};
    polys.push_back(bilinear(yi, e, xi, arity));
  }
  return ParamPolySystem(VarStructure({{GroupKind::Projective, 9}}, 20), std::move(polys));
}

ParamPolySystem six_point_system() {
  const Index nvars = 10;
  const Index arity = nvars + 24;
  const Poly3 e = essential_variables(arity);
  std::vector<Polynomial> polys = demazure_polys(e, arity);
  const Polynomial one = Polynomial::constant(arity, 1.0);
  const Polynomial lam = Polynomial::variable(arity, 9);
  for (Index i = 0; i < 6; ++i) {
    const Index base = nvars + 4 * i;
    const Polynomial x1 = Polynomial::variable(arity, base);
    const Polynomial x2 = Polynomial::variable(arity, base + 1);
    const Polynomial y1 = Polynomial::variable(arity, base + 2);
    const Polynomial y2 = Polynomial::variable(arity, base + 3);
    const std::array<Polynomial, 3> q{x1, x2, one + lam * (x1 * x1 + x2 * x2)};
    const std::array<Polynomial, 3> p{y1, y2, one + lam * (y1 * y1 + y2 * y2)};
    polys.push_back(bilinear(p, e, q, arity));
  }
  return ParamPolySystem(
      VarStructure({{GroupKind::Projective, 9}, {GroupKind::Affine, 1}}, 24), std::move(polys));
}

ParamPolySystem problem_system(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::TwistedCubic: return twisted_cubic_family();
    case ProblemKind::FivePoint: return five_point_system();
    case ProblemKind::SixPoint: return six_point_system();
  }
  throw Error("problem_system: unknown problem");
}

CVector correspondence_parameters(ProblemKind kind, const Correspondences& c) {
  std::size_t expected = 0;
  switch (kind) {
    case ProblemKind::FivePoint: expected = 5; break;
    case ProblemKind::SixPoint: expected = 6; break;
    case ProblemKind::TwistedCubic:
      throw Error("correspondence_parameters: twisted cubic has no correspondences");
  }
  if (c.x.size() != expected || c.y.size() != expected) {
    throw CountMismatch("expected " + std::to_string(expected) + " point pairs, got " +
                        std::to_string(c.x.size()));
  }
  CVector p(static_cast<Index>(4 * expected));
  for (std::size_t i = 0; i < expected; ++i) {
    if (!c.x[i].allFinite() || !c.y[i].allFinite()) {
      throw Error("correspondence_parameters: non-finite image point");
    }
    const Index b = static_cast<Index>(4 * i);
    p(b) = c.x[i].x();
    p(b + 1) = c.x[i].y();
    p(b + 2) = c.y[i].x();
    p(b + 3) = c.y[i].y();
  }
  return p;
}

Problem five_point(const Correspondences& c) {
  return Problem{five_point_system(), correspondence_parameters(ProblemKind::FivePoint, c)};
}

Problem six_point(const Correspondences& c) {
  return Problem{six_point_system(), correspondence_parameters(ProblemKind::SixPoint, c)};
}

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& t) {
  Eigen::Matrix3d m;
  m << 0.0, -t.z(), t.y(), t.z(), 0.0, -t.x(), -t.y(), t.x(), 0.0;
  return m;
}

Eigen::Matrix3d demazure(const Eigen::Matrix3d& e) {
  const Eigen::Matrix3d eet = e * e.transpose();
  return 2.0 * eet * e - eet.trace() * e;
}

Eigen::Vector2d distort(const Eigen::Vector2d& u, double lambda) {
  const double r2 = u.squaredNorm();
  if (lambda == 0.0 || r2 == 0.0) return u;
  const double disc = 1.0 - 4.0 * lambda * r2;
  if (disc < 0.0) throw Degenerate("distort: point outside the distortion model's range");
  const double s = (1.0 - std::sqrt(disc)) / (2.0 * lambda * r2);
  return s * u;
}

SyntheticInstance synth_instance(ProblemKind kind, Rng& rng) {
  if (kind == ProblemKind::TwistedCubic) {
    throw Error("synth_instance: only the five- and six-point problems have scenes");
  }
  const std::size_t count = kind == ProblemKind::FivePoint ? 5 : 6;
  std::uniform_real_distribution<double> side(-1.5, 1.5);
  std::uniform_real_distribution<double> depth(3.0, 6.0);
  std::uniform_real_distribution<double> distortion(-0.5, 0.0);

  for (int attempt = 0; attempt < 100; ++attempt) {
    SyntheticInstance inst;
    inst.kind = kind;
    inst.rotation = random_rotation(rng);
    inst.translation = random_direction(rng);
    inst.essential = cross_matrix(inst.translation) * inst.rotation;
    if (kind == ProblemKind::SixPoint) inst.distortion = distortion(rng);

    bool ok = true;
    for (std::size_t i = 0; i < count && ok; ++i) {
      ok = false;
      for (int tries = 0; tries < 100; ++tries) {
        const Eigen::Vector3d xw(side(rng), side(rng), depth(rng));
        const Eigen::Vector3d yw = inst.rotation * xw + inst.translation;
        if (!in_view(xw) || !in_view(yw)) continue;
        inst.scene.push_back(xw);
        Eigen::Vector2d u1 = xw.head<2>() / xw.z();
        Eigen::Vector2d u2 = yw.head<2>() / yw.z();
        if (kind == ProblemKind::SixPoint) {
          u1 = distort(u1, inst.distortion);
          u2 = distort(u2, inst.distortion);
        }
        inst.points.x.push_back(u1);
        inst.points.y.push_back(u2);
        ok = true;
        break;
      }
    }
    if (!ok) continue;

    // Reject near-coplanar scenes: their points sit close to a plane.
    Eigen::Matrix3d spread;
    for (int k = 0; k < 3; ++k) spread.col(k) = inst.scene[k + 1] - inst.scene[0];
    if (std::abs(spread.determinant()) < 1e-3) continue;

    const ParamPolySystem sys = problem_system(kind);
    const CVector residual = sys.evaluate(ground_truth_point(inst),
                                          correspondence_parameters(kind, inst.points));
    if (residual.norm() > 1e-10) continue;
    return inst;
  }
  throw Degenerate("synth_instance: no admissible configuration in 100 draws");
}

CVector ground_truth_point(const SyntheticInstance& inst) {
  const bool six = inst.kind == ProblemKind::SixPoint;
  CVector x(six ? 10 : 9);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) x(3 * r + c) = inst.essential(r, c);
  }
  if (six) x(9) = inst.distortion;
  return x;
}

namespace fixtures {

namespace {

CVector vec(std::initializer_list<Complex> v) {
  CVector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (const Complex& c : v) out(i++) = c;
  return out;
}

}  // namespace

std::vector<CVector> twisted_cubic_points() {
  const Complex i(0.0, 1.0);
  return {vec({1.0, -1.0, 1.0, -1.0}), vec({1.0, i, -1.0, -i}), vec({1.0, -i, -1.0, i})};
}

std::vector<CVector> table1_patches() {
  return {vec({1.0, 0.0, 0.0, 0.0}), vec({0.8695, 0.4670, -0.0231, 0.1592}),
          vec({0.1947, 0.3999, -0.5268, -0.7243})};
}

std::vector<CVector> table2_q() {
  return {vec({1.0, 1.0, 1.0, 1.0}), vec({-0.0109, 0.5208, 0.4013, 0.7534}),
          vec({-0.0889, 0.6266, 0.7152, 0.2966})};
}

CMatrix extraneous_randomizer() {
  CMatrix a(4, 5);
  a << 2, -1, -3, 2, 2, -2, -1, 0, 3, -4, 5, 3, -1, -2, -4, -5, 3, 2, 2, 0;
  return a;
}

std::vector<CVector> extraneous_points() {
  const CVector a = vec({{0.7955, 0.0744}, {0.3755, -0.6315}, {-1.2239, -0.1598},
                         {-0.6730, 0.9810}});
  return {a, a.conjugate()};
}

ParamPolySystem twisted_cubic_affine() {
  const Index n = 4;
  auto x = [&](Index i) { return Polynomial::variable(n, i); };
  std::vector<Polynomial> h{x(0) * x(2) - x(1) * x(1), x(1) * x(2) - x(0) * x(3),
                            x(1) * x(3) - x(2) * x(2), x(0) + x(1) + x(2) + x(3),
                            x(0) - Polynomial::constant(n, 1.0)};
  return ParamPolySystem(VarStructure({{GroupKind::Affine, 4}}, 0), std::move(h));
}

CMatrix pinv_example() {
  CMatrix a(4, 5);
  a << 0, 0, 0, 0, 1,                                   //
      1.0 / 6, 1.0 / 3, 1.0 / 6, 1.0 / 2, -1,          //
      1.0 / 3, -1.0 / 3, -2.0 / 3, -1, 1,              //
      -1.0 / 2, 0, 1.0 / 2, 3.0 / 2, -1;
  return a;
}

CVector example_fixed_patch() {
  // Printed as a bilinear form sum c_j x_j = 1; v^H x = 1 needs v = conj(c).
  const CVector c = vec({{0.3509, 0.1476}, {0.4524, -0.4487}, {-0.4159, -0.2470},
                         {0.4609, 0.0523}});
  return c.conjugate();
}

CMatrix example_fixed_q() {
  CMatrix q(4, 1);
  q << Complex(0.1792, -0.1432), Complex(-0.7159, -0.5784), Complex(0.1866, -0.4692),
      Complex(0.4524, 0.9864);
  return q;
}

CVector quadric_solution() {
  const double s5 = std::sqrt(5.0);
  return vec({(s5 + 1.0) / 4.0, 0.5, (s5 - 1.0) / 4.0, 1.0});
}

CVector twisted_target() { return vec({-1.0, Complex(0.0, 0.1), 0.0}); }

}  // namespace fixtures

}  // namespace adaptrack
