// Built-in systems: twisted-cubic examples, a quadric system, and the
// 5-point / 6-point relative pose problems with synthetic instances.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adaptrack/polysys.hpp"
#include "adaptrack/random.hpp"

namespace adaptrack {

class CountMismatch : public Error {
 public:
  using Error::Error;
};

class Degenerate : public Error {
 public:
  using Error::Error;
};

enum class ProblemKind { TwistedCubic, FivePoint, SixPoint };

const char* to_string(ProblemKind kind);
ProblemKind parse_problem(const std::string& name);

/// Point pairs in normalized image coordinates: x_i in camera 1, y_i in camera 2.
struct Correspondences {
  std::vector<Eigen::Vector2d> x;
  std::vector<Eigen::Vector2d> y;

  std::size_t size() const { return x.size(); }
};

struct SyntheticInstance {
  ProblemKind kind = ProblemKind::FivePoint;
  Correspondences points;
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
  Eigen::Matrix3d essential;  // [t]x R
  std::vector<Eigen::Vector3d> scene;
  double distortion = 0.0;  // lambda_0, six-point only
};

struct Problem {
  ParamPolySystem system;
  CVector parameters;
};

/// Twisted cubic cut by x0 + x1 + x2 + x3 = 0 (no parameters).
ParamPolySystem twisted_cubic();
/// Twisted cubic cut by x2 + p1 x0 + p2 x1 + p3 x3 = 0.
ParamPolySystem twisted_cubic_family();
/// [x0 x2 - x1^2, x0^2 + x1^2 + x2^2 - x3^2, x1 x2 + x1 x3 - x0^2] on P^3.
ParamPolySystem quadric_system();

/// Nine Demazure cubics of E plus y_i^T E x_i for five pairs, on P^8.
/// Parameters are (x_i1, x_i2, y_i1, y_i2) pair by pair.
ParamPolySystem five_point_system();
/// Nine Demazure cubics plus p_i(l)^T E q_i(l) for six pairs, on P^8 x C,
/// with q = (x, 1 + l |x|^2) and p = (y, 1 + l |y|^2).
ParamPolySystem six_point_system();

ParamPolySystem problem_system(ProblemKind kind);
/// Parameter vector of the five- or six-point system for these pairs.
CVector correspondence_parameters(ProblemKind kind, const Correspondences& c);

Problem five_point(const Correspondences& c);
Problem six_point(const Correspondences& c);

/// Random calibrated two-view scene seen by both cameras; for the six-point
/// problem the observations are distorted with a drawn lambda_0 in [-0.5, 0].
SyntheticInstance synth_instance(ProblemKind kind, Rng& rng);
/// (E row-major) or (E row-major, lambda_0).
CVector ground_truth_point(const SyntheticInstance& inst);

/// Demazure residual 2 E E^T E - trace(E E^T) E.
Eigen::Matrix3d demazure(const Eigen::Matrix3d& e);
Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& t);

/// Division-model preimage: the distorted point whose lifting is ∝ (u, 1).
Eigen::Vector2d distort(const Eigen::Vector2d& u, double lambda);

namespace fixtures {

/// The three intersection points of the twisted-cubic example, x0 = 1.
std::vector<CVector> twisted_cubic_points();
/// Table of patch vectors used with the first of these points.
std::vector<CVector> table1_patches();
/// Q columns used with [I Q] on [f; x0 - 1].
std::vector<CVector> table2_q();
/// Integer randomizing matrix of the extraneous-root example (4 x 5).
CMatrix extraneous_randomizer();
/// The two printed extraneous approximations (4 decimals).
std::vector<CVector> extraneous_points();
/// h = [f; x0 - 1] on C^4.
ParamPolySystem twisted_cubic_affine();
/// Printed pseudoinverse of Jh at (1, -1, 1, -1).
CMatrix pinv_example();
/// Printed fixed patch for the parameterized example (v^H x = 1 form).
CVector example_fixed_patch();
/// Printed Q of the fixed randomizer for the parameterized example.
CMatrix example_fixed_q();
/// Coordinate-wise patch solution of the quadric system, x3 = 1.
CVector quadric_solution();
CVector twisted_target();

}  // namespace fixtures

}  // namespace adaptrack
