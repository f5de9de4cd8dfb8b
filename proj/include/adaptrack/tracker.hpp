// Predictor-corrector tracking of one path of the parameter homotopy
//
//   H(x, t) = A * [F(x; t p_start + (1 - t) p_target); patch equations]
//
// from t = 1 down to t = 0, with the patches and (adaptive) randomizer A
// rebuilt from the current point after every accepted step.
#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptrack/patch.hpp"
#include "adaptrack/polysys.hpp"
#include "adaptrack/randomize.hpp"

namespace adaptrack {

struct TrackerConfig {
  double dt_initial = 0.1;
  double dt_min = 1e-10;
  double dt_max = 0.1;
  int newton_max_iters = 3;
  double newton_tol = 1e-9;  // on the last update, relative to 1 + ||x||
  int successes_to_double = 3;
  int max_steps = 10000;
  bool truncation_enabled = false;
  double truncation_t_start = 0.3;
  double truncation_angle = 5.0 * std::numbers::pi / 6.0;
  double residual_accept_tol = 1e-8;
  double endpoint_tol = 1e-12;
  int endpoint_max_iters = 8;
  double max_norm = 1e8;  // paths leaving this ball are reported as diverged
  bool record_trace = false;

  /// Throws Error when the invariants on step sizes and tolerances fail.
  void validate() const;
};

struct Strategies {
  PatchStrategy patch;
  RandomizerKind randomizer = RandomizerKind::Fixed;
};

/// Read-only description shared by every path of one solve.
struct HomotopySetup {
  const ParamPolySystem* system = nullptr;
  CVector p_start;
  CVector p_target;
  Strategies strategies;
  PatchState fixed_patches;          // one per projective group
  RandomizerState fixed_randomizer;  // k = variable count, n = rows of G
  std::optional<int> scaling_degree;  // set when optimal scaling applies

  Index g_rows() const;
  CVector param_at(double t) const { return t * p_start + (1.0 - t) * p_target; }
  CVector param_direction() const { return p_start - p_target; }
};

/// Draws the fixed patch and fixed randomizer from `rng` and checks sizes.
HomotopySetup make_setup(const ParamPolySystem& system, CVector p_start, CVector p_target,
                         Strategies strategies, Rng& rng);

/// The square system A * G at the current patch and randomizer.
class LocalHomotopy {
 public:
  LocalHomotopy(const HomotopySetup& setup, PatchState patches, RandomizerState randomizer)
      : setup_(&setup), patches_(std::move(patches)), randomizer_(std::move(randomizer)) {}

  struct Eval {
    CVector h;
    CMatrix jx;
    CVector jt;
  };

  void evaluate(const CVector& x, double t, bool want_jacobian, bool want_jt, Eval& out,
                EvalWorkspace& ws) const;
  /// Unrandomized patched Jacobian J_x G (rows of F, then patch rows).
  CMatrix patched_jacobian(const CVector& x, double t, EvalWorkspace& ws) const;

  const HomotopySetup& setup() const { return *setup_; }
  const PatchState& patches() const { return patches_; }
  const RandomizerState& randomizer() const { return randomizer_; }

 private:
  const HomotopySetup* setup_;
  PatchState patches_;
  RandomizerState randomizer_;
};

/// One classical RK4 step of dx/dt = -(J_x H)^-1 J_t H from t to t - dt.
/// nullopt when a stage Jacobian is numerically singular.
std::optional<CVector> rk4_predict(const LocalHomotopy& h, const CVector& x, double t,
                                   double dt, EvalWorkspace& ws);

struct NewtonResult {
  CVector x;
  int iterations = 0;
  bool converged = false;
  bool singular = false;
  double last_update = 0.0;
};

NewtonResult newton_correct(const LocalHomotopy& h, const CVector& x, double t, int max_iters,
                            double tol, EvalWorkspace& ws);

struct PathSample {
  double t = 0.0;
  double imag_norm = 0.0;
};

/// Angle between the directions P2 - P1 and O - P2 in the (t, r) plane.
double turning_angle(PathSample p1, PathSample p2);

enum class TruncationDecision { Keep, Truncate };

/// P1 is the first sample with 0 < t < truncation_t_start and P2 the most
/// recent one; keeps the path until both exist and differ.
TruncationDecision truncation_test(std::span<const PathSample> history, double t_current,
                                   const TrackerConfig& config);

struct PathState {
  double t = 1.0;
  CVector x;
  double dt = 0.1;
  int consecutive_successes = 0;
  std::vector<PathSample> imag_history;
  int accepted = 0;
  int rejected = 0;
  std::uint64_t op_count = 0;

  int step_count() const { return accepted + rejected; }
};

enum class PathStatus { Converged, Truncated, StepSizeFailure, MaxStepsExceeded, Diverged };

const char* to_string(PathStatus status);

struct TraceRow {
  int path_id = 0;
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  bool accepted = false;
  double cond2 = 0.0;
  double imag_norm = 0.0;
  int newton_iters = 0;
};

struct PathOutcome {
  PathStatus status = PathStatus::StepSizeFailure;
  CVector x;  // endpoint, or last accepted point
  double t = 1.0;
  std::string reason;
  int steps = 0;  // attempted predictor-corrector steps
  int rejects = 0;
  std::uint64_t op_count = 0;
  double residual = 0.0;  // ||H(x, t)|| of the local square system
  std::vector<TraceRow> trace;
};

enum class StepResult { Accepted, Rejected, Finished };

class PathTracker {
 public:
  PathTracker(const HomotopySetup& setup, const TrackerConfig& config, int path_id = 0);

  /// Initialises at t = 1 from `start`, building patches and randomizer.
  void start(const CVector& x);
  /// One attempted predictor-corrector step.
  StepResult step();
  PathOutcome track(const CVector& start);

  const PathState& state() const { return state_; }
  const LocalHomotopy& local() const { return *local_; }
  const std::optional<PathOutcome>& outcome() const { return outcome_; }

 private:
  /// Patches and randomizer rebuilt at (x, t); returns x moved onto the patches.
  std::pair<LocalHomotopy, CVector> rebuild(const CVector& x, double t, bool place_fixed = false);
  void finish(PathStatus status, std::string reason);
  void polish_endpoint();
  void record(bool accepted, int newton_iters);

  const HomotopySetup* setup_;
  TrackerConfig config_;
  int path_id_;
  PathState state_;
  std::optional<LocalHomotopy> local_;
  std::optional<PathOutcome> outcome_;
  EvalWorkspace ws_;
  std::vector<TraceRow> trace_;
};

}  // namespace adaptrack
