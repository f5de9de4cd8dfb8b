#include "adaptrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "adaptrack/projective.hpp"

namespace adaptrack {

namespace {

constexpr double kSingularRcond = 1e-14;

std::optional<CVector> solve_square(const CMatrix& a, const CVector& b) {
  Eigen::PartialPivLU<CMatrix> lu(a);
  const double rc = lu.rcond();
  if (!(rc > kSingularRcond)) return std::nullopt;
  CVector x = lu.solve(b);
  if (!x.allFinite()) return std::nullopt;
  return x;
}

}  // namespace

void TrackerConfig::validate() const {
  if (!(dt_min > 0.0 && dt_min < dt_initial && dt_initial <= 1.0)) {
    throw Error("TrackerConfig: need 0 < dt_min < dt_initial <= 1");
  }
  if (!(dt_max >= dt_initial)) throw Error("TrackerConfig: dt_max must be >= dt_initial");
  if (!(newton_tol > 0.0 && residual_accept_tol > 0.0 && endpoint_tol > 0.0)) {
    throw Error("TrackerConfig: tolerances must be positive");
  }
  if (!(truncation_angle > 0.0 && truncation_angle < std::numbers::pi)) {
    throw Error("TrackerConfig: truncation angle must lie in (0, pi)");
  }
  if (newton_max_iters < 1 || successes_to_double < 1 || max_steps < 1 ||
      endpoint_max_iters < 1) {
    throw Error("TrackerConfig: iteration limits must be positive");
  }
}

Index HomotopySetup::g_rows() const {
  return system->size() + static_cast<Index>(system->structure().projective_count());
}

HomotopySetup make_setup(const ParamPolySystem& system, CVector p_start, CVector p_target,
                         Strategies strategies, Rng& rng) {
  const auto& st = system.structure();
  if (p_start.size() != st.parameter_count() || p_target.size() != st.parameter_count()) {
    throw DimensionMismatch("make_setup: parameter vectors do not match the system");
  }
  HomotopySetup s;
  s.system = &system;
  s.p_start = std::move(p_start);
  s.p_target = std::move(p_target);
  s.strategies = strategies;
  const auto proj = st.projective_groups();
  for (std::size_t g : proj) s.fixed_patches.push_back(init_fixed(st.groups()[g].size, rng));
  const Index n = s.g_rows();
  const Index k = st.variable_count();
  if (k > n) throw DimensionMismatch("make_setup: system is underdetermined");
  s.fixed_randomizer = fixed_randomizer(k, n, rng);

  if (strategies.patch.optimal_scaling && st.groups().size() == 1 && proj.size() == 1 &&
      system.size() == st.groups()[0].size - 1) {
    std::optional<int> common;
    bool ok = true;
    for (const auto& row : system.homogeneity()) {
      if (!row[0] || *row[0] <= 0 || (common && *common != *row[0])) {
        ok = false;
        break;
      }
      common = row[0];
    }
    if (ok) s.scaling_degree = common;
  }
  return s;
}

void LocalHomotopy::evaluate(const CVector& x, double t, bool want_jacobian, bool want_jt,
                             Eval& out, EvalWorkspace& ws) const {
  const auto& sys = *setup_->system;
  const auto& st = sys.structure();
  const Index nf = sys.size();
  const auto proj = st.projective_groups();
  const CVector p = setup_->param_at(t);
  const CVector dir = setup_->param_direction();

  const auto& required = randomizer_.required_inputs();
  std::vector<Index> f_rows;
  const bool all_rows = !randomizer_.is_selection();
  if (!all_rows) {
    for (Index r : required) {
      if (r < nf) f_rows.push_back(r);
    }
  }

  EvalResult res;
  EvalRequest req;
  req.value = true;
  req.jacobian = want_jacobian;
  req.param_dir = want_jt ? &dir : nullptr;
  req.rows = std::span<const Index>(f_rows);
  if (all_rows || !f_rows.empty()) sys.evaluate_into(x, p, req, res, ws);

  const Index m = static_cast<Index>(required.size());
  const Index nvars = st.variable_count();
  CVector g(m);
  CMatrix jg;
  CVector gt;
  if (want_jacobian) jg.setZero(m, nvars);
  if (want_jt) gt.setZero(m);

  Index f_pos = 0;
  for (Index r = 0; r < m; ++r) {
    const Index input = required[static_cast<std::size_t>(r)];
    if (input < nf) {
      const Index src = all_rows ? input : f_pos++;
      g(r) = res.value(src);
      if (want_jacobian) jg.row(r) = res.jacobian.row(src);
      if (want_jt) gt(r) = res.param_deriv(src);
    } else {
      const std::size_t pi = static_cast<std::size_t>(input - nf);
      const std::size_t grp = proj[pi];
      const Index off = st.group_offset(grp);
      const Index size = st.groups()[grp].size;
      const CVector& v = patches_[pi].v;
      g(r) = v.dot(x.segment(off, size)) - 1.0;
      if (want_jacobian) jg.row(r).segment(off, size) = v.adjoint();
      ws.ops += static_cast<std::uint64_t>(size);
    }
  }

  out.h = randomizer_.apply_compact(g);
  if (want_jacobian) out.jx = randomizer_.apply_compact(jg);
  if (want_jt) out.jt = randomizer_.apply_compact(gt);
}

CMatrix LocalHomotopy::patched_jacobian(const CVector& x, double t, EvalWorkspace& ws) const {
  const auto& sys = *setup_->system;
  const auto& st = sys.structure();
  const auto proj = st.projective_groups();
  EvalResult res;
  EvalRequest req;
  req.value = false;
  req.jacobian = true;
  sys.evaluate_into(x, setup_->param_at(t), req, res, ws);
  CMatrix jg = CMatrix::Zero(sys.size() + static_cast<Index>(proj.size()), st.variable_count());
  jg.topRows(sys.size()) = res.jacobian;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const Index off = st.group_offset(proj[i]);
    jg.row(sys.size() + static_cast<Index>(i)).segment(off, st.groups()[proj[i]].size) =
        patches_[i].v.adjoint();
  }
  return jg;
}

std::optional<CVector> rk4_predict(const LocalHomotopy& h, const CVector& x, double t,
                                   double dt, EvalWorkspace& ws) {
  const double step = -dt;
  LocalHomotopy::Eval e;
  auto velocity = [&](const CVector& xs, double ts) -> std::optional<CVector> {
    h.evaluate(xs, ts, true, true, e, ws);
    return solve_square(e.jx, -e.jt);
  };
  const auto k1 = velocity(x, t);
  if (!k1) return std::nullopt;
  const auto k2 = velocity(x + 0.5 * step * *k1, t + 0.5 * step);
  if (!k2) return std::nullopt;
  const auto k3 = velocity(x + 0.5 * step * *k2, t + 0.5 * step);
  if (!k3) return std::nullopt;
  const auto k4 = velocity(x + step * *k3, t + step);
  if (!k4) return std::nullopt;
  CVector out = x + (step / 6.0) * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
  if (!out.allFinite()) return std::nullopt;
  return out;
}

NewtonResult newton_correct(const LocalHomotopy& h, const CVector& x, double t, int max_iters,
                            double tol, EvalWorkspace& ws) {
  NewtonResult r;
  r.x = x;
  LocalHomotopy::Eval e;
  for (int it = 0; it < max_iters; ++it) {
    h.evaluate(r.x, t, true, false, e, ws);
    const auto dx = solve_square(e.jx, -e.h);
    if (!dx) {
      r.singular = true;
      return r;
    }
    r.x += *dx;
    r.iterations = it + 1;
    r.last_update = dx->norm();
    if (r.last_update <= tol * (1.0 + r.x.norm())) {
      r.converged = true;
      return r;
    }
  }
  return r;
}

double turning_angle(PathSample p1, PathSample p2) {
  const double ux = p2.t - p1.t;
  const double uy = p2.imag_norm - p1.imag_norm;
  const double wx = -p2.t;
  const double wy = -p2.imag_norm;
  const double cross = ux * wy - uy * wx;
  const double dot = ux * wx + uy * wy;
  if ((ux == 0.0 && uy == 0.0) || (wx == 0.0 && wy == 0.0)) return 0.0;
  return std::atan2(std::abs(cross), dot);
}

TruncationDecision truncation_test(std::span<const PathSample> history, double t_current,
                                   const TrackerConfig& config) {
  if (!(t_current < config.truncation_t_start)) return TruncationDecision::Keep;
  const PathSample* first = nullptr;
  for (const auto& s : history) {
    if (s.t > 0.0 && s.t < config.truncation_t_start) {
      first = &s;
      break;
    }
  }
  if (first == nullptr || history.empty()) return TruncationDecision::Keep;
  const PathSample p2 = history.back();
  const PathSample p1 = *first;
  if (!(p2.t > 0.0 && p2.t < p1.t)) return TruncationDecision::Keep;
  return turning_angle(p1, p2) >= config.truncation_angle ? TruncationDecision::Truncate
                                                          : TruncationDecision::Keep;
}

const char* to_string(PathStatus status) {
  switch (status) {
    case PathStatus::Converged: return "converged";
    case PathStatus::Truncated: return "truncated";
    case PathStatus::StepSizeFailure: return "step-size-failure";
    case PathStatus::MaxStepsExceeded: return "max-steps-exceeded";
    case PathStatus::Diverged: return "diverged";
  }
  return "unknown";
}

PathTracker::PathTracker(const HomotopySetup& setup, const TrackerConfig& config, int path_id)
    : setup_(&setup), config_(config), path_id_(path_id) {
  config_.validate();
}

std::pair<LocalHomotopy, CVector> PathTracker::rebuild(const CVector& x, double t,
                                                       bool place_fixed) {
  const auto& sys = *setup_->system;
  const auto& st = sys.structure();
  const auto proj = st.projective_groups();
  CVector xn = x;
  PatchState patches;
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const Index off = st.group_offset(proj[i]);
    const Index size = st.groups()[proj[i]].size;
    const CVector seg = xn.segment(off, size);
    PatchedPoint pp;
    switch (setup_->strategies.patch.kind) {
      case PatchKind::Fixed:
        pp.patch = setup_->fixed_patches[i];
        pp.representative = place_fixed ? place_on_patch(pp.patch, seg) : seg;
        break;
      case PatchKind::Orthogonal: pp = update_orthogonal(seg); break;
      case PatchKind::CoordinateWise: pp = update_coordwise(seg); break;
    }
    xn.segment(off, size) = pp.representative;
    patches.push_back(std::move(pp.patch));
  }

  if (setup_->scaling_degree) {
    // Single projective group with N polynomials of common degree.
    EvalResult res;
    EvalRequest req;
    req.value = false;
    req.jacobian = true;
    sys.evaluate_into(xn, setup_->param_at(t), req, res, ws_);
    const bool orthogonal = setup_->strategies.patch.kind == PatchKind::Orthogonal;
    const ScaleResult sc =
        optimal_scale(res.jacobian, patches[0].v, xn, *setup_->scaling_degree, orthogonal);
    patches[0].v = sc.v;
    patches[0].lambda = sc.lambda;
    xn = sc.point;
  }

  RandomizerState randomizer;
  switch (setup_->strategies.randomizer) {
    case RandomizerKind::Fixed: randomizer = setup_->fixed_randomizer; break;
    case RandomizerKind::Pseudoinverse:
    case RandomizerKind::LeverageScore: {
      const LocalHomotopy probe(*setup_, patches, setup_->fixed_randomizer);
      const CMatrix jg = probe.patched_jacobian(xn, t, ws_);
      randomizer = setup_->strategies.randomizer == RandomizerKind::Pseudoinverse
                       ? pinv_randomizer(jg)
                       : leverage_randomizer(jg);
      break;
    }
  }
  return {LocalHomotopy(*setup_, std::move(patches), std::move(randomizer)), std::move(xn)};
}

void PathTracker::start(const CVector& x) {
  if (x.size() != setup_->system->variable_count()) {
    throw DimensionMismatch("PathTracker::start: start point has wrong length");
  }
  state_ = PathState{};
  state_.t = 1.0;
  state_.dt = config_.dt_initial;
  outcome_.reset();
  trace_.clear();
  ws_.ops = 0;
  state_.x = x;
  try {
    // Points that already solve the local system keep their representative.
    auto [loc, xn] = rebuild(x, 1.0, false);
    {
      LocalHomotopy::Eval e;
      loc.evaluate(xn, 1.0, false, false, e, ws_);
      if (!(e.h.norm() <= config_.residual_accept_tol * (1.0 + xn.norm()))) {
        std::tie(loc, xn) = rebuild(x, 1.0, true);
      }
    }
    const NewtonResult nr =
        newton_correct(loc, xn, 1.0, config_.newton_max_iters, config_.newton_tol, ws_);
    if (nr.singular) {
      local_.emplace(std::move(loc));
      state_.x = std::move(xn);
      finish(PathStatus::StepSizeFailure, "start point is singular");
      return;
    }
    if (nr.converged) {
      auto [loc2, xn2] = rebuild(nr.x, 1.0);
      local_.emplace(std::move(loc2));
      state_.x = std::move(xn2);
    } else {
      local_.emplace(std::move(loc));
      state_.x = std::move(xn);
    }
  } catch (const Error& e) {
    finish(PathStatus::StepSizeFailure, std::string("start point rejected: ") + e.what());
    return;
  }
  state_.imag_history.push_back({1.0, imag_norm(setup_->system->structure(), state_.x)});
}

void PathTracker::record(bool accepted, int newton_iters) {
  if (!config_.record_trace || !local_) return;
  TraceRow row;
  row.path_id = path_id_;
  row.step = state_.step_count();
  row.t = state_.t;
  row.dt = state_.dt;
  row.accepted = accepted;
  LocalHomotopy::Eval e;
  EvalWorkspace scratch;  // trace work stays out of the operation count
  local_->evaluate(state_.x, state_.t, true, false, e, scratch);
  row.cond2 = cond2(e.jx);
  row.imag_norm = imag_norm(setup_->system->structure(), state_.x);
  row.newton_iters = newton_iters;
  trace_.push_back(row);
}

StepResult PathTracker::step() {
  if (outcome_) return StepResult::Finished;
  if (state_.step_count() >= config_.max_steps) {
    finish(PathStatus::MaxStepsExceeded, "step limit reached");
    return StepResult::Finished;
  }
  const double t_new = std::max(state_.t - state_.dt, 0.0);
  int newton_iters = 0;
  std::optional<std::pair<LocalHomotopy, CVector>> next;

  if (const auto pred = rk4_predict(*local_, state_.x, state_.t, state_.t - t_new, ws_)) {
    const NewtonResult nr = newton_correct(*local_, *pred, t_new, config_.newton_max_iters,
                                           config_.newton_tol, ws_);
    newton_iters = nr.iterations;
    if (nr.converged) {
      if (nr.x.norm() > config_.max_norm) {
        state_.x = nr.x;
        state_.t = t_new;
        finish(PathStatus::Diverged, "iterate left the bounded region");
        return StepResult::Finished;
      }
      LocalHomotopy::Eval e;
      local_->evaluate(nr.x, t_new, false, false, e, ws_);
      if (e.h.norm() <= config_.residual_accept_tol * (1.0 + nr.x.norm())) {
        try {
          next.emplace(rebuild(nr.x, t_new));
        } catch (const Error&) {
          next.reset();
        }
      }
    }
  }

  if (!next) {
    ++state_.rejected;
    state_.consecutive_successes = 0;
    state_.dt *= 0.5;
    state_.op_count = ws_.ops;
    record(false, newton_iters);
    if (state_.dt < config_.dt_min) {
      finish(PathStatus::StepSizeFailure, "step size fell below dt_min");
      return StepResult::Finished;
    }
    return StepResult::Rejected;
  }

  local_.emplace(std::move(next->first));
  state_.x = std::move(next->second);
  state_.t = t_new;
  ++state_.accepted;
  if (++state_.consecutive_successes >= config_.successes_to_double) {
    state_.dt = std::min(2.0 * state_.dt, config_.dt_max);
    state_.consecutive_successes = 0;
  }
  state_.imag_history.push_back({state_.t, imag_norm(setup_->system->structure(), state_.x)});
  state_.op_count = ws_.ops;
  record(true, newton_iters);

  if (state_.t <= 0.0) {
    polish_endpoint();
    return StepResult::Finished;
  }
  if (config_.truncation_enabled &&
      truncation_test(state_.imag_history, state_.t, config_) == TruncationDecision::Truncate) {
    finish(PathStatus::Truncated, "imaginary part turning away from zero");
    return StepResult::Finished;
  }
  return StepResult::Accepted;
}

void PathTracker::polish_endpoint() {
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < config_.endpoint_max_iters; ++it) {
    const NewtonResult nr = newton_correct(*local_, state_.x, 0.0, 1, config_.endpoint_tol, ws_);
    if (nr.singular || !nr.x.allFinite()) break;
    if (nr.last_update > previous) break;  // stagnated at roundoff level
    previous = nr.last_update;
    state_.x = nr.x;
    if (nr.converged) break;
  }
  try {
    auto [loc, xn] = rebuild(state_.x, 0.0);
    local_.emplace(std::move(loc));
    state_.x = std::move(xn);
  } catch (const Error&) {
  }
  LocalHomotopy::Eval e;
  local_->evaluate(state_.x, 0.0, false, false, e, ws_);
  const double residual = e.h.norm();
  if (residual <= config_.residual_accept_tol * (1.0 + state_.x.norm())) {
    finish(PathStatus::Converged, "");
  } else {
    finish(PathStatus::StepSizeFailure, "endpoint residual above tolerance");
  }
}

void PathTracker::finish(PathStatus status, std::string reason) {
  PathOutcome o;
  o.status = status;
  o.x = state_.x;
  o.t = state_.t;
  o.reason = std::move(reason);
  o.steps = state_.step_count();
  o.rejects = state_.rejected;
  state_.op_count = ws_.ops;
  o.op_count = ws_.ops;
  if (local_ && state_.x.allFinite()) {
    LocalHomotopy::Eval e;
    EvalWorkspace scratch;
    local_->evaluate(state_.x, state_.t, false, false, e, scratch);
    o.residual = e.h.norm();
  }
  o.trace = std::move(trace_);
  trace_.clear();
  outcome_ = std::move(o);
}

PathOutcome PathTracker::track(const CVector& start_point) {
  start(start_point);
  while (step() != StepResult::Finished) {
  }
  return *outcome_;
}

}  // namespace adaptrack
