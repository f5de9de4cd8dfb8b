#include "adaptrack/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "adaptrack/projective.hpp"

namespace adaptrack {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Per-group degree signature of a polynomial in the variables.
std::vector<int> degree_signature(const Polynomial& poly, const VarStructure& st) {
  std::vector<int> sig;
  for (std::size_t g = 0; g < st.groups().size(); ++g) {
    const Index b = st.group_offset(g);
    sig.push_back(poly.degree_in(b, b + st.groups()[g].size));
  }
  return sig;
}

/// Randomizes F(x; p_star) class by class down to `keep` rows.  Rows sharing
/// a degree signature are combined only with each other, so every kept row
/// retains the lowest degree available.
std::vector<Polynomial> randomize_by_class(const std::vector<Polynomial>& rows,
                                           const VarStructure& st, Index keep, Rng& rng) {
  std::vector<std::vector<int>> signatures;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto sig = degree_signature(rows[i], st);
    auto it = std::find(signatures.begin(), signatures.end(), sig);
    if (it == signatures.end()) {
      signatures.push_back(sig);
      members.push_back({i});
    } else {
      members[static_cast<std::size_t>(it - signatures.begin())].push_back(i);
    }
  }
  std::vector<std::size_t> order(signatures.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const int da = rows[members[a].front()].total_degree();
    const int db = rows[members[b].front()].total_degree();
    if (da != db) return da < db;
    return members[a].size() < members[b].size();
  });

  std::vector<Polynomial> out;
  Index remaining = keep;
  for (std::size_t c : order) {
    if (remaining == 0) break;
    const auto& m = members[c];
    const Index n_c = static_cast<Index>(m.size());
    const Index take = std::min(n_c, remaining);
    const CMatrix q = random_unit_matrix(take, n_c - take, rng);
    for (Index j = 0; j < take; ++j) {
      Polynomial row = rows[m[static_cast<std::size_t>(j)]];
      for (Index l = take; l < n_c; ++l) row += q(j, l - take) * rows[m[static_cast<std::size_t>(l)]];
      out.push_back(std::move(row));
    }
    remaining -= take;
  }
  if (remaining > 0) throw DimensionMismatch("ab_initio: system is underdetermined");
  return out;
}

}  // namespace

unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_jobs(jobs), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double normalized_residual(const ParamPolySystem& system, const CVector& x, const CVector& p) {
  return system.evaluate(phase_normalize(system.structure(), x), p).norm();
}

bool classify_real(const VarStructure& structure, const CVector& x, double tol) {
  const double n = phase_normalize(structure, x).norm();
  return imag_norm(structure, x) <= tol * n;
}

std::vector<std::size_t> dedup(const VarStructure& structure, const std::vector<CVector>& points,
                               double tol) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool fresh = true;
    for (std::size_t k : kept) {
      if (projective_distance(structure, points[i], points[k]) <= tol) {
        fresh = false;
        break;
      }
    }
    if (fresh) kept.push_back(i);
  }
  return kept;
}

AbInitioReport ab_initio(const ParamPolySystem& system, Rng& rng, const AbInitioOptions& options) {
  const auto t0 = Clock::now();
  const VarStructure& st = system.structure();
  const Index nvars = st.variable_count();
  const auto proj = st.projective_groups();

  AbInitioReport report;
  report.start.p_star = random_unit_vector(st.parameter_count(), rng);
  PatchState patches;
  for (std::size_t g : proj) patches.push_back(init_fixed(st.groups()[g].size, rng));

  std::vector<Polynomial> fx;
  for (const auto& poly : system.polys()) fx.push_back(poly.substitute_tail(nvars, report.start.p_star));
  const Index keep = nvars - static_cast<Index>(proj.size());
  std::vector<Polynomial> square = randomize_by_class(fx, st, keep, rng);

  // Homotopy in (x; s): (1 - s) G(x) + gamma s (x_i^d_i - 1), all affine.
  const Index arity = nvars + 1;
  for (auto& row : square) row = row.extend(arity);
  for (std::size_t i = 0; i < proj.size(); ++i) {
    const Index off = st.group_offset(proj[i]);
    Polynomial eq = Polynomial::constant(arity, -1.0);
    for (Index k = 0; k < patches[i].v.size(); ++k) {
      eq += std::conj(patches[i].v(k)) * Polynomial::variable(arity, off + k);
    }
    square.push_back(std::move(eq));
  }
  const Complex gamma = random_unit_complex(rng);
  const Polynomial s = Polynomial::variable(arity, nvars);
  const Polynomial one = Polynomial::constant(arity, 1.0);
  std::vector<int> degrees;
  std::vector<Polynomial> homotopy;
  for (Index i = 0; i < nvars; ++i) {
    const Polynomial& g = square[static_cast<std::size_t>(i)];
    const int d = g.degree_in(0, nvars);
    if (d < 1) throw Error("ab_initio: randomized row is constant");
    degrees.push_back(d);
    homotopy.push_back((one - s) * g +
                       gamma * s * (Polynomial::variable(arity, i, d) - one));
  }
  const ParamPolySystem hsys(VarStructure({{GroupKind::Affine, nvars}}, 1), std::move(homotopy));

  std::size_t paths = 1;
  for (int d : degrees) paths *= static_cast<std::size_t>(d);
  report.paths = paths;

  Rng unused(0);
  CVector one_v(1), zero_v(1);
  one_v(0) = 1.0;
  zero_v(0) = 0.0;
  const HomotopySetup setup = make_setup(hsys, one_v, zero_v, Strategies{}, unused);
  TrackerConfig cfg = options.tracker;
  cfg.truncation_enabled = false;
  cfg.record_trace = false;

  std::vector<PathOutcome> outcomes(paths);
  parallel_for(paths, options.jobs, [&](std::size_t index) {
    CVector x(nvars);
    std::size_t rest = index;
    for (Index i = 0; i < nvars; ++i) {
      const int d = degrees[static_cast<std::size_t>(i)];
      const std::size_t k = rest % static_cast<std::size_t>(d);
      rest /= static_cast<std::size_t>(d);
      x(i) = std::polar(1.0, 2.0 * std::numbers::pi * double(k) / double(d));
    }
    PathTracker tracker(setup, cfg, static_cast<int>(index));
    outcomes[index] = tracker.track(x);
  });

  std::vector<CVector> candidates;
  std::vector<double> residuals;
  const CVector s0 = zero_v;
  for (const auto& o : outcomes) {
    ++report.by_status[o.status];
    report.total_steps += static_cast<std::uint64_t>(o.steps);
    if (o.status != PathStatus::Converged) {
      ++report.failed;
      continue;
    }
    ++report.converged;
    const double res = normalized_residual(system, o.x, report.start.p_star);
    if (!(res <= options.residual_tol)) {
      ++report.extraneous;
      continue;
    }
    if (!(cond2(hsys.jacobian_x(o.x, s0)) <= options.singular_cond)) {
      ++report.singular;
      continue;
    }
    candidates.push_back(o.x);
    residuals.push_back(res);
  }
  const auto kept = dedup(st, candidates, options.dedup_tol);
  report.duplicates = candidates.size() - kept.size();
  for (std::size_t k : kept) {
    report.start.points.push_back(candidates[k]);
    report.start.residuals.push_back(residuals[k]);
  }
  report.seconds = seconds_since(t0);
  if (options.expected && report.start.points.size() < *options.expected) {
    throw DeficientCount("ab_initio: found " + std::to_string(report.start.points.size()) +
                         " of " + std::to_string(*options.expected) + " expected roots");
  }
  return report;
}

const char* to_string(EndpointKind kind) {
  switch (kind) {
    case EndpointKind::Real: return "real";
    case EndpointKind::Nonreal: return "nonreal";
    case EndpointKind::Duplicate: return "duplicate";
    case EndpointKind::Extraneous: return "extraneous";
    case EndpointKind::Truncated: return "truncated";
    case EndpointKind::Failed: return "failed";
  }
  return "unknown";
}

double SolveReport::avg_steps_per_path() const {
  return outcomes.empty() ? 0.0 : double(total_steps) / double(outcomes.size());
}

std::vector<TraceRow> SolveReport::trace() const {
  std::vector<TraceRow> rows;
  for (const auto& o : outcomes) rows.insert(rows.end(), o.trace.begin(), o.trace.end());
  return rows;
}

std::vector<CVector> SolveReport::real_solutions() const {
  std::vector<CVector> out;
  for (const auto& s : solutions) {
    if (s.real) out.push_back(s.x);
  }
  return out;
}

SolveReport param_solve(const ParamPolySystem& system, const StartSet& start,
                        const CVector& p_hat, const SolveOptions& options) {
  const auto t0 = Clock::now();
  Rng rng = substream(options.seed, 0);
  HomotopySetup setup = make_setup(system, start.p_star, p_hat, options.strategies, rng);
  if (options.fixed_patches) {
    if (options.fixed_patches->size() != setup.fixed_patches.size()) {
      throw DimensionMismatch("param_solve: one fixed patch per projective group expected");
    }
    setup.fixed_patches = *options.fixed_patches;
  }
  if (options.fixed_randomizer) {
    if (options.fixed_randomizer->outputs() != setup.fixed_randomizer.outputs() ||
        options.fixed_randomizer->inputs() != setup.fixed_randomizer.inputs()) {
      throw DimensionMismatch("param_solve: fixed randomizer has the wrong shape");
    }
    setup.fixed_randomizer = *options.fixed_randomizer;
  }

  SolveReport report;
  report.outcomes.resize(start.points.size());
  parallel_for(start.points.size(), options.jobs, [&](std::size_t i) {
    PathTracker tracker(setup, options.tracker, static_cast<int>(i));
    report.outcomes[i] = tracker.track(start.points[i]);
  });

  const VarStructure& st = system.structure();
  report.kinds.assign(report.outcomes.size(), EndpointKind::Failed);
  std::vector<CVector> accepted;
  for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
    const PathOutcome& o = report.outcomes[i];
    report.total_steps += static_cast<std::uint64_t>(o.steps);
    report.total_ops += o.op_count;
    if (o.status == PathStatus::Truncated) {
      report.kinds[i] = EndpointKind::Truncated;
      ++report.truncated;
      continue;
    }
    if (o.status != PathStatus::Converged) {
      ++report.failed;
      continue;
    }
    const double res = normalized_residual(system, o.x, p_hat);
    if (!(res <= options.residual_tol)) {
      report.kinds[i] = EndpointKind::Extraneous;
      ++report.extraneous;
      continue;
    }
    bool duplicate = false;
    for (const auto& y : accepted) {
      if (projective_distance(st, o.x, y) <= options.dedup_tol) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      report.kinds[i] = EndpointKind::Duplicate;
      ++report.duplicates;
      continue;
    }
    accepted.push_back(o.x);
    const bool real = classify_real(st, o.x, options.real_tol);
    report.kinds[i] = real ? EndpointKind::Real : EndpointKind::Nonreal;
    ++(real ? report.real : report.nonreal);
    report.solutions.push_back(Solution{o.x, real, res, static_cast<int>(i)});
  }
  report.seconds = seconds_since(t0);
  return report;
}

std::vector<BenchCombination> standard_combinations() {
  std::vector<BenchCombination> out;
  for (const char* label : {"FP/FR", "OP/FR", "CWP/FR", "OP/PIR", "CWP/LSR", "CWP/LSR/ET"}) {
    out.push_back(parse_combination(label));
  }
  return out;
}

BenchCombination parse_combination(const std::string& label) {
  BenchCombination c;
  c.label = label;
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= label.size()) {
    const std::size_t slash = label.find('/', pos);
    const std::size_t end = slash == std::string::npos ? label.size() : slash;
    parts.push_back(label.substr(pos, end - pos));
    pos = end + 1;
  }
  if (parts.size() < 2 || parts.size() > 3) throw Error("bad strategy label '" + label + "'");
  static const std::map<std::string, PatchKind> patches{
      {"FP", PatchKind::Fixed}, {"OP", PatchKind::Orthogonal}, {"CWP", PatchKind::CoordinateWise}};
  static const std::map<std::string, RandomizerKind> randomizers{
      {"FR", RandomizerKind::Fixed},
      {"PIR", RandomizerKind::Pseudoinverse},
      {"LSR", RandomizerKind::LeverageScore}};
  const auto p = patches.find(parts[0]);
  const auto r = randomizers.find(parts[1]);
  if (p == patches.end() || r == randomizers.end()) {
    throw Error("bad strategy label '" + label + "'");
  }
  c.strategies.patch.kind = p->second;
  c.strategies.randomizer = r->second;
  if (parts.size() == 3) {
    if (parts[2] != "ET") throw Error("bad strategy label '" + label + "'");
    c.truncate = true;
  }
  return c;
}

CVector bench_instance_parameters(ProblemKind kind, std::uint64_t seed, std::size_t index) {
  Rng rng = substream(seed, 1000 + index);
  if (kind == ProblemKind::TwistedCubic) {
    std::normal_distribution<double> n01(0.0, 1.0);
    CVector p(3);
    for (Index k = 0; k < 3; ++k) p(k) = n01(rng);
    return p;
  }
  const SyntheticInstance inst = synth_instance(kind, rng);
  return correspondence_parameters(kind, inst.points);
}

std::vector<BenchRow> bench(ProblemKind kind, const ParamPolySystem& system,
                            const StartSet& start, const BenchOptions& options) {
  if (options.instances < 1) throw Error("bench: need at least one instance");
  std::vector<CVector> targets;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < options.instances; ++i) {
    targets.push_back(bench_instance_parameters(kind, options.seed, i));
    seeds.push_back(substream(options.seed, i)());
  }

  auto run = [&](const BenchCombination& c, BenchRow& row,
                 std::vector<std::vector<CVector>>& reals) {
    row.label = c.label;
    row.instances = options.instances;
    reals.assign(options.instances, {});
    std::uint64_t paths = 0;
    double ops = 0.0;
    double secs = 0.0;
    for (std::size_t i = 0; i < options.instances; ++i) {
      SolveOptions so = options.solve;
      so.strategies = c.strategies;
      so.strategies.patch.optimal_scaling = options.solve.strategies.patch.optimal_scaling;
      so.tracker.truncation_enabled = c.truncate;
      so.seed = seeds[i];
      const SolveReport rep = param_solve(system, start, targets[i], so);
      row.total_steps += rep.total_steps;
      paths += rep.outcomes.size();
      ops += double(rep.total_ops);
      secs += rep.seconds;
      row.truncated += rep.truncated;
      row.failed += rep.failed;
      reals[i] = rep.real_solutions();
    }
    row.avg_steps_per_path = paths ? double(row.total_steps) / double(paths) : 0.0;
    row.avg_operations = ops / double(options.instances);
    row.avg_seconds = secs / double(options.instances);
  };

  std::vector<BenchRow> rows(options.combinations.size());
  std::vector<std::vector<std::vector<CVector>>> found(options.combinations.size());
  std::vector<std::vector<CVector>> reference(options.instances);
  bool have_reference = false;
  for (std::size_t c = 0; c < options.combinations.size(); ++c) {
    run(options.combinations[c], rows[c], found[c]);
    if (!options.combinations[c].truncate) {
      have_reference = true;
      for (std::size_t i = 0; i < options.instances; ++i) {
        reference[i].insert(reference[i].end(), found[c][i].begin(), found[c][i].end());
      }
    }
  }
  if (!have_reference) {
    for (const auto& combo : options.combinations) {
      BenchCombination off = combo;
      off.truncate = false;
      BenchRow unused;
      std::vector<std::vector<CVector>> reals;
      run(off, unused, reals);
      for (std::size_t i = 0; i < options.instances; ++i) {
        reference[i].insert(reference[i].end(), reals[i].begin(), reals[i].end());
      }
    }
  }

  const VarStructure& st = system.structure();
  const double tol = options.solve.dedup_tol;
  for (std::size_t i = 0; i < options.instances; ++i) {
    std::vector<CVector> unique;
    for (std::size_t k : dedup(st, reference[i], tol)) unique.push_back(reference[i][k]);
    reference[i] = std::move(unique);
  }
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t i = 0; i < options.instances; ++i) {
      for (const auto& r : reference[i]) {
        ++rows[c].real_reference;
        for (const auto& y : found[c][i]) {
          if (projective_distance(st, r, y) <= tol) {
            ++rows[c].real_found;
            break;
          }
        }
      }
    }
    rows[c].real_recall =
        rows[c].real_reference ? double(rows[c].real_found) / double(rows[c].real_reference) : 1.0;
  }
  return rows;
}

}  // namespace adaptrack
