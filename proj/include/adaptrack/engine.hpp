// End-to-end solving: the ab initio solve at generic parameters, parameter
// homotopies to target parameters, endpoint classification, and benchmarks.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptrack/problems.hpp"
#include "adaptrack/tracker.hpp"

namespace adaptrack {

class DeficientCount : public Error {
 public:
  using Error::Error;
};

/// Solutions of F(x; p_star) = 0 used as start points.
struct StartSet {
  CVector p_star;
  std::vector<CVector> points;
  std::vector<double> residuals;
};

/// Runs fn(i) for i in [0, count) on `jobs` threads (0: hardware threads).
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);
unsigned resolve_jobs(unsigned jobs);

/// ||F(x; p)|| with every projective group scaled to unit 2-norm.
double normalized_residual(const ParamPolySystem& system, const CVector& x, const CVector& p);

/// Real iff the imaginary part of the phase-normalized point is at most
/// tol * ||x||.
bool classify_real(const VarStructure& structure, const CVector& x, double tol = 1e-6);

/// Indices of the first representative of each cluster of points within
/// `tol` projective distance.
std::vector<std::size_t> dedup(const VarStructure& structure, const std::vector<CVector>& points,
                               double tol = 1e-6);

struct AbInitioOptions {
  TrackerConfig tracker;
  unsigned jobs = 0;
  double dedup_tol = 1e-6;
  double residual_tol = 1e-8;
  double singular_cond = 1e10;
  std::optional<std::size_t> expected;  // DeficientCount below this
};

struct AbInitioReport {
  StartSet start;
  std::size_t paths = 0;
  std::size_t converged = 0;
  std::size_t extraneous = 0;
  std::size_t singular = 0;
  std::size_t duplicates = 0;
  std::size_t failed = 0;
  std::map<PathStatus, std::size_t> by_status;
  std::uint64_t total_steps = 0;
  double seconds = 0.0;
};

/// Generic p_star with unit-modulus entries, then a total-degree homotopy
/// with a random gamma on the square system obtained from F(x; p_star) by
/// fixed random patches and degree-class-wise randomization.  Endpoints that
/// are singular, do not solve F(x; p_star), or repeat are dropped.
AbInitioReport ab_initio(const ParamPolySystem& system, Rng& rng,
                         const AbInitioOptions& options = {});

enum class EndpointKind { Real, Nonreal, Duplicate, Extraneous, Truncated, Failed };
const char* to_string(EndpointKind kind);

struct Solution {
  CVector x;
  bool real = false;
  double residual = 0.0;
  int path_id = 0;
};

struct SolveOptions {
  TrackerConfig tracker;
  Strategies strategies;
  unsigned jobs = 0;
  std::uint64_t seed = 0;
  double dedup_tol = 1e-6;
  double real_tol = 1e-6;
  double residual_tol = 1e-8;
  std::optional<PatchState> fixed_patches;
  std::optional<RandomizerState> fixed_randomizer;
};

struct SolveReport {
  std::vector<PathOutcome> outcomes;
  std::vector<EndpointKind> kinds;
  std::vector<Solution> solutions;  // deduplicated, residual-filtered
  std::size_t real = 0;
  std::size_t nonreal = 0;
  std::size_t extraneous = 0;
  std::size_t duplicates = 0;
  std::size_t truncated = 0;
  std::size_t failed = 0;
  std::uint64_t total_steps = 0;
  std::uint64_t total_ops = 0;
  double seconds = 0.0;

  double avg_steps_per_path() const;
  std::vector<TraceRow> trace() const;
  std::vector<CVector> real_solutions() const;
};

/// Tracks every start point from start.p_star to p_hat.
SolveReport param_solve(const ParamPolySystem& system, const StartSet& start,
                        const CVector& p_hat, const SolveOptions& options = {});

struct BenchCombination {
  std::string label;
  Strategies strategies;
  bool truncate = false;
};

/// FP/FR, OP/FR, CWP/FR, OP/PIR, CWP/LSR, CWP/LSR/ET.
std::vector<BenchCombination> standard_combinations();
BenchCombination parse_combination(const std::string& label);

struct BenchRow {
  std::string label;
  std::size_t instances = 0;
  double avg_steps_per_path = 0.0;
  double avg_operations = 0.0;  // per instance
  double avg_seconds = 0.0;     // per instance
  double real_recall = 1.0;
  std::size_t real_found = 0;
  std::size_t real_reference = 0;
  std::size_t truncated = 0;
  std::size_t failed = 0;
  std::uint64_t total_steps = 0;
};

struct BenchOptions {
  std::size_t instances = 10;
  std::uint64_t seed = 0;
  SolveOptions solve;
  std::vector<BenchCombination> combinations = standard_combinations();
};

/// Target parameters for instance `index` of a benchmark.
CVector bench_instance_parameters(ProblemKind kind, std::uint64_t seed, std::size_t index);

/// Runs every combination over the same instances.  Recall is measured
/// against the union of real solutions found by the truncation-off runs.
std::vector<BenchRow> bench(ProblemKind kind, const ParamPolySystem& system,
                            const StartSet& start, const BenchOptions& options);

}  // namespace adaptrack
