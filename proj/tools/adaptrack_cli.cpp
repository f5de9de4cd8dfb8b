// adaptrack: ab initio solves, parameter solves, strategy benchmarks, and
// the worked examples.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adaptrack/engine.hpp"
#include "adaptrack/io.hpp"
#include "adaptrack/patch.hpp"
#include "adaptrack/projective.hpp"

using namespace adaptrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct RunConfig {
  std::string problem = "twisted-cubic";
  std::string system_file;
  std::string start_file;
  std::string instance_file;
  std::string patch = "fixed";
  std::string randomizer = "fixed";
  bool optimal_scaling = false;
  std::string truncate = "off";
  std::optional<std::uint64_t> seed;
  std::size_t instances = 10;
  unsigned jobs = 0;
  std::string trace_file;
  std::string out_file;
  bool strict = false;
};

std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("ADAPTRACK_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error("ADAPTRACK_SEED must be a nonnegative integer");
    }
  }
  return 0;
}

Strategies parse_strategies(const RunConfig& cfg) {
  Strategies s;
  if (cfg.patch == "fixed") s.patch.kind = PatchKind::Fixed;
  else if (cfg.patch == "orthogonal") s.patch.kind = PatchKind::Orthogonal;
  else if (cfg.patch == "coordwise") s.patch.kind = PatchKind::CoordinateWise;
  else throw Error("unknown patch '" + cfg.patch + "'");
  if (cfg.randomizer == "fixed") s.randomizer = RandomizerKind::Fixed;
  else if (cfg.randomizer == "pinv") s.randomizer = RandomizerKind::Pseudoinverse;
  else if (cfg.randomizer == "leverage") s.randomizer = RandomizerKind::LeverageScore;
  else throw Error("unknown randomizer '" + cfg.randomizer + "'");
  s.patch.optimal_scaling = cfg.optimal_scaling;
  return s;
}

bool parse_truncate(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw Error("--truncate expects on or off");
}

std::optional<std::size_t> expected_roots(const RunConfig& cfg) {
  if (!cfg.system_file.empty()) return std::nullopt;
  switch (parse_problem(cfg.problem)) {
    case ProblemKind::TwistedCubic: return 3;
    case ProblemKind::FivePoint: return 10;
    case ProblemKind::SixPoint: return 52;
  }
  return std::nullopt;
}

ParamPolySystem load_system(const RunConfig& cfg) {
  if (!cfg.system_file.empty()) return io::system_from_json(io::read_json_file(cfg.system_file));
  return problem_system(parse_problem(cfg.problem));
}

StartSet twisted_cubic_start() {
  StartSet s;
  s.p_star = CVector::Ones(3);
  s.points = fixtures::twisted_cubic_points();
  s.residuals.assign(s.points.size(), 0.0);
  return s;
}

StartSet compute_start(const RunConfig& cfg, const ParamPolySystem& sys, bool announce) {
  Rng rng = substream(resolve_seed(cfg), 0);
  AbInitioOptions opt;
  opt.jobs = cfg.jobs;
  const AbInitioReport rep = ab_initio(sys, rng, opt);
  if (announce) {
    std::cerr << "ab initio: " << rep.paths << " paths, " << rep.start.points.size()
              << " start points in " << std::fixed << std::setprecision(2) << rep.seconds
              << " s\n";
  }
  return rep.start;
}

StartSet obtain_start(const RunConfig& cfg, const ParamPolySystem& sys) {
  if (!cfg.start_file.empty()) return io::start_set_from_json(io::read_json_file(cfg.start_file));
  if (cfg.system_file.empty() && parse_problem(cfg.problem) == ProblemKind::TwistedCubic) {
    return twisted_cubic_start();
  }
  return compute_start(cfg, sys, true);
}

int cmd_abinitio(const RunConfig& cfg) {
  const ParamPolySystem sys = load_system(cfg);
  Rng rng = substream(resolve_seed(cfg), 0);
  AbInitioOptions opt;
  opt.jobs = cfg.jobs;
  const AbInitioReport rep = ab_initio(sys, rng, opt);
  double max_res = 0.0;
  for (double r : rep.start.residuals) max_res = std::max(max_res, r);
  std::cout << rep.start.points.size() << " start points\n"
            << "paths tracked: " << rep.paths << ", converged: " << rep.converged
            << ", extraneous: " << rep.extraneous << ", singular: " << rep.singular
            << ", duplicates: " << rep.duplicates << ", failed: " << rep.failed << '\n'
            << "max residual: " << std::scientific << std::setprecision(3) << max_res << '\n'
            << "seconds: " << std::fixed << std::setprecision(2) << rep.seconds << '\n';
  if (!cfg.out_file.empty()) io::write_json_file(cfg.out_file, io::start_set_to_json(rep.start));
  const auto expected = expected_roots(cfg);
  if (expected && rep.start.points.size() < *expected) {
    std::cerr << "error: expected " << *expected << " start points\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_solve(const RunConfig& cfg) {
  const ParamPolySystem sys = load_system(cfg);
  const std::uint64_t seed = resolve_seed(cfg);
  CVector target;
  if (!cfg.instance_file.empty()) {
    const SyntheticInstance inst = io::instance_from_json(io::read_json_file(cfg.instance_file));
    target = correspondence_parameters(inst.kind, inst.points);
  } else if (!cfg.system_file.empty()) {
    throw Error("--system requires --instance or a twisted-cubic style target");
  } else {
    const ProblemKind kind = parse_problem(cfg.problem);
    target = kind == ProblemKind::TwistedCubic ? fixtures::twisted_target()
                                               : bench_instance_parameters(kind, seed, 0);
  }
  if (target.size() != sys.parameter_count()) {
    throw Error("target parameters do not match the system");
  }
  const StartSet start = obtain_start(cfg, sys);

  SolveOptions opt;
  opt.strategies = parse_strategies(cfg);
  opt.tracker.truncation_enabled = parse_truncate(cfg.truncate);
  opt.tracker.record_trace = !cfg.trace_file.empty();
  opt.jobs = cfg.jobs;
  opt.seed = seed;
  const SolveReport rep = param_solve(sys, start, target, opt);

  std::size_t step_failures = 0;
  for (const auto& o : rep.outcomes) {
    if (o.status == PathStatus::StepSizeFailure) ++step_failures;
  }
  std::cout << "paths: " << rep.outcomes.size() << '\n'
            << "real: " << rep.real << ", nonreal: " << rep.nonreal
            << ", truncated: " << rep.truncated << ", failed: " << rep.failed
            << ", extraneous: " << rep.extraneous << ", duplicates: " << rep.duplicates << '\n'
            << "avg steps/path: " << std::fixed << std::setprecision(3)
            << rep.avg_steps_per_path() << '\n'
            << "operations: " << rep.total_ops << '\n'
            << "seconds: " << std::setprecision(4) << rep.seconds << '\n';

  if (!cfg.out_file.empty()) {
    io::write_json_file(cfg.out_file, io::solutions_to_json(sys.structure(), rep.solutions));
  }
  if (!cfg.trace_file.empty()) {
    std::ofstream out(cfg.trace_file);
    if (!out) throw Error("cannot write '" + cfg.trace_file + "'");
    io::write_trace_csv(out, rep.trace());
  }
  if (cfg.strict && step_failures > 0) {
    std::cerr << "error: " << step_failures << " path(s) hit the minimum step size\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg) {
  if (cfg.instances < 1) throw Error("--instances must be at least 1");
  const ProblemKind kind = parse_problem(cfg.problem);
  const ParamPolySystem sys = problem_system(kind);
  const StartSet start = obtain_start(cfg, sys);
  BenchOptions opt;
  opt.instances = cfg.instances;
  opt.seed = resolve_seed(cfg);
  opt.solve.jobs = cfg.jobs;
  opt.solve.strategies.patch.optimal_scaling = cfg.optimal_scaling;
  const auto rows = bench(kind, sys, start, opt);
  if (cfg.out_file.empty()) {
    io::write_bench_csv(std::cout, rows);
  } else {
    std::ofstream out(cfg.out_file);
    if (!out) throw Error("cannot write '" + cfg.out_file + "'");
    io::write_bench_csv(out, rows);
    io::write_bench_csv(std::cout, rows);
  }
  return kExitOk;
}

int cmd_instance(const RunConfig& cfg) {
  const ProblemKind kind = parse_problem(cfg.problem);
  Rng rng = substream(resolve_seed(cfg), 1000);
  const SyntheticInstance inst = synth_instance(kind, rng);
  const io::json j = io::instance_to_json(inst);
  if (cfg.out_file.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    io::write_json_file(cfg.out_file, j);
  }
  return kExitOk;
}

CMatrix patched_jacobian(const ParamPolySystem& f, const CVector& x, const CVector& v) {
  CMatrix j(f.size() + 1, x.size());
  j.topRows(f.size()) = f.jacobian_x(x, CVector(0));
  j.row(f.size()) = v.adjoint();
  return j;
}

int cmd_demo() {
  const ParamPolySystem f = twisted_cubic();
  const CVector z = fixtures::twisted_cubic_points()[0];
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "twisted cubic at [1,-1,1,-1]\n";
  for (const auto& v : fixtures::table1_patches()) {
    const CVector x = place_on_patch(fixed_patch(v), z);
    std::cout << "  fixed patch " << v.real().transpose() << "  cond2 "
              << cond2(patched_jacobian(f, x, v)) << '\n';
  }
  const PatchedPoint orth = update_orthogonal(z);
  std::cout << "  orthogonal patch  cond2 "
            << cond2(patched_jacobian(f, orth.representative, orth.patch.v)) << '\n';
  for (Index j = 0; j < 4; ++j) {
    CVector e = CVector::Zero(4);
    e(j) = 1.0;
    const CVector x = place_on_patch(fixed_patch(e), z);
    std::cout << "  coordinate patch x" << j << " = 1  cond2 " << cond2(patched_jacobian(f, x, e))
              << '\n';
  }

  const ParamPolySystem h = fixtures::twisted_cubic_affine();
  const CMatrix jh = h.jacobian_x(z, CVector(0));
  std::cout << "randomizations of [f; x0 - 1]\n";
  for (const auto& q : fixtures::table2_q()) {
    const RandomizerState a = fixed_randomizer_from_q(CMatrix(q));
    std::cout << "  Q " << q.real().transpose() << "  cond2 " << cond2(a.apply(jh)) << '\n';
  }
  const LeverageSelection lev = leverage_selection(jh);
  std::cout << "  leverage scores " << lev.scores.transpose() << "  cond2 "
            << cond2(lev.randomizer.apply(jh)) << '\n';

  const ParamPolySystem quad = quadric_system();
  const CVector zq = fixtures::quadric_solution();
  CVector alpha = CVector::Zero(4);
  alpha(3) = 1.0;
  const ScaleResult sc = optimal_scale(quad.jacobian_x(zq, CVector(0)), alpha, zq, 2, false);
  std::cout << "optimal scaling, coordinate patch x3 = 1: lambda " << sc.lambda << '\n';
  const CVector zo = zq / zq.norm();
  const ScaleResult so = optimal_scale(quad.jacobian_x(zo, CVector(0)), zo, zo, 2, true);
  std::cout << "optimal scaling, orthogonal patch: lambda " << so.lambda << '\n';

  const ParamPolySystem fam = twisted_cubic_family();
  std::cout << "parameterized twisted cubic to p = (-1, 0.1i, 0)\n";
  for (const auto& c : standard_combinations()) {
    if (c.truncate) continue;
    SolveOptions opt;
    opt.strategies = c.strategies;
    const SolveReport rep = param_solve(fam, twisted_cubic_start(), fixtures::twisted_target(), opt);
    std::cout << "  " << std::left << std::setw(8) << c.label << std::right
              << " converged " << rep.real + rep.nonreal << "/3, avg steps/path "
              << rep.avg_steps_per_path() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter homotopy solver with adaptive patches and randomization"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem, "twisted-cubic | five-point | six-point")
        ->check(CLI::IsMember({"twisted-cubic", "five-point", "six-point"}));
    sub->add_option("--system", cfg.system_file, "System JSON file instead of --problem");
    sub->add_option("--seed", cfg.seed, "Master seed (falls back to ADAPTRACK_SEED)");
    sub->add_option("--jobs", cfg.jobs, "Worker threads (0: all cores)");
    sub->add_option("--out", cfg.out_file, "Output file");
  };
  auto add_strategy = [&](CLI::App* sub) {
    sub->add_option("--patch", cfg.patch, "fixed | orthogonal | coordwise")
        ->check(CLI::IsMember({"fixed", "orthogonal", "coordwise"}));
    sub->add_option("--randomizer", cfg.randomizer, "fixed | pinv | leverage")
        ->check(CLI::IsMember({"fixed", "pinv", "leverage"}));
    sub->add_flag("--optimal-scaling", cfg.optimal_scaling, "Rescale patches optimally");
    sub->add_option("--truncate", cfg.truncate, "on | off")
        ->check(CLI::IsMember({"on", "off"}));
  };

  CLI::App* abinitio = app.add_subcommand("abinitio", "Solve at generic parameters");
  add_common(abinitio);

  CLI::App* solve = app.add_subcommand("solve", "Track start points to target parameters");
  add_common(solve);
  add_strategy(solve);
  solve->add_option("--start", cfg.start_file, "Start set JSON (default: computed)");
  solve->add_option("--instance", cfg.instance_file, "Instance JSON with correspondences")
      ->check(CLI::ExistingFile);
  solve->add_option("--trace", cfg.trace_file, "Per-step trace CSV");
  solve->add_flag("--strict", cfg.strict, "Exit 2 if any path hits the minimum step size");

  CLI::App* bench_cmd = app.add_subcommand("bench", "Compare strategies on random instances");
  add_common(bench_cmd);
  bench_cmd->add_option("--instances", cfg.instances, "Number of instances");
  bench_cmd->add_option("--start", cfg.start_file, "Start set JSON (default: computed)");
  bench_cmd->add_flag("--optimal-scaling", cfg.optimal_scaling, "Rescale patches optimally");

  CLI::App* instance = app.add_subcommand("instance", "Write a synthetic instance");
  add_common(instance);

  CLI::App* demo = app.add_subcommand("demo", "Run the twisted-cubic and quadric examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*abinitio) return cmd_abinitio(cfg);
    if (*solve) return cmd_solve(cfg);
    if (*bench_cmd) return cmd_bench(cfg);
    if (*instance) return cmd_instance(cfg);
    if (*demo) return cmd_demo();
  } catch (const DeficientCount& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
