#include <doctest.h>

#include <atomic>
#include <set>
#include <sstream>

#include "adaptrack/engine.hpp"
#include "adaptrack/io.hpp"
#include "adaptrack/projective.hpp"
#include "support.hpp"

using namespace adaptrack;

namespace {

CVector point(std::initializer_list<Complex> v) {
  CVector x(static_cast<Index>(v.size()));
  Index k = 0;
  for (auto c : v) x(k++) = c;
  return x;
}

StartSet cubic_start() {
  StartSet s;
  s.p_star = CVector::Ones(3);
  s.points = fixtures::twisted_cubic_points();
  s.residuals.assign(3, 0.0);
  return s;
}

/// Newton on A [f; x0 - 1] from a printed 4-decimal approximation.
CVector polish_extraneous(const CVector& start) {
  const ParamPolySystem h = fixtures::twisted_cubic_affine();
  const CMatrix a = fixtures::extraneous_randomizer();
  CVector x = start;
  for (int it = 0; it < 20; ++it) {
    const CVector dx = (a * h.jacobian_x(x, CVector(0))).fullPivLu().solve(-(a * h.evaluate(x, CVector(0))));
    x += dx;
    if (dx.norm() < 1e-15) break;
  }
  return x;
}

const StartSet& five_point_start() {
  static const StartSet s = [] {
    Rng rng = substream(7, 0);
    return ab_initio(five_point_system(), rng).start;
  }();
  return s;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("classify_real") {
    const VarStructure st({{GroupKind::Projective, 4}}, 0);
    const Complex i(0.0, 1.0);
    CHECK(classify_real(st, point({1.0, -1.0, 1.0, -1.0})));
    CHECK_FALSE(classify_real(st, point({1.0, i, -1.0, -i})));
    CHECK(classify_real(st, point({i, -i, i, -i})));
    CHECK(classify_real(st, point({Complex(3, 4), Complex(-6, -8), 0.0, Complex(1.5, 2.0)})));
  }

  TEST_CASE("dedup") {
    const VarStructure st({{GroupKind::Projective, 4}}, 0);
    const auto pts = fixtures::twisted_cubic_points();
    CHECK(dedup(st, pts).size() == 3);
    CHECK(dedup(st, {pts[0], 2.0 * pts[0]}).size() == 1);
    CVector near = pts[1];
    near(2) += 1e-9;
    CHECK(dedup(st, {pts[1], near, pts[2]}) == std::vector<std::size_t>{0, 2});
  }

  TEST_CASE("normalized residual ignores the representative") {
    const ParamPolySystem f = twisted_cubic_family();
    const CVector p = point({0.3, Complex(0.0, 2.0), -1.0});
    Rng rng(2);
    const CVector x = testing::gaussian_vector(4, rng);
    CHECK(normalized_residual(f, x, p) ==
          doctest::Approx(normalized_residual(f, Complex(-7.0, 3.0) * x, p)));
  }

  TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 5) throw Error("x"); }),
                    Error);
    CHECK(resolve_jobs(0) >= 1);
    CHECK(resolve_jobs(3) == 3);
  }

  TEST_CASE("ab initio on the twisted-cubic family") {
    for (std::uint64_t seed : {1, 2, 3}) {
      Rng rng = substream(seed, 0);
      const AbInitioReport rep = ab_initio(twisted_cubic_family(), rng);
      CHECK(rep.start.points.size() == 3);
      for (std::size_t k = 0; k < rep.start.points.size(); ++k) {
        CHECK(rep.start.residuals[k] <= 1e-10);
        CHECK(normalized_residual(twisted_cubic_family(), rep.start.points[k], rep.start.p_star) <=
              1e-10);
      }
      for (Index k = 0; k < 3; ++k) CHECK(std::abs(rep.start.p_star(k)) == doctest::Approx(1.0));
      CHECK(rep.converged + rep.failed == rep.paths);
    }
  }

  TEST_CASE("ab initio rejects a deficient count") {
    Rng rng(1);
    AbInitioOptions opt;
    opt.expected = 4;
    CHECK_THROWS_AS(ab_initio(twisted_cubic_family(), rng, opt), DeficientCount);
  }

  TEST_CASE("ab initio on the five-point system") {
    const StartSet& s = five_point_start();
    CHECK(s.points.size() == 10);
    const ParamPolySystem sys = five_point_system();
    const VarStructure& st = sys.structure();
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      for (std::size_t j = i + 1; j < s.points.size(); ++j) {
        CHECK(projective_distance(st, s.points[i], s.points[j]) > 1e-6);
      }
    }
  }

  TEST_CASE("param_solve to the same parameters returns the start points") {
    const ParamPolySystem f = twisted_cubic_family();
    const SolveReport rep = param_solve(f, cubic_start(), CVector::Ones(3));
    REQUIRE(rep.solutions.size() == 3);
    for (const auto& sol : rep.solutions) {
      CHECK(projective_distance(f.structure(), sol.x,
                                cubic_start().points[static_cast<std::size_t>(sol.path_id)]) <
            1e-10);
    }
    CHECK(rep.real == 1);
    CHECK(rep.nonreal == 2);
  }

  TEST_CASE("param_solve on the twisted-cubic example") {
    const ParamPolySystem f = twisted_cubic_family();
    const SolveReport rep = param_solve(f, cubic_start(), fixtures::twisted_target());
    CHECK(rep.solutions.size() == 3);
    CHECK(rep.failed == 0);
    for (const auto& s : rep.solutions) {
      CHECK(s.residual <= 1e-8);
      CHECK(normalized_residual(f, s.x, fixtures::twisted_target()) <= 1e-8);
    }
    CHECK(rep.total_steps > 0);
    CHECK(rep.total_ops > 0);
    CHECK(rep.avg_steps_per_path() == doctest::Approx(double(rep.total_steps) / 3.0));
  }

  TEST_CASE("the residual filter drops the extraneous pair") {
    const ParamPolySystem f = twisted_cubic();
    StartSet start;
    start.p_star = CVector(0);
    start.points = fixtures::twisted_cubic_points();
    for (const auto& z : fixtures::extraneous_points()) {
      const CVector x = polish_extraneous(z);
      CHECK(std::abs(x(0) - 1.0) > 0.1);
      start.points.push_back(x);
    }
    SolveOptions opt;
    opt.fixed_patches = PatchState{fixed_patch(CVector::Unit(4, 0))};
    opt.fixed_randomizer = fixed_randomizer_from_matrix(fixtures::extraneous_randomizer());
    const SolveReport rep = param_solve(f, start, CVector(0), opt);
    CHECK(rep.extraneous == 2);
    CHECK(rep.kinds[3] == EndpointKind::Extraneous);
    CHECK(rep.kinds[4] == EndpointKind::Extraneous);
    CHECK(rep.solutions.size() == 3);
    for (const auto& s : rep.solutions) CHECK(s.path_id < 3);
  }

  TEST_CASE("wrongly shaped overrides are rejected") {
    SolveOptions opt;
    opt.fixed_patches = PatchState{};
    CHECK_THROWS_AS(param_solve(twisted_cubic_family(), cubic_start(), CVector::Ones(3), opt),
                    DimensionMismatch);
  }

  TEST_CASE("five-point ground truth is recovered under every strategy") {
    const ParamPolySystem sys = five_point_system();
    Rng rng(21);
    const SyntheticInstance inst = synth_instance(ProblemKind::FivePoint, rng);
    const CVector target = correspondence_parameters(ProblemKind::FivePoint, inst.points);
    const CVector gt = ground_truth_point(inst);
    std::vector<std::vector<CVector>> reals;
    for (const auto& combo : standard_combinations()) {
      if (combo.truncate) continue;
      SolveOptions opt;
      opt.strategies = combo.strategies;
      const SolveReport rep = param_solve(sys, five_point_start(), target, opt);
      for (const auto& s : rep.solutions) CHECK(s.residual <= 1e-8);
      CHECK(rep.solutions.size() <= five_point_start().points.size());
      bool found = false;
      for (const auto& r : rep.real_solutions()) {
        found = found || projective_distance(sys.structure(), r, gt) <= 1e-6;
      }
      CHECK_MESSAGE(found, combo.label);
      reals.push_back(rep.real_solutions());
    }
    // Real endpoints agree between strategies.
    for (std::size_t c = 1; c < reals.size(); ++c) {
      for (const auto& r : reals[c]) {
        bool match = false;
        for (const auto& y : reals[0]) match = match || projective_distance(sys.structure(), r, y) <= 1e-6;
        CHECK(match);
      }
    }
  }

  TEST_CASE("results do not depend on the worker count") {
    const ParamPolySystem sys = five_point_system();
    const CVector target = bench_instance_parameters(ProblemKind::FivePoint, 3, 0);
    SolveOptions a, b;
    a.jobs = 1;
    b.jobs = 4;
    a.strategies.randomizer = b.strategies.randomizer = RandomizerKind::LeverageScore;
    a.strategies.patch.kind = b.strategies.patch.kind = PatchKind::CoordinateWise;
    const SolveReport ra = param_solve(sys, five_point_start(), target, a);
    const SolveReport rb = param_solve(sys, five_point_start(), target, b);
    REQUIRE(ra.outcomes.size() == rb.outcomes.size());
    for (std::size_t i = 0; i < ra.outcomes.size(); ++i) {
      CHECK(ra.outcomes[i].steps == rb.outcomes[i].steps);
      CHECK(ra.outcomes[i].x == rb.outcomes[i].x);
    }
  }

  TEST_CASE("strategy labels") {
    const auto combos = standard_combinations();
    std::vector<std::string> labels;
    for (const auto& c : combos) labels.push_back(c.label);
    CHECK(labels == std::vector<std::string>{"FP/FR", "OP/FR", "CWP/FR", "OP/PIR", "CWP/LSR",
                                             "CWP/LSR/ET"});
    CHECK(combos.back().truncate);
    CHECK(combos[3].strategies.randomizer == RandomizerKind::Pseudoinverse);
    CHECK_THROWS_AS(parse_combination("XP/FR"), Error);
    CHECK_THROWS_AS(parse_combination("FP/FR/XX"), Error);
    CHECK_THROWS_AS(parse_combination("FP"), Error);
  }

  TEST_CASE("bench is deterministic and reports every combination") {
    const ParamPolySystem f = twisted_cubic_family();
    BenchOptions opt;
    opt.instances = 3;
    opt.seed = 5;
    const auto a = bench(ProblemKind::TwistedCubic, f, cubic_start(), opt);
    const auto b = bench(ProblemKind::TwistedCubic, f, cubic_start(), opt);
    REQUIRE(a.size() == 6);
    for (std::size_t c = 0; c < a.size(); ++c) {
      CHECK(a[c].label == opt.combinations[c].label);
      CHECK(a[c].total_steps == b[c].total_steps);
      CHECK(a[c].avg_operations == b[c].avg_operations);
      CHECK(a[c].real_recall <= 1.0);
      if (!opt.combinations[c].truncate) CHECK(a[c].truncated == 0);
    }
    std::ostringstream csv;
    io::write_bench_csv(csv, a);
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header.rfind("combination,instances,avg_steps_per_path,avg_operations,avg_seconds", 0) == 0);
    opt.instances = 0;
    CHECK_THROWS_AS(bench(ProblemKind::TwistedCubic, f, cubic_start(), opt), Error);
  }

  TEST_CASE("start set and solutions JSON") {
    const StartSet s = cubic_start();
    const StartSet back = io::start_set_from_json(io::start_set_to_json(s));
    CHECK(back.p_star == s.p_star);
    REQUIRE(back.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back.points[i] == s.points[i]);

    const ParamPolySystem f = twisted_cubic_family();
    const SolveReport rep = param_solve(f, s, fixtures::twisted_target());
    const io::json j = io::solutions_to_json(f.structure(), rep.solutions);
    REQUIRE(j.size() == rep.solutions.size());
    CHECK(j[0]["coords"].size() == 1);
    CHECK(j[0]["coords"][0].size() == 4);
    CHECK(j[0].contains("residual"));
    CHECK(j[0].contains("real"));
    CHECK(j[0].contains("path_id"));
  }

  TEST_CASE("trace rows carry the per-step data") {
    SolveOptions opt;
    opt.tracker.record_trace = true;
    const SolveReport rep = param_solve(twisted_cubic_family(), cubic_start(), fixtures::twisted_target(), opt);
    const auto rows = rep.trace();
    CHECK(rows.size() == rep.total_steps);
    std::set<int> ids;
    for (const auto& r : rows) ids.insert(r.path_id);
    CHECK(ids == std::set<int>{0, 1, 2});
    std::ostringstream out;
    io::write_trace_csv(out, rows);
    CHECK(out.str().rfind("path_id,step,t,dt,accepted,cond2,imag_norm,newton_iters\n", 0) == 0);
  }
}
