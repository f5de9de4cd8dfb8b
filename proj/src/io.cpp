#include "adaptrack/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

namespace adaptrack::io {

json to_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2) throw FormatError("complex number must be [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json to_json(const CVector& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(to_json(v(k)));
  return out;
}

CVector cvector_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("vector must be a list of [re, im]");
  CVector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Index>(k)) = complex_from_json(j[k]);
  return v;
}

json system_to_json(const ParamPolySystem& system) {
  const VarStructure& st = system.structure();
  json groups = json::array();
  for (const auto& g : st.groups()) {
    groups.push_back({{"kind", g.kind == GroupKind::Projective ? "projective" : "affine"},
                      {"size", g.size}});
  }
  json polys = json::array();
  for (const auto& p : system.polys()) {
    json terms = json::array();
    for (const auto& t : p.terms()) terms.push_back(json::array({to_json(t.coeff), t.exponents}));
    polys.push_back(std::move(terms));
  }
  return {{"groups", groups}, {"params", st.parameter_count()}, {"polys", polys}};
}

ParamPolySystem system_from_json(const json& j) {
  try {
    std::vector<VariableGroup> groups;
    for (const auto& g : j.at("groups")) {
      const std::string kind = g.at("kind").get<std::string>();
      if (kind != "projective" && kind != "affine") {
        throw FormatError("group kind must be 'projective' or 'affine'");
      }
      const Index size = g.at("size").get<Index>();
      if (size < 1) throw FormatError("group size must be positive");
      groups.push_back({kind == "projective" ? GroupKind::Projective : GroupKind::Affine, size});
    }
    const VarStructure st(std::move(groups), j.value("params", Index{0}));
    std::vector<Polynomial> polys;
    for (const auto& pj : j.at("polys")) {
      std::vector<Term> terms;
      for (const auto& tj : pj) {
        Term t{complex_from_json(tj.at(0)), tj.at(1).get<Exponents>()};
        if (static_cast<Index>(t.exponents.size()) != st.arity()) {
          throw FormatError("exponent vector length does not match variables + parameters");
        }
        for (int e : t.exponents) {
          if (e < 0) throw FormatError("exponents must be nonnegative");
        }
        terms.push_back(std::move(t));
      }
      polys.emplace_back(st.arity(), std::move(terms));
    }
    return ParamPolySystem(st, std::move(polys));
  } catch (const json::exception& e) {
    throw FormatError(std::string("system file: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("system file: ") + e.what());
  }
}

json start_set_to_json(const StartSet& start) {
  json points = json::array();
  for (const auto& p : start.points) points.push_back(to_json(p));
  return {{"p_star", to_json(start.p_star)}, {"points", points}, {"residuals", start.residuals}};
}

StartSet start_set_from_json(const json& j) {
  try {
    StartSet s;
    s.p_star = cvector_from_json(j.at("p_star"));
    for (const auto& p : j.at("points")) s.points.push_back(cvector_from_json(p));
    if (j.contains("residuals")) s.residuals = j.at("residuals").get<std::vector<double>>();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("start set file: ") + e.what());
  }
}

json solutions_to_json(const VarStructure& structure, const std::vector<Solution>& solutions) {
  json out = json::array();
  for (const auto& s : solutions) {
    json coords = json::array();
    for (std::size_t g = 0; g < structure.groups().size(); ++g) {
      coords.push_back(
          to_json(CVector(s.x.segment(structure.group_offset(g), structure.groups()[g].size))));
    }
    out.push_back({{"coords", coords},
                   {"residual", s.residual},
                   {"real", s.real},
                   {"path_id", s.path_id}});
  }
  return out;
}

namespace {

json points_to_json(const std::vector<Eigen::Vector2d>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(json::array({p.x(), p.y()}));
  return out;
}

std::vector<Eigen::Vector2d> points_from_json(const json& j) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw FormatError("image point must be [u, v]");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

json matrix_to_json(const Eigen::Matrix3d& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return out;
}

Eigen::Matrix3d matrix_from_json(const json& j) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

}  // namespace

json instance_to_json(const SyntheticInstance& inst) {
  json gt = {{"E", matrix_to_json(inst.essential)},
             {"R", matrix_to_json(inst.rotation)},
             {"t", json::array({inst.translation.x(), inst.translation.y(), inst.translation.z()})},
             {"lambda", inst.distortion}};
  return {{"problem", to_string(inst.kind)},
          {"x", points_to_json(inst.points.x)},
          {"y", points_to_json(inst.points.y)},
          {"ground_truth", gt}};
}

SyntheticInstance instance_from_json(const json& j) {
  try {
    SyntheticInstance inst;
    inst.kind = parse_problem(j.at("problem").get<std::string>());
    inst.points.x = points_from_json(j.at("x"));
    inst.points.y = points_from_json(j.at("y"));
    if (inst.points.x.size() != inst.points.y.size()) {
      throw FormatError("instance: x and y must have the same length");
    }
    inst.rotation.setIdentity();
    inst.translation.setZero();
    inst.essential.setZero();
    if (j.contains("ground_truth")) {
      const json& gt = j.at("ground_truth");
      if (gt.contains("E")) inst.essential = matrix_from_json(gt.at("E"));
      if (gt.contains("R")) inst.rotation = matrix_from_json(gt.at("R"));
      if (gt.contains("t")) {
        const auto t = gt.at("t").get<std::vector<double>>();
        if (t.size() != 3) throw FormatError("instance: t must have 3 entries");
        inst.translation = Eigen::Vector3d(t[0], t[1], t[2]);
      }
      inst.distortion = gt.value("lambda", 0.0);
    }
    return inst;
  } catch (const json::exception& e) {
    throw FormatError(std::string("instance file: ") + e.what());
  }
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "combination,instances,avg_steps_per_path,avg_operations,avg_seconds,real_recall,"
         "real_found,real_reference,truncated,failed\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.label << ',' << r.instances << ',' << r.avg_steps_per_path << ','
        << r.avg_operations << ',' << r.avg_seconds << ',' << r.real_recall << ','
        << r.real_found << ',' << r.real_reference << ',' << r.truncated << ',' << r.failed
        << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "path_id,step,t,dt,accepted,cond2,imag_norm,newton_iters\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.path_id << ',' << r.step << ',' << r.t << ',' << r.dt << ',' << (r.accepted ? 1 : 0)
        << ',' << r.cond2 << ',' << r.imag_norm << ',' << r.newton_iters << '\n';
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << std::setprecision(17) << j.dump(2) << '\n';
}

}  // namespace adaptrack::io
