// JSON and CSV formats for systems, start sets, solutions, instances,
// benchmark tables, and path traces.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptrack/engine.hpp"

namespace adaptrack::io {

using nlohmann::json;

class FormatError : public Error {
 public:
  using Error::Error;
};

json to_json(const Complex& c);
Complex complex_from_json(const json& j);
json to_json(const CVector& v);
CVector cvector_from_json(const json& j);

/// {"groups":[{"kind":"projective","size":4},...],"params":P,
///  "polys":[[[coeff,[exponents...]],...],...]} with coeff = [re, im].
json system_to_json(const ParamPolySystem& system);
ParamPolySystem system_from_json(const json& j);

json start_set_to_json(const StartSet& start);
StartSet start_set_from_json(const json& j);

/// Per solution {coords: one list of [re, im] per group, residual, real, path_id}.
json solutions_to_json(const VarStructure& structure, const std::vector<Solution>& solutions);

/// {problem, x: [[u,v],...], y: [[u,v],...], ground_truth: {E, lambda, R, t}}.
json instance_to_json(const SyntheticInstance& inst);
/// Reads the correspondences; ground truth is optional.
SyntheticInstance instance_from_json(const json& j);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace adaptrack::io
