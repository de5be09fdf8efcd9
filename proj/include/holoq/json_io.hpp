#pragma once

#include "holoq/gaugeholo.hpp"
#include "holoq/types.hpp"

#include <json.hpp>

#include <string>

namespace holoq::io {

using json = nlohmann::ordered_json;

/// Matrix wire format: {"rows": r, "cols": c, "data": [[re, im], ...]},
/// data row-major.
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

json complex_to_json(Complex z);
Complex complex_from_json(const json& j);

/// Loop wire format:
/// {"chart": name, "points": [[l1, ..., ld], ...], "closed": true,
///  "steps_per_edge": n}.
struct LoopSpec {
  std::string chart;
  gauge::ParamLoop loop;
  int steps_per_edge = 500;
};

json loop_to_json(const LoopSpec& spec);
LoopSpec loop_from_json(const json& j);

}  // namespace holoq::io
