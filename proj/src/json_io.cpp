#include "holoq/json_io.hpp"

namespace holoq::io {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigInvalid("complex value must be a [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json matrix_to_json(const ComplexMatrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      data.push_back(complex_to_json(m(r, c)));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ConfigInvalid("matrix needs rows/cols/data fields");
  const auto rows = j["rows"].get<Eigen::Index>();
  const auto cols = j["cols"].get<Eigen::Index>();
  const auto& data = j["data"];
  if (rows < 0 || cols < 0 || Eigen::Index(data.size()) != rows * cols)
    throw ConfigInvalid("matrix data length does not match rows*cols");
  ComplexMatrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(data[k++]);
  if (!m.allFinite()) throw ConfigInvalid("matrix entries must be finite");
  return m;
}

json loop_to_json(const LoopSpec& spec) {
  json pts = json::array();
  for (const auto& p : spec.loop.points) {
    json row = json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) row.push_back(p(i));
    pts.push_back(std::move(row));
  }
  return json{{"chart", spec.chart},
              {"points", std::move(pts)},
              {"closed", spec.loop.closed},
              {"steps_per_edge", spec.steps_per_edge}};
}

LoopSpec loop_from_json(const json& j) {
  LoopSpec spec;
  if (!j.contains("points")) throw ConfigInvalid("loop needs a points array");
  spec.chart = j.value("chart", std::string{});
  spec.loop.closed = j.value("closed", true);
  spec.steps_per_edge = j.value("steps_per_edge", 500);
  for (const auto& row : j["points"]) {
    gauge::ParamPoint p(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) p(Eigen::Index(i)) = row[i].get<double>();
    spec.loop.points.push_back(std::move(p));
  }
  try {
    spec.loop.validate();
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("invalid loop: ") + e.what());
  }
  return spec;
}

}  // namespace holoq::io
