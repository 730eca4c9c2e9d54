#include "flbo/metric_json.hpp"

#include "flbo/error.hpp"
#include "json.hpp"

namespace flbo {

std::string metric_to_json(const RandersMetric<double>& metric) {
  nlohmann::json j;
  j["M"] = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j["M"].push_back(metric.m(r, c));
  j["omega"] = {metric.omega(0), metric.omega(1), metric.omega(2)};
  return j.dump();
}

RandersMetric<double> metric_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("metric JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("M") || !j.contains("omega"))
    throw InputError("metric JSON: expected an object with \"M\" and \"omega\"");
  const auto& m = j["M"];
  const auto& w = j["omega"];
  if (!m.is_array() || m.size() != 9) throw InputError("metric JSON: \"M\" must hold 9 numbers");
  if (!w.is_array() || w.size() != 3) throw InputError("metric JSON: \"omega\" must hold 3 numbers");
  RandersMetric<double> metric;
  for (int i = 0; i < 9; ++i) {
    if (!m[i].is_number()) throw InputError("metric JSON: non-numeric entry in \"M\"");
    metric.m(i / 3, i % 3) = m[i].get<double>();
  }
  for (int i = 0; i < 3; ++i) {
    if (!w[i].is_number()) throw InputError("metric JSON: non-numeric entry in \"omega\"");
    metric.omega(i) = w[i].get<double>();
  }
  return metric;
}

}  // namespace flbo
