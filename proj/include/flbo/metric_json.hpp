#pragma once

#include <string>

#include "flbo/randers.hpp"

namespace flbo {

/// {"M": [9 numbers, row-major], "omega": [3 numbers]}
std::string metric_to_json(const RandersMetric<double>& metric);
/// Throws InputError on malformed input; the metric itself is not validated.
RandersMetric<double> metric_from_json(const std::string& text);

}  // namespace flbo
