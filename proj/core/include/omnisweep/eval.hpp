#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omnisweep/matching.hpp"

namespace omnisweep {

struct MetricReport {
  double mae = 0;     // meters
  double rmse = 0;    // meters
  double absrel = 0;
  double sqrel = 0;   // meters
  double silog = 0;
  double delta1 = 0;  // percent under ratio 1.25
  double delta2 = 0;  // percent under ratio 1.25^2
  double delta3 = 0;  // percent under ratio 1.25^3
  uint64_t n_valid = 0;
  double depth_cap = 0;  // meters
};

// Depth metrics over pixels valid (depth > 0) in both maps with gt <= cap.
// Throws when that set is empty. Summation is fixed-order, so the result
// does not depend on thread count or platform.
MetricReport evaluate(const DepthMap& pred, const DepthMap& gt, double depth_cap = 10.0);

// Human-readable block, one metric per line.
std::string format_metrics(const MetricReport& r);

struct LabeledReport {
  std::string method;
  std::string dataset;
  MetricReport report;
};

// CSV with a header row and one row per labeled report.
void write_metrics_csv(const std::string& path, const std::vector<LabeledReport>& rows);

}  // namespace omnisweep
