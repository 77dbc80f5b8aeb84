#include "omnisweep/eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace omnisweep {

MetricReport evaluate(const DepthMap& pred, const DepthMap& gt, double depth_cap) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw std::invalid_argument("evaluate: depth map shapes differ");
  if (pred.row_begin != gt.row_begin)
    throw std::invalid_argument("evaluate: depth maps cover different sphere bands");
  if (!(depth_cap > 0)) throw std::invalid_argument("evaluate: depth cap must be positive");

  double sum_abs = 0, sum_sq = 0, sum_absrel = 0, sum_sqrel = 0;
  double sum_d = 0, sum_d2 = 0;
  uint64_t n = 0, n1 = 0, n2 = 0, n3 = 0;
  const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;

  const size_t total = pred.depth.size();
  for (size_t i = 0; i < total; ++i) {
    const double p = pred.depth[i];
    const double g = gt.depth[i];
    if (p <= 0 || g <= 0 || g > depth_cap) continue;
    const double err = p - g;
    sum_abs += std::abs(err);
    sum_sq += err * err;
    sum_absrel += std::abs(err) / g;
    sum_sqrel += err * err / g;
    const double d = std::log(p) - std::log(g);
    sum_d += d;
    sum_d2 += d * d;
    const double ratio = p > g ? p / g : g / p;
    if (ratio < t1) ++n1;
    if (ratio < t2) ++n2;
    if (ratio < t3) ++n3;
    ++n;
  }
  if (n == 0)
    throw std::runtime_error("evaluate: no overlapping valid pixels under the depth cap");

  MetricReport r;
  r.n_valid = n;
  r.depth_cap = depth_cap;
  const double inv_n = 1.0 / double(n);
  r.mae = sum_abs * inv_n;
  r.rmse = std::sqrt(sum_sq * inv_n);
  r.absrel = sum_absrel * inv_n;
  r.sqrel = sum_sqrel * inv_n;
  const double mean_d = sum_d * inv_n;
  r.silog = std::sqrt(std::max(0.0, sum_d2 * inv_n - mean_d * mean_d));
  r.delta1 = 100.0 * double(n1) * inv_n;
  r.delta2 = 100.0 * double(n2) * inv_n;
  r.delta3 = 100.0 * double(n3) * inv_n;
  return r;
}

std::string format_metrics(const MetricReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "valid pixels : " << r.n_valid << " (gt <= " << std::setprecision(2) << r.depth_cap
     << " m)\n"
     << std::setprecision(4);
  os << "MAE          : " << r.mae << " m\n";
  os << "RMSE         : " << r.rmse << " m\n";
  os << "AbsRel       : " << r.absrel << "\n";
  os << "SqRel        : " << r.sqrel << " m\n";
  os << "SILog        : " << r.silog << "\n";
  os << std::setprecision(2);
  os << "delta<1.25   : " << r.delta1 << " %\n";
  os << "delta<1.25^2 : " << r.delta2 << " %\n";
  os << "delta<1.25^3 : " << r.delta3 << " %\n";
  return os.str();
}

void write_metrics_csv(const std::string& path, const std::vector<LabeledReport>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("metrics csv: cannot open for writing: " + path);
  os << "method,dataset,cap_m,n_valid,mae_m,rmse_m,absrel,sqrel,silog,delta1,delta2,delta3\n";
  os << std::setprecision(10);
  for (const LabeledReport& row : rows) {
    const MetricReport& r = row.report;
    os << row.method << ',' << row.dataset << ',' << r.depth_cap << ',' << r.n_valid << ','
       << r.mae << ',' << r.rmse << ',' << r.absrel << ',' << r.sqrel << ',' << r.silog << ','
       << r.delta1 << ',' << r.delta2 << ',' << r.delta3 << '\n';
  }
  if (!os) throw std::runtime_error("metrics csv: write failed: " + path);
}

}  // namespace omnisweep
