#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "omnisweep/eval.hpp"
#include "omnisweep/rng.hpp"

using namespace omnisweep;

namespace {

DepthMap make_map(int w, int h, std::vector<float> values, int row_begin = 0) {
  DepthMap m;
  m.width = w;
  m.height = h;
  m.row_begin = row_begin;
  m.depth = std::move(values);
  m.confidence.assign(m.depth.size(), 1.0f);
  return m;
}

// Metrics recomputed from the definitions, accumulated in a different order
// (back to front) than the implementation.
MetricReport reference(const DepthMap& pred, const DepthMap& gt, double cap) {
  std::vector<size_t> keep;
  for (size_t i = 0; i < pred.depth.size(); ++i)
    if (pred.depth[i] > 0 && gt.depth[i] > 0 && gt.depth[i] <= cap) keep.push_back(i);
  MetricReport r;
  r.n_valid = keep.size();
  r.depth_cap = cap;
  double mean_log = 0;
  for (auto it = keep.rbegin(); it != keep.rend(); ++it) {
    const double p = pred.depth[*it], g = gt.depth[*it];
    r.mae += std::abs(p - g);
    r.rmse += (p - g) * (p - g);
    r.absrel += std::abs(p - g) / g;
    r.sqrel += (p - g) * (p - g) / g;
    const double lr = std::log(p / g);
    mean_log += lr;
    r.silog += lr * lr;
    const double ratio = std::max(p / g, g / p);
    r.delta1 += ratio < 1.25 ? 1 : 0;
    r.delta2 += ratio < 1.25 * 1.25 ? 1 : 0;
    r.delta3 += ratio < 1.25 * 1.25 * 1.25 ? 1 : 0;
  }
  const double n = double(keep.size());
  r.mae /= n;
  r.rmse = std::sqrt(r.rmse / n);
  r.absrel /= n;
  r.sqrel /= n;
  mean_log /= n;
  r.silog = std::sqrt(std::max(0.0, r.silog / n - mean_log * mean_log));
  r.delta1 *= 100.0 / n;
  r.delta2 *= 100.0 / n;
  r.delta3 *= 100.0 / n;
  return r;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("perfect prediction scores zero error and full deltas") {
  Rng rng(3);
  std::vector<float> v(200);
  for (float& x : v) x = float(rng.uniform(0.5, 9.5));
  const DepthMap m = make_map(20, 10, v);

  const MetricReport r = evaluate(m, m, 10.0);
  CHECK(r.n_valid == 200);
  CHECK(r.mae == 0.0);
  CHECK(r.rmse == 0.0);
  CHECK(r.absrel == 0.0);
  CHECK(r.sqrel == 0.0);
  CHECK(r.silog == 0.0);
  CHECK(r.delta1 == 100.0);
  CHECK(r.delta2 == 100.0);
  CHECK(r.delta3 == 100.0);
}

TEST_CASE("single pixel closed form: pred 1 against gt 2") {
  const DepthMap pred = make_map(1, 1, {1.0f});
  const DepthMap gt = make_map(1, 1, {2.0f});

  const MetricReport r = evaluate(pred, gt, 10.0);
  CHECK(r.n_valid == 1);
  CHECK(r.mae == 1.0);
  CHECK(r.rmse == 1.0);
  CHECK(r.absrel == 0.5);
  CHECK(r.sqrel == 0.5);
  CHECK(r.silog == doctest::Approx(0.0).epsilon(1e-12));
  // Ratio 2 misses even the loosest threshold 1.25^3 = 1.953125.
  CHECK(r.delta1 == 0.0);
  CHECK(r.delta2 == 0.0);
  CHECK(r.delta3 == 0.0);
}

TEST_CASE("matches an independent recomputation on random maps") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = rng.uniform_int(1, 40);
    const int h = rng.uniform_int(1, 30);
    std::vector<float> pv(size_t(w) * h), gv(size_t(w) * h);
    for (size_t i = 0; i < pv.size(); ++i) {
      const double roll = rng.uniform();
      pv[i] = roll < 0.1 ? 0.0f : float(rng.uniform(0.2, 12.0));
      gv[i] = roll < 0.15 && roll >= 0.05 ? 0.0f : float(rng.uniform(0.2, 14.0));
    }
    pv[0] = 1.0f;
    gv[0] = 1.5f;  // guarantee one valid pixel
    const DepthMap pred = make_map(w, h, std::move(pv));
    const DepthMap gt = make_map(w, h, std::move(gv));

    const MetricReport got = evaluate(pred, gt, 10.0);
    const MetricReport want = reference(pred, gt, 10.0);
    REQUIRE(got.n_valid == want.n_valid);
    REQUIRE(got.mae == doctest::Approx(want.mae).epsilon(1e-9));
    REQUIRE(got.rmse == doctest::Approx(want.rmse).epsilon(1e-9));
    REQUIRE(got.absrel == doctest::Approx(want.absrel).epsilon(1e-9));
    REQUIRE(got.sqrel == doctest::Approx(want.sqrel).epsilon(1e-9));
    REQUIRE(got.silog == doctest::Approx(want.silog).epsilon(1e-9));
    REQUIRE(got.delta1 == want.delta1);
    REQUIRE(got.delta2 == want.delta2);
    REQUIRE(got.delta3 == want.delta3);
    REQUIRE(got.delta1 <= got.delta2);
    REQUIRE(got.delta2 <= got.delta3);
  }
}

TEST_CASE("scaling both maps by two scales the metric units") {
  Rng rng(11);
  std::vector<float> pv(64), gv(64);
  for (size_t i = 0; i < pv.size(); ++i) {
    gv[i] = float(rng.uniform(0.5, 4.5));
    pv[i] = gv[i] * float(rng.uniform(0.8, 1.2));
  }
  const DepthMap pred = make_map(8, 8, pv);
  const DepthMap gt = make_map(8, 8, gv);
  for (float& x : pv) x *= 2.0f;
  for (float& x : gv) x *= 2.0f;
  const DepthMap pred2 = make_map(8, 8, std::move(pv));
  const DepthMap gt2 = make_map(8, 8, std::move(gv));

  const MetricReport a = evaluate(pred, gt, 10.0);
  const MetricReport b = evaluate(pred2, gt2, 20.0);
  CHECK(b.n_valid == a.n_valid);
  // Doubling is exact in binary floating point.
  CHECK(b.mae == 2 * a.mae);
  CHECK(b.rmse == 2 * a.rmse);
  CHECK(b.sqrel == 2 * a.sqrel);
  CHECK(b.absrel == a.absrel);
  CHECK(b.delta1 == a.delta1);
  CHECK(b.delta2 == a.delta2);
  CHECK(b.delta3 == a.delta3);
  CHECK(b.silog == doctest::Approx(a.silog).epsilon(1e-12));
}

TEST_CASE("validity and cap exclusions count exactly") {
  const DepthMap pred = make_map(6, 1, {0.0f, 5.0f, 5.0f, 5.0f, 3.0f, 1.0f});
  const DepthMap gt = make_map(6, 1, {5.0f, 0.0f, 11.0f, 10.0f, 4.0f, 1.0f});

  const MetricReport r = evaluate(pred, gt, 10.0);
  CHECK(r.n_valid == 3);  // gt == cap stays in; zeros and 11 m drop out
  CHECK(r.mae == doctest::Approx(2.0).epsilon(1e-12));

  const MetricReport tight = evaluate(pred, gt, 4.0);
  CHECK(tight.n_valid == 2);
}

TEST_CASE("argument errors") {
  const DepthMap a = make_map(4, 2, std::vector<float>(8, 1.0f));
  const DepthMap b = make_map(2, 4, std::vector<float>(8, 1.0f));
  CHECK_THROWS_AS(evaluate(a, b, 10.0), std::invalid_argument);

  DepthMap shifted = a;
  shifted.row_begin = 3;
  CHECK_THROWS_AS(evaluate(a, shifted, 10.0), std::invalid_argument);

  CHECK_THROWS_AS(evaluate(a, a, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(a, a, -1.0), std::invalid_argument);

  const DepthMap zeros = make_map(4, 2, std::vector<float>(8, 0.0f));
  CHECK_THROWS_AS(evaluate(a, zeros, 10.0), std::runtime_error);
  const DepthMap far = make_map(4, 2, std::vector<float>(8, 50.0f));
  CHECK_THROWS_AS(evaluate(a, far, 10.0), std::runtime_error);
}

TEST_CASE("report formatting and CSV export") {
  const DepthMap pred = make_map(1, 1, {1.0f});
  const DepthMap gt = make_map(1, 1, {2.0f});
  const MetricReport r = evaluate(pred, gt, 10.0);

  const std::string text = format_metrics(r);
  CHECK(text.find("valid pixels : 1") != std::string::npos);
  CHECK(text.find("MAE          : 1.0000 m") != std::string::npos);
  CHECK(text.find("AbsRel       : 0.5000") != std::string::npos);
  CHECK(text.find("delta<1.25   : 0.00 %") != std::string::npos);

  const std::string path = "eval_test_metrics.csv";
  write_metrics_csv(path, {{"soft", "shell", r}, {"wta", "shell", r}});
  std::ifstream is(path);
  REQUIRE(is.good());
  std::string header, row1, row2, extra;
  std::getline(is, header);
  std::getline(is, row1);
  std::getline(is, row2);
  CHECK_FALSE(std::getline(is, extra));
  CHECK(header ==
        "method,dataset,cap_m,n_valid,mae_m,rmse_m,absrel,sqrel,silog,delta1,delta2,delta3");
  CHECK(row1.rfind("soft,shell,10,1,1,1,0.5,0.5,", 0) == 0);
  CHECK(row2.rfind("wta,shell,", 0) == 0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(write_metrics_csv("/nonexistent-dir/x.csv", {}), std::runtime_error);
}

TEST_SUITE_END();
