#include "chpt/synth.hpp"

#include <cmath>

#include "doctest.h"

#include "chpt/errors.hpp"

using namespace chpt;

namespace {

SynthSpec base_spec() {
  SynthSpec s;
  s.w1 = 0.02;
  s.w2 = -0.03;
  s.b1 = 0.5;
  s.b2 = 3.0;
  s.tau_true = 0.75;
  s.sigma_true = 0.3;
  s.T = 40;
  s.seed = 99;
  s.start_date = *parse_date("2013-01-07");
  return s;
}

}  // namespace

TEST_CASE("generate: zero noise and equal segments give an exact line") {
  SynthSpec spec = base_spec();
  spec.sigma_true = 0.0;
  spec.w2 = spec.w1;
  spec.b2 = spec.b1;
  WeeklySeries s = generate(spec);
  REQUIRE(s.size() == 40);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    CHECK(s.target_positive[i] ==
          doctest::Approx(spec.w1 * double(i) + spec.b1).epsilon(1e-15));
}

TEST_CASE("generate: zero noise keeps the exact piecewise values and the jump") {
  SynthSpec spec = base_spec();
  spec.sigma_true = 0.0;
  WeeklySeries s = generate(spec);
  double gamma_wk = spec.tau_true * 39.0;  // 29.25
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double x = double(i);
    double want = x >= gamma_wk ? spec.w2 * x + spec.b2 : spec.w1 * x + spec.b1;
    CHECK(s.target_positive[i] == want);
  }
  // the switch lands between weeks 29 and 30
  CHECK(s.target_positive[29] == doctest::Approx(0.02 * 29 + 0.5));
  CHECK(s.target_positive[30] == doctest::Approx(-0.03 * 30 + 3.0));
}

TEST_CASE("generate is deterministic per seed and pure in the spec") {
  SynthSpec spec = base_spec();
  WeeklySeries a = generate(spec);
  WeeklySeries b = generate(spec);
  CHECK((a.target_positive - b.target_positive).abs().maxCoeff() == 0.0);
  CHECK((a.positive - b.positive).abs().maxCoeff() == 0);

  spec.seed = 100;
  WeeklySeries c = generate(spec);
  CHECK(a.target_positive[0] != c.target_positive[0]);
}

TEST_CASE("generate back-fills counts as round(expm1(target)) clamped at zero") {
  SynthSpec spec = base_spec();
  WeeklySeries s = generate(spec);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double expect = std::max(0.0, std::round(std::expm1(s.target_positive[i])));
    CHECK(double(s.positive[i]) == expect);
    CHECK(s.negative[i] == 0);
    CHECK(s.total[i] == s.positive[i]);
  }
  CHECK_THROWS_AS(generate([] {
                    SynthSpec bad;
                    bad.T = 4;
                    return bad;
                  }()),
                  Error);
}

TEST_CASE("grid_mle recovers a noiseless split exactly") {
  // slope change at week 30 of 40
  Eigen::ArrayXd y(40);
  for (int i = 0; i < 40; ++i)
    y[i] = i < 30 ? 0.1 * i + 1.0 : -0.2 * (i - 30) + 4.0;
  GridMleResult r = grid_mle(y);
  CHECK(r.split == 30);
  CHECK(r.sse < 1e-18);
  CHECK(r.tau_hat == doctest::Approx(30.0 / 39.0));
  CHECK(r.before.slope == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(r.after.slope == doctest::Approx(-0.2).epsilon(1e-9));
}

TEST_CASE("grid_mle tie-breaks toward the smallest split on pure lines") {
  Eigen::ArrayXd y(24);
  for (int i = 0; i < 24; ++i) y[i] = 2.0 * i + 1.0;
  GridMleResult r = grid_mle(y);
  CHECK(r.split == 2);
}

TEST_CASE("grid_mle finds a strong noisy change point") {
  SynthSpec spec;
  spec.w1 = 0.004;
  spec.w2 = -0.006;
  spec.b1 = 0.5;
  spec.b2 = 4.5;
  spec.tau_true = 0.75;
  spec.sigma_true = 0.3;
  spec.T = 400;
  spec.seed = 2024;
  spec.start_date = *parse_date("2013-01-07");
  WeeklySeries s = generate(spec);
  GridMleResult r = grid_mle(s.target_positive);
  CHECK(std::abs(r.tau_hat - 0.75) < 0.05);
}

TEST_CASE("grid_mle returns the exhaustive minimum") {
  SynthSpec spec = base_spec();
  WeeklySeries s = generate(spec);
  GridMleResult r = grid_mle(s.target_positive);
  // re-walk every split with an independent OLS fit
  const Eigen::ArrayXd& y = s.target_positive;
  const Eigen::Index T = y.size();
  auto sse_of = [&](Eigen::Index lo, Eigen::Index hi) {
    Eigen::Index n = hi - lo;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Eigen::Index i = lo; i < hi; ++i) {
      sx += double(i);
      sy += y[i];
      sxx += double(i) * double(i);
      sxy += double(i) * y[i];
    }
    double denom = double(n) * sxx - sx * sx;
    double slope = denom != 0.0 ? (double(n) * sxy - sx * sy) / denom : 0.0;
    double intercept = (sy - slope * sx) / double(n);
    double sse = 0;
    for (Eigen::Index i = lo; i < hi; ++i) {
      double e = y[i] - (intercept + slope * double(i));
      sse += e * e;
    }
    return sse;
  };
  for (Eigen::Index k = 2; k <= T - 2; ++k) {
    CHECK(r.sse <= sse_of(0, k) + sse_of(k, T) + 1e-9);
  }
}

TEST_CASE("shifting the targets shifts the fitted intercepts, not slope or split") {
  SynthSpec spec = base_spec();
  WeeklySeries s = generate(spec);
  GridMleResult r0 = grid_mle(s.target_positive);
  const double c = 2.5;
  GridMleResult r1 = grid_mle(s.target_positive + c);
  CHECK(r1.split == r0.split);
  CHECK(r1.before.slope == doctest::Approx(r0.before.slope).epsilon(1e-10));
  CHECK(r1.after.slope == doctest::Approx(r0.after.slope).epsilon(1e-10));
  CHECK(r1.before.intercept - r0.before.intercept == doctest::Approx(c).epsilon(1e-10));
  CHECK(r1.after.intercept - r0.after.intercept == doctest::Approx(c).epsilon(1e-10));
}
