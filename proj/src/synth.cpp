#include "chpt/synth.hpp"

#include <cmath>
#include <limits>

#include "chpt/errors.hpp"
#include "chpt/rng.hpp"

namespace chpt {

void SynthSpec::validate() const {
  if (!(tau_true > 0.0 && tau_true < 1.0))
    throw_error(ErrorKind::Config, "tau_true must lie in (0, 1)");
  if (!(sigma_true >= 0.0)) throw_error(ErrorKind::Config, "sigma_true must be >= 0");
  if (T < 8) throw_error(ErrorKind::Config, "synthetic series needs T >= 8");
}

WeeklySeries generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double gamma_wk = spec.tau_true * static_cast<double>(spec.T - 1);

  WeeklySeries s;
  s.start_date = spec.start_date;
  s.target_positive.resize(spec.T);
  for (Eigen::Index i = 0; i < spec.T; ++i) {
    double x = static_cast<double>(i);
    double mean = x >= gamma_wk ? spec.w2 * x + spec.b2 : spec.w1 * x + spec.b1;
    double noise = spec.noise_kind == LikelihoodKind::Normal
                       ? spec.sigma_true * rng.normal()
                       : rng.cauchy(spec.sigma_true);
    s.target_positive[i] = mean + noise;
  }

  s.positive.resize(spec.T);
  for (Eigen::Index i = 0; i < spec.T; ++i) {
    double c = std::round(std::expm1(s.target_positive[i]));
    c = std::min(std::max(c, 0.0), 2.0e9);
    s.positive[i] = static_cast<int>(c);
  }
  s.negative = Eigen::ArrayXi::Zero(spec.T);
  s.neutral = Eigen::ArrayXi::Zero(spec.T);
  s.total = s.positive;
  s.target_negative = Eigen::ArrayXd::Zero(spec.T);
  return s;
}

namespace {

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
};

// simple regression of y on x = lo..hi-1
OlsFit ols_segment(const Eigen::ArrayXd& y, Eigen::Index lo, Eigen::Index hi) {
  const Eigen::Index n = hi - lo;
  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(n, static_cast<double>(lo),
                                               static_cast<double>(hi - 1));
  Eigen::ArrayXd seg = y.segment(lo, n);
  const double x_mean = x.mean();
  const double y_mean = seg.mean();
  const double sxx = (x - x_mean).square().sum();
  const double sxy = ((x - x_mean) * (seg - y_mean)).sum();

  OlsFit fit;
  if (n < 2 || sxx == 0.0) {
    fit.slope = 0.0;
    fit.intercept = y_mean;
    fit.sse = (seg - y_mean).square().sum();
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  fit.sse = (seg - (fit.intercept + fit.slope * x)).square().sum();
  return fit;
}

}  // namespace

GridMleResult grid_mle(const Eigen::ArrayXd& y) {
  const Eigen::Index T = y.size();
  if (T < 8) throw_error(ErrorKind::Domain, "grid_mle needs T >= 8");

  GridMleResult best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 2; k <= T - 2; ++k) {
    OlsFit left = ols_segment(y, 0, k);
    OlsFit right = ols_segment(y, k, T);
    double sse = left.sse + right.sse;
    // strict improvement beyond float noise, so equal-SSE splits tie
    // toward the smallest k
    if (!std::isfinite(best_sse) ||
        sse < best_sse - 1e-12 * std::max(1.0, best_sse)) {
      best_sse = sse;
      best.split = k;
      best.before = {left.slope, left.intercept};
      best.after = {right.slope, right.intercept};
    }
  }
  best.sse = best_sse;
  best.tau_hat = static_cast<double>(best.split) / static_cast<double>(T - 1);
  return best;
}

}  // namespace chpt
