#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "chpt/dates.hpp"
#include "chpt/model.hpp"
#include "chpt/series.hpp"

namespace chpt {

// Generative counterpart of the fitted model: a hard segment switch at
// Gamma = tau_true * (T - 1) plus iid noise, emitted directly in target
// (log1p) space.
struct SynthSpec {
  double w1 = 0.0, w2 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double tau_true = 0.5;    // (0, 1)
  double sigma_true = 1.0;  // >= 0; zero gives noiseless data
  Eigen::Index T = 0;       // >= 8
  LikelihoodKind noise_kind = LikelihoodKind::Normal;
  std::uint64_t seed = 0;
  Date start_date{};

  void validate() const;
};

// Counts are back-filled as round(exp(target) - 1) clamped at zero so the
// series can ride the same ingest-format rails; the target column keeps the
// exact generated values. Deterministic per seed.
WeeklySeries generate(const SynthSpec& spec);

struct SegmentFit {
  double slope = 0.0;
  double intercept = 0.0;
};

struct GridMleResult {
  Eigen::Index split = 0;  // first week of segment 2
  double tau_hat = 0.0;    // split / (T - 1)
  double sse = 0.0;
  SegmentFit before, after;
};

// Exhaustive split search: independent OLS on [0, k) and [k, T) for every
// k in [2, T-2], minimizing total SSE. Splits within rounding noise of the
// best count as ties and the smallest k wins.
GridMleResult grid_mle(const Eigen::ArrayXd& y);

}  // namespace chpt
