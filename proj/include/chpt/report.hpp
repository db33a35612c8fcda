#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chpt/dates.hpp"
#include "chpt/diagnostics.hpp"
#include "chpt/hmc.hpp"
#include "chpt/series.hpp"

#include "json.hpp"

namespace chpt {

struct DateWindow {
  Date begin{};
  Date end{};  // inclusive
};

// "YYYY-MM-DD:YYYY-MM-DD"
std::optional<DateWindow> parse_date_window(std::string_view text);

struct ChangePointEstimate {
  double tau_mean = 0.0;
  double tau_median = 0.0;
  double tau_q05 = 0.0;
  double tau_q95 = 0.0;
  long week_index = 0;  // round(tau_mean * (T - 1))
  long week_q05 = 0;
  long week_q95 = 0;
  Date calendar_date{};  // start_date + 7 * week_index days
  bool in_window = false;
  bool window_given = false;
};

struct PredictiveBand {
  Eigen::ArrayXd x;
  Eigen::ArrayXd median, lo, hi;
};

struct ResidualDiagnostics {
  Eigen::ArrayXd residuals;       // y - mean curve at posterior-mean parameters
  Eigen::ArrayXd qq_theoretical;  // normal quantiles at (i + 0.5) / n
  Eigen::ArrayXd qq_sample;       // sorted standardized residuals
};

ChangePointParams posterior_mean_params(const ChainSet& set);

ChangePointEstimate estimate_changepoint(const ChainSet& set, const WeeklySeries& series,
                                         const std::optional<DateWindow>& window);

// Monte Carlo posterior predictive: the mean curve of every draw, plus one
// likelihood noise draw per grid point when `noise` is set, reduced to
// pointwise quantiles at (1 -/+ band) / 2 and the median.
PredictiveBand predictive_band(const ChainSet& set, Eigen::Index T, LikelihoodKind kind,
                               double sharpness, const Eigen::ArrayXd& grid, bool noise,
                               double band, std::uint64_t rng_seed);

ResidualDiagnostics residuals_and_qq(const ChainSet& set, const Eigen::ArrayXd& y,
                                     double sharpness);

struct RenderInputs {
  const WeeklySeries* series = nullptr;
  Sentiment sentiment = Sentiment::Positive;
  const ChainSet* chains = nullptr;
  const ChangePointEstimate* estimate = nullptr;
  const PredictiveBand* band = nullptr;
  const ResidualDiagnostics* residuals = nullptr;
  double sharpness = kDefaultSharpness;
};

// The four documents, keyed by filename: lineplot.svg (data, regression
// line, predictive band, change-point marker with its interval),
// posterior.svg (per-parameter histograms), residuals.svg, qq.svg.
// Validates inputs up front so a failure never yields a partial set.
std::vector<std::pair<std::string, std::string>> render_plots(const RenderInputs& in);

struct ResultInputs {
  std::string series_path;
  std::string category;
  Sentiment sentiment = Sentiment::Positive;
  const WeeklySeries* series = nullptr;
  nlohmann::ordered_json config_echo;
  const DiagnosticsReport* diagnostics = nullptr;
  const ChangePointEstimate* estimate = nullptr;
  const PredictiveBand* band = nullptr;
  const ResidualDiagnostics* residuals = nullptr;
  std::optional<DateWindow> window;
};

nlohmann::ordered_json emit_result(const ResultInputs& in);

}  // namespace chpt
