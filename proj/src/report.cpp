#include "chpt/report.hpp"

#include <algorithm>
#include <cmath>

#include "chpt/errors.hpp"
#include "chpt/rng.hpp"
#include "chpt/stats.hpp"
#include "chpt/svg.hpp"

namespace chpt {

std::optional<DateWindow> parse_date_window(std::string_view text) {
  std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto begin = parse_date(text.substr(0, colon));
  auto end = parse_date(text.substr(colon + 1));
  if (!begin || !end || *end < *begin) return std::nullopt;
  return DateWindow{*begin, *end};
}

namespace {

Eigen::VectorXd pooled_column(const ChainSet& set, Eigen::Index col) {
  Eigen::Index per_chain = set.chains.front().draws.rows();
  Eigen::VectorXd pooled(per_chain * static_cast<Eigen::Index>(set.chains.size()));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(set.chains.size()); ++c)
    pooled.segment(c * per_chain, per_chain) = set.chains[c].draws.col(col);
  return pooled;
}

void require_draws(const ChainSet& set, const char* who) {
  if (set.chains.empty() || set.chains.front().draws.rows() == 0)
    throw_error(ErrorKind::Domain, std::string(who) + ": empty posterior");
}

}  // namespace

ChangePointParams posterior_mean_params(const ChainSet& set) {
  require_draws(set, "posterior_mean_params");
  ChangePointParams p;
  p.w1 = pooled_column(set, 0).mean();
  p.w2 = pooled_column(set, 1).mean();
  p.b1 = pooled_column(set, 2).mean();
  p.b2 = pooled_column(set, 3).mean();
  p.tau = pooled_column(set, 4).mean();
  p.sigma = pooled_column(set, 5).mean();
  return p;
}

ChangePointEstimate estimate_changepoint(const ChainSet& set, const WeeklySeries& series,
                                         const std::optional<DateWindow>& window) {
  require_draws(set, "estimate_changepoint");
  Eigen::VectorXd tau = pooled_column(set, 4);
  Eigen::VectorXd sorted = tau;
  std::sort(sorted.data(), sorted.data() + sorted.size());

  const double span = static_cast<double>(series.size() - 1);
  ChangePointEstimate est;
  est.tau_mean = tau.mean();
  est.tau_median = quantile_sorted(sorted, 0.5);
  est.tau_q05 = quantile_sorted(sorted, 0.05);
  est.tau_q95 = quantile_sorted(sorted, 0.95);
  est.week_index = std::lround(est.tau_mean * span);
  est.week_q05 = std::lround(est.tau_q05 * span);
  est.week_q95 = std::lround(est.tau_q95 * span);
  est.calendar_date = series.start_date + Days{7 * est.week_index};
  est.window_given = window.has_value();
  est.in_window = window.has_value() && window->begin <= est.calendar_date &&
                  est.calendar_date <= window->end;
  return est;
}

PredictiveBand predictive_band(const ChainSet& set, Eigen::Index T, LikelihoodKind kind,
                               double sharpness, const Eigen::ArrayXd& grid, bool noise,
                               double band, std::uint64_t rng_seed) {
  require_draws(set, "predictive_band");
  if (!(band > 0.0 && band < 1.0))
    throw_error(ErrorKind::Config, "band probability must lie in (0, 1)");
  if (grid.size() == 0) throw_error(ErrorKind::Domain, "predictive_band: empty grid");

  const Eigen::Index per_chain = set.chains.front().draws.rows();
  const Eigen::Index n_draws =
      per_chain * static_cast<Eigen::Index>(set.chains.size());
  Eigen::MatrixXd values(n_draws, grid.size());

  Rng rng(rng_seed);
  Eigen::Index row = 0;
  for (const auto& chain : set.chains) {
    for (Eigen::Index m = 0; m < per_chain; ++m, ++row) {
      ChangePointParams p;
      p.w1 = chain.draws(m, 0);
      p.w2 = chain.draws(m, 1);
      p.b1 = chain.draws(m, 2);
      p.b2 = chain.draws(m, 3);
      p.tau = chain.draws(m, 4);
      p.sigma = chain.draws(m, 5);
      Eigen::ArrayXd mu = mean_curve(p, grid, T, sharpness);
      if (noise) {
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
          mu[j] += kind == LikelihoodKind::Normal ? p.sigma * rng.normal()
                                                  : rng.cauchy(p.sigma);
        }
      }
      values.row(row) = mu.matrix().transpose();
    }
  }

  const double tail = (1.0 - band) / 2.0;
  PredictiveBand out;
  out.x = grid;
  out.median.resize(grid.size());
  out.lo.resize(grid.size());
  out.hi.resize(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    Eigen::VectorXd col = values.col(j);
    std::sort(col.data(), col.data() + col.size());
    out.lo[j] = quantile_sorted(col, tail);
    out.median[j] = quantile_sorted(col, 0.5);
    out.hi[j] = quantile_sorted(col, 1.0 - tail);
  }
  return out;
}

ResidualDiagnostics residuals_and_qq(const ChainSet& set, const Eigen::ArrayXd& y,
                                     double sharpness) {
  require_draws(set, "residuals_and_qq");
  const Eigen::Index T = y.size();
  if (T == 0) throw_error(ErrorKind::Domain, "residuals_and_qq: empty series");

  ChangePointParams pm = posterior_mean_params(set);
  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(T, 0.0, static_cast<double>(T - 1));
  ResidualDiagnostics out;
  out.residuals = y - mean_curve(pm, x, T, sharpness);

  double mean = out.residuals.mean();
  double sd = sample_std(out.residuals.matrix());
  Eigen::ArrayXd standardized =
      sd > 0.0 ? ((out.residuals - mean) / sd).eval() : Eigen::ArrayXd::Zero(T).eval();
  std::sort(standardized.data(), standardized.data() + standardized.size());

  out.qq_sample = standardized;
  out.qq_theoretical.resize(T);
  for (Eigen::Index i = 0; i < T; ++i)
    out.qq_theoretical[i] =
        normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(T));
  return out;
}

// ---------------------------------------------------------------------------
// plots

namespace {

struct Frame {
  PlotLayout layout;
  AxisScale x, y;
};

Frame make_frame(double x_lo, double x_hi, double y_lo, double y_hi) {
  Frame f;
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) {
    double pad = y_lo == 0.0 ? 1.0 : std::abs(y_lo) * 0.1;
    y_lo -= pad;
    y_hi = y_lo + 2.0 * pad;
  }
  f.x = {x_lo, x_hi, f.layout.margin_left, f.layout.width - f.layout.margin_right};
  f.y = {y_lo, y_hi, f.layout.height - f.layout.margin_bottom, f.layout.margin_top};
  return f;
}

void draw_axes(SvgCanvas& svg, const Frame& f, std::string_view x_label,
               std::string_view y_label) {
  const auto& l = f.layout;
  svg.rect(l.margin_left, l.margin_top, l.plot_width(), l.plot_height(),
           "fill:none;stroke:#444444;stroke-width:1", "frame");
  for (double t : nice_ticks(f.x.data_min, f.x.data_max, 6)) {
    if (t < f.x.data_min || t > f.x.data_max) continue;
    double px = f.x(t);
    svg.line(px, l.height - l.margin_bottom, px, l.height - l.margin_bottom + 4,
             "stroke:#444444;stroke-width:1");
    svg.text(px, l.height - l.margin_bottom + 16, format_tick(t),
             "font-family:sans-serif;font-size:10px;fill:#222222", "middle");
  }
  for (double t : nice_ticks(f.y.data_min, f.y.data_max, 6)) {
    if (t < f.y.data_min || t > f.y.data_max) continue;
    double py = f.y(t);
    svg.line(l.margin_left - 4, py, l.margin_left, py, "stroke:#444444;stroke-width:1");
    svg.text(l.margin_left - 7, py + 3, format_tick(t),
             "font-family:sans-serif;font-size:10px;fill:#222222", "end");
  }
  svg.text((l.margin_left + l.width - l.margin_right) / 2.0, l.height - 10, x_label,
           "font-family:sans-serif;font-size:11px;fill:#222222", "middle");
  svg.text(14, l.margin_top - 8, y_label,
           "font-family:sans-serif;font-size:11px;fill:#222222", "start");
}

std::string render_lineplot(const WeeklySeries& series, Sentiment sentiment,
                            const ChangePointEstimate& est, const PredictiveBand& band) {
  const Eigen::ArrayXd& y = series.target(sentiment);
  const Eigen::Index T = y.size();

  double y_lo = std::min(y.minCoeff(), band.lo.minCoeff());
  double y_hi = std::max(y.maxCoeff(), band.hi.maxCoeff());
  double pad = 0.05 * (y_hi - y_lo + 1e-9);
  Frame f = make_frame(0.0, static_cast<double>(T - 1), y_lo - pad, y_hi + pad);
  SvgCanvas svg(f.layout.width, f.layout.height);

  // 90% interval of the change point location
  double cp_lo = f.x(static_cast<double>(est.week_q05));
  double cp_hi = f.x(static_cast<double>(est.week_q95));
  svg.rect(cp_lo, f.layout.margin_top, std::max(cp_hi - cp_lo, 1.0),
           f.layout.plot_height(), "fill:#f8c8dc;fill-opacity:0.6;stroke:none",
           "cp-interval");

  std::vector<std::pair<double, double>> poly;
  poly.reserve(2 * band.x.size());
  for (Eigen::Index i = 0; i < band.x.size(); ++i)
    poly.emplace_back(f.x(band.x[i]), f.y(band.hi[i]));
  for (Eigen::Index i = band.x.size(); i-- > 0;)
    poly.emplace_back(f.x(band.x[i]), f.y(band.lo[i]));
  svg.polygon(poly, "fill:#aec7e8;fill-opacity:0.55;stroke:none", "band");

  std::vector<std::pair<double, double>> line;
  line.reserve(band.x.size());
  for (Eigen::Index i = 0; i < band.x.size(); ++i)
    line.emplace_back(f.x(band.x[i]), f.y(band.median[i]));
  svg.polyline(line, "stroke:#2ca02c;stroke-width:1.5", "regression");

  for (Eigen::Index i = 0; i < T; ++i)
    svg.circle(f.x(static_cast<double>(i)), f.y(y[i]), 2.0,
               "fill:#1f77b4;fill-opacity:0.7;stroke:none", "data");

  double cp_x = f.x(static_cast<double>(est.week_index));
  svg.line(cp_x, f.layout.margin_top, cp_x, f.layout.height - f.layout.margin_bottom,
           "stroke:#000000;stroke-width:1.2;stroke-dasharray:5,3", "changepoint");

  draw_axes(svg, f, "week", std::string("log1p ") + std::string(sentiment_name(sentiment)) +
                                " reviews");
  svg.text(f.layout.margin_left + 6, f.layout.margin_top + 14,
           "change point: week " + std::to_string(est.week_index) + " (" +
               format_date(est.calendar_date) + ")",
           "font-family:sans-serif;font-size:11px;fill:#222222");
  return std::move(svg).finish();
}

std::string render_posterior(const ChainSet& set) {
  const int bins = 30;
  PlotLayout cell;
  cell.width = 240.0;
  cell.height = 200.0;
  cell.margin_left = 40.0;
  cell.margin_right = 12.0;
  cell.margin_top = 24.0;
  cell.margin_bottom = 32.0;

  SvgCanvas svg(3 * cell.width, 2 * cell.height);
  for (int j = 0; j < 6; ++j) {
    double ox = (j % 3) * cell.width;
    double oy = (j / 3) * cell.height;
    Eigen::VectorXd draws = pooled_column(set, j);
    double lo = draws.minCoeff();
    double hi = draws.maxCoeff();
    if (!(hi > lo)) {
      double pad = lo == 0.0 ? 1e-6 : std::abs(lo) * 1e-6;
      lo -= pad;
      hi += pad;
    }
    Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(bins);
    for (Eigen::Index i = 0; i < draws.size(); ++i) {
      int b = static_cast<int>((draws[i] - lo) / (hi - lo) * bins);
      counts[std::min(std::max(b, 0), bins - 1)] += 1.0;
    }
    double c_max = counts.maxCoeff();

    AxisScale xs{lo, hi, ox + cell.margin_left, ox + cell.width - cell.margin_right};
    AxisScale ys{0.0, c_max, oy + cell.height - cell.margin_bottom, oy + cell.margin_top};
    svg.rect(ox + cell.margin_left, oy + cell.margin_top, cell.plot_width(),
             cell.plot_height(), "fill:none;stroke:#444444;stroke-width:1");
    double bar_w = cell.plot_width() / bins;
    for (int b = 0; b < bins; ++b) {
      if (counts[b] <= 0.0) continue;
      double x0 = ox + cell.margin_left + b * bar_w;
      double y0 = ys(counts[b]);
      svg.rect(x0, y0, bar_w, (oy + cell.height - cell.margin_bottom) - y0,
               "fill:#1f77b4;fill-opacity:0.8;stroke:none", "hist");
    }
    svg.text(ox + cell.width / 2.0, oy + 16, std::string(kParamNames[j]),
             "font-family:sans-serif;font-size:12px;fill:#222222", "middle");
    for (double t : {lo, hi}) {
      svg.text(xs(t), oy + cell.height - cell.margin_bottom + 14, format_tick(t),
               "font-family:sans-serif;font-size:9px;fill:#222222", "middle");
    }
  }
  return std::move(svg).finish();
}

std::string render_residuals(const ResidualDiagnostics& res) {
  const Eigen::Index T = res.residuals.size();
  double lo = res.residuals.minCoeff();
  double hi = res.residuals.maxCoeff();
  double pad = 0.08 * (hi - lo + 1e-9);
  Frame f = make_frame(0.0, static_cast<double>(T - 1), std::min(lo - pad, 0.0),
                       std::max(hi + pad, 0.0));
  SvgCanvas svg(f.layout.width, f.layout.height);
  svg.line(f.x.pix_min, f.y(0.0), f.x.pix_max, f.y(0.0),
           "stroke:#888888;stroke-width:1;stroke-dasharray:4,3", "zero");
  for (Eigen::Index i = 0; i < T; ++i)
    svg.circle(f.x(static_cast<double>(i)), f.y(res.residuals[i]), 2.0,
               "fill:#d62728;fill-opacity:0.7;stroke:none", "resid");
  draw_axes(svg, f, "week", "residual");
  return std::move(svg).finish();
}

std::string render_qq(const ResidualDiagnostics& res) {
  double lo = std::min(res.qq_theoretical.minCoeff(), res.qq_sample.minCoeff());
  double hi = std::max(res.qq_theoretical.maxCoeff(), res.qq_sample.maxCoeff());
  double pad = 0.08 * (hi - lo + 1e-9);
  Frame f = make_frame(lo - pad, hi + pad, lo - pad, hi + pad);
  SvgCanvas svg(f.layout.width, f.layout.height);
  svg.line(f.x(lo), f.y(lo), f.x(hi), f.y(hi),
           "stroke:#888888;stroke-width:1;stroke-dasharray:4,3", "identity");
  for (Eigen::Index i = 0; i < res.qq_sample.size(); ++i)
    svg.circle(f.x(res.qq_theoretical[i]), f.y(res.qq_sample[i]), 2.0,
               "fill:#1f77b4;fill-opacity:0.7;stroke:none", "qq");
  draw_axes(svg, f, "theoretical quantile", "sample quantile");
  return std::move(svg).finish();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> render_plots(const RenderInputs& in) {
  if (!in.series || !in.chains || !in.estimate || !in.band || !in.residuals)
    throw_error(ErrorKind::Domain, "render_plots: missing inputs");
  require_draws(*in.chains, "render_plots");
  if (in.series->size() == 0) throw_error(ErrorKind::Domain, "render_plots: empty series");
  if (in.band->x.size() == 0) throw_error(ErrorKind::Domain, "render_plots: empty band");

  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("lineplot.svg",
                   render_lineplot(*in.series, in.sentiment, *in.estimate, *in.band));
  out.emplace_back("posterior.svg", render_posterior(*in.chains));
  out.emplace_back("residuals.svg", render_residuals(*in.residuals));
  out.emplace_back("qq.svg", render_qq(*in.residuals));
  return out;
}

nlohmann::ordered_json emit_result(const ResultInputs& in) {
  if (!in.series || !in.diagnostics || !in.estimate || !in.band || !in.residuals)
    throw_error(ErrorKind::Domain, "emit_result: missing inputs");

  const WeeklySeries& series = *in.series;
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["input"] = {{"series", in.series_path},
                {"category", in.category},
                {"sentiment", std::string(sentiment_name(in.sentiment))},
                {"weeks", series.size()},
                {"start_date", format_date(series.start_date)},
                {"end_date", format_date(series.week_date(series.size() - 1))}};
  j["config"] = in.config_echo;
  j["diagnostics"] = diagnostics_to_json(*in.diagnostics);
  j["converged"] = in.diagnostics->converged;

  const ChangePointEstimate& est = *in.estimate;
  nlohmann::ordered_json cp;
  cp["tau_mean"] = est.tau_mean;
  cp["tau_median"] = est.tau_median;
  cp["tau_q05"] = est.tau_q05;
  cp["tau_q95"] = est.tau_q95;
  cp["week_index"] = est.week_index;
  cp["week_q05"] = est.week_q05;
  cp["week_q95"] = est.week_q95;
  cp["calendar_date"] = format_date(est.calendar_date);
  if (est.window_given) {
    cp["in_window"] = est.in_window;
  } else {
    cp["in_window"] = nullptr;
  }
  j["changepoint"] = cp;

  auto to_vec = [](const Eigen::ArrayXd& a) {
    return std::vector<double>(a.data(), a.data() + a.size());
  };
  j["band"] = {{"x", to_vec(in.band->x)},
               {"median", to_vec(in.band->median)},
               {"lo", to_vec(in.band->lo)},
               {"hi", to_vec(in.band->hi)}};
  j["residuals"] = {{"mean", in.residuals->residuals.mean()},
                    {"std", sample_std(in.residuals->residuals.matrix())},
                    {"values", to_vec(in.residuals->residuals)}};
  return j;
}

}  // namespace chpt
