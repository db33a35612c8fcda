#include <Eigen/Dense>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "chpt/csv.hpp"
#include "chpt/diagnostics.hpp"
#include "chpt/errors.hpp"
#include "chpt/hmc.hpp"
#include "chpt/ingest.hpp"
#include "chpt/io_util.hpp"
#include "chpt/model.hpp"
#include "chpt/report.hpp"
#include "chpt/series.hpp"
#include "chpt/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int exit_code_for(const chpt::Error& e) {
  switch (e.kind()) {
    case chpt::ErrorKind::Io:
    case chpt::ErrorKind::Sampling:
      return 1;
    default:
      return 2;
  }
}

chpt::WeeklySeries load_series(const fs::path& path) {
  std::istringstream in(chpt::read_file(path));
  return chpt::read_series_csv(in);
}

chpt::ChainSet load_draws(const fs::path& path) {
  std::istringstream in(chpt::read_file(path));
  return chpt::read_draws_csv(in);
}

chpt::Sentiment sentiment_from(const std::string& name) {
  auto s = chpt::parse_sentiment(name);
  if (!s || *s == chpt::Sentiment::Neutral)
    chpt::throw_error(chpt::ErrorKind::Config,
                      "sentiment must be 'positive' or 'negative', got '" + name + "'");
  return *s;
}

chpt::Date date_from(const std::string& text, const char* what) {
  auto d = chpt::parse_date(text);
  if (!d)
    chpt::throw_error(chpt::ErrorKind::Config,
                      std::string(what) + " is not a YYYY-MM-DD date: '" + text + "'");
  return *d;
}

double positive_double_from(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size() || !(v > 0.0)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    chpt::throw_error(chpt::ErrorKind::Config,
                      std::string(what) + " must be a positive number, got '" + text + "'");
  }
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    ordered_json inputs, ordered_json outputs, ordered_json options) {
  ordered_json m;
  m["tool"] = "chpt";
  m["version"] = chpt::kToolVersion;
  m["subcommand"] = subcommand;
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  m["options"] = std::move(options);
  chpt::write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

// --- model options shared by fit / report / run-all -------------------------

struct ModelOptions {
  double alpha = 4.0;
  double beta = 2.0;
  std::string sigma_upper = "auto";
  double slope_sd = chpt::kDefaultSlopeSd;
  double sharpness = chpt::kDefaultSharpness;
  std::string likelihood = "normal";
  std::string config_path;
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--config", m.config_path,
                  "key = value config file (alpha, beta, sigma_upper, slope_sd, "
                  "sharpness, likelihood); flags take precedence");
  cmd->add_option("--alpha", m.alpha, "Beta prior alpha for tau (alpha > beta)");
  cmd->add_option("--beta", m.beta, "Beta prior beta for tau");
  cmd->add_option("--sigma-upper", m.sigma_upper,
                  "Uniform prior upper bound on sigma: 'auto' (2 x target std) or a number");
  cmd->add_option("--slope-sd", m.slope_sd, "Normal prior sd for both slopes");
  cmd->add_option("--sharpness", m.sharpness,
                  "sigmoid sharpness of the segment switch; 0 = hard switch");
  cmd->add_option("--likelihood", m.likelihood, "observation model")
      ->check(CLI::IsMember({"normal", "cauchy"}));
}

// flag-over-file: a config value applies only when its flag was not passed
void apply_config_file(CLI::App* cmd, ModelOptions& m) {
  if (m.config_path.empty()) return;
  auto kv = chpt::read_kv_file(m.config_path);
  for (const auto& [key, value] : kv) {
    if (key == "alpha") {
      if (!cmd->count("--alpha")) m.alpha = positive_double_from(value, "alpha");
    } else if (key == "beta") {
      if (!cmd->count("--beta")) m.beta = positive_double_from(value, "beta");
    } else if (key == "sigma_upper") {
      if (!cmd->count("--sigma-upper")) {
        if (value != "auto") positive_double_from(value, "sigma_upper");
        m.sigma_upper = value;
      }
    } else if (key == "slope_sd") {
      if (!cmd->count("--slope-sd")) m.slope_sd = positive_double_from(value, "slope_sd");
    } else if (key == "sharpness") {
      if (!cmd->count("--sharpness")) {
        m.sharpness = std::stod(value);
        if (!(m.sharpness >= 0.0))
          chpt::throw_error(chpt::ErrorKind::Config, "sharpness must be >= 0");
      }
    } else if (key == "likelihood") {
      if (!chpt::parse_likelihood(value))
        chpt::throw_error(chpt::ErrorKind::Schema,
                          "config: likelihood must be 'normal' or 'cauchy'");
      if (!cmd->count("--likelihood")) m.likelihood = value;
    } else {
      chpt::throw_error(chpt::ErrorKind::Schema, "config: unknown key '" + key + "'");
    }
  }
}

double resolve_sigma_upper(const ModelOptions& m, const Eigen::ArrayXd& target) {
  if (m.sigma_upper == "auto") return chpt::auto_sigma_upper(target);
  return positive_double_from(m.sigma_upper, "sigma_upper");
}

chpt::LikelihoodKind resolve_likelihood(const ModelOptions& m) {
  auto kind = chpt::parse_likelihood(m.likelihood);
  if (!kind)
    chpt::throw_error(chpt::ErrorKind::Config,
                      "likelihood must be 'normal' or 'cauchy', got '" + m.likelihood + "'");
  return *kind;
}

ordered_json model_options_json(const ModelOptions& m, double resolved_sigma_upper) {
  return {{"likelihood", m.likelihood}, {"sharpness", m.sharpness},
          {"alpha", m.alpha},           {"beta", m.beta},
          {"sigma_upper", resolved_sigma_upper}, {"slope_sd", m.slope_sd}};
}

// --- sampler options ---------------------------------------------------------

struct SamplerOptions {
  int samples = 800;
  int chains = 4;
  int warmup = 500;
  double step_size = 0.1;
  int leapfrog_steps = 32;
  double target_accept = 0.8;
  std::uint64_t seed = 0;
  double rhat_threshold = 1.1;
};

void add_sampler_options(CLI::App* cmd, SamplerOptions& s) {
  cmd->add_option("--samples", s.samples, "post-warmup draws per chain");
  cmd->add_option("--chains", s.chains, "number of chains");
  cmd->add_option("--warmup", s.warmup, "warmup (adaptation) steps, discarded");
  cmd->add_option("--step-size", s.step_size, "initial leapfrog step size");
  cmd->add_option("--leapfrog-steps", s.leapfrog_steps, "leapfrog steps per transition");
  cmd->add_option("--target-accept", s.target_accept, "dual-averaging target acceptance");
  cmd->add_option("--seed", s.seed, "RNG seed; chain c uses seed + c");
  cmd->add_option("--rhat-threshold", s.rhat_threshold, "convergence threshold on r_hat");
}

chpt::HmcConfig hmc_config_from(const SamplerOptions& s) {
  chpt::HmcConfig cfg;
  cfg.num_samples = s.samples;
  cfg.num_chains = s.chains;
  cfg.warmup_steps = s.warmup;
  cfg.initial_step_size = s.step_size;
  cfg.num_leapfrog_steps = s.leapfrog_steps;
  cfg.target_accept = s.target_accept;
  cfg.seed = s.seed;
  return cfg;
}

ordered_json sampler_options_json(const SamplerOptions& s) {
  return {{"samples", s.samples},
          {"chains", s.chains},
          {"warmup", s.warmup},
          {"step_size", s.step_size},
          {"leapfrog_steps", s.leapfrog_steps},
          {"target_accept", s.target_accept},
          {"seed", s.seed},
          {"rhat_threshold", s.rhat_threshold}};
}

// --- subcommand argument bundles ---------------------------------------------

struct SynthArgs {
  double w1 = 0.0, w2 = 0.0, b1 = 0.0, b2 = 0.0;
  double tau = 0.75, sigma = 0.3;
  long long T = 200;
  std::string noise = "normal";
  std::uint64_t seed = 0;
  std::string start_date = "2013-01-07";
  std::string out = "series.csv";
};

struct IngestArgs {
  std::string input;
  std::string out = "series.csv";
  std::string col_date = "date";
  std::string col_rating = "rating";
  std::string col_category = "category";
  std::string category;
  std::string sentiment = "positive";
  int min_year = 2013;
  std::string category_map;
};

struct FitArgs {
  std::string input;
  std::string out_dir = ".";
  std::string sentiment = "positive";
  ModelOptions model;
  SamplerOptions sampler;
};

struct ReportArgs {
  std::string series;
  std::string draws;
  std::string diagnostics;
  std::string out_dir = ".";
  std::string sentiment = "positive";
  std::string category;
  std::string event_window;
  double band = 0.90;
  bool no_band_noise = false;
  std::uint64_t seed = 0;
  ModelOptions model;
};

// --- handlers ------------------------------------------------------------------

int run_synth(const SynthArgs& a) {
  chpt::SynthSpec spec;
  spec.w1 = a.w1;
  spec.w2 = a.w2;
  spec.b1 = a.b1;
  spec.b2 = a.b2;
  spec.tau_true = a.tau;
  spec.sigma_true = a.sigma;
  spec.T = static_cast<Eigen::Index>(a.T);
  auto kind = chpt::parse_likelihood(a.noise);
  if (!kind)
    chpt::throw_error(chpt::ErrorKind::Config, "noise must be 'normal' or 'cauchy'");
  spec.noise_kind = *kind;
  spec.seed = a.seed;
  spec.start_date = date_from(a.start_date, "--start-date");

  chpt::WeeklySeries series = chpt::generate(spec);
  std::ostringstream csv;
  chpt::write_series_csv(series, csv);

  fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  chpt::write_file_atomic(out, csv.str());

  ordered_json options = {{"w1", a.w1},       {"w2", a.w2},
                          {"b1", a.b1},       {"b2", a.b2},
                          {"tau", a.tau},     {"sigma", a.sigma},
                          {"T", a.T},         {"noise", a.noise},
                          {"seed", a.seed},   {"start_date", a.start_date}};
  write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "synth",
                 ordered_json::object(), {{"series", a.out}}, options);
  std::cout << "wrote " << a.out << " (" << series.size() << " weeks)\n";
  return 0;
}

int run_ingest(const IngestArgs& a) {
  std::istringstream in(chpt::read_file(a.input));
  chpt::ReviewCsvSchema schema{a.col_date, a.col_rating, a.col_category};
  chpt::ParseResult parsed = chpt::parse_reviews(in, schema);

  chpt::CategoryMap map = chpt::CategoryMap::defaults();
  if (!a.category_map.empty()) {
    std::istringstream map_in(chpt::read_file(a.category_map));
    map = chpt::CategoryMap::load(map_in);
  }
  sentiment_from(a.sentiment);  // validated; the CSV carries every sentiment column

  chpt::WeeklySeries series =
      chpt::aggregate_weekly(parsed.records, a.category, a.min_year, map);

  std::ostringstream csv;
  chpt::write_series_csv(series, csv);

  std::ostringstream rejects;
  rejects << "line,reason\n";
  for (const auto& r : parsed.rejects)
    rejects << r.line << ',' << chpt::csv_escape(r.reason) << '\n';

  fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  fs::path rejects_path = out.parent_path() / (out.stem().string() + ".rejects.csv");
  chpt::write_file_atomic(out, csv.str());
  chpt::write_file_atomic(rejects_path, rejects.str());

  ordered_json options = {{"col_date", a.col_date},
                          {"col_rating", a.col_rating},
                          {"col_category", a.col_category},
                          {"category", a.category},
                          {"sentiment", a.sentiment},
                          {"min_year", a.min_year},
                          {"category_map", a.category_map.empty() ? "<defaults>"
                                                                  : a.category_map}};
  write_manifest(out.has_parent_path() ? out.parent_path() : fs::path("."), "ingest",
                 {{"reviews", a.input}},
                 {{"series", a.out}, {"rejects", rejects_path.string()}}, options);

  std::cout << "ingested " << parsed.records.size() << " records into " << series.size()
            << " weeks starting " << chpt::format_date(series.start_date) << "; "
            << parsed.rejects.size() << " rows rejected (see " << rejects_path.string()
            << ")\n";
  return 0;
}

struct FitOutcome {
  chpt::ChainSet chains;
  chpt::DiagnosticsReport report;
  chpt::PriorSpec priors;
  double sigma_upper = 0.0;
};

FitOutcome fit_series(const chpt::WeeklySeries& series, chpt::Sentiment sentiment,
                      const ModelOptions& model, const SamplerOptions& sampler) {
  const Eigen::ArrayXd& target = series.target(sentiment);
  FitOutcome out;
  out.sigma_upper = resolve_sigma_upper(model, target);
  out.priors = chpt::derive_priors(target, model.alpha, model.beta, out.sigma_upper,
                                   model.slope_sd);
  out.chains = chpt::run_chains(target, out.priors, resolve_likelihood(model),
                                model.sharpness, hmc_config_from(sampler));
  out.report = chpt::summarize(out.chains, sampler.rhat_threshold);
  return out;
}

int run_fit(CLI::App* cmd, FitArgs& a) {
  apply_config_file(cmd, a.model);
  chpt::WeeklySeries series = load_series(a.input);
  chpt::Sentiment sentiment = sentiment_from(a.sentiment);

  FitOutcome fit = fit_series(series, sentiment, a.model, a.sampler);

  std::cout << chpt::format_table(fit.report);
  std::cout << (fit.report.converged
                    ? "converged: all r_hat below "
                    : "NOT converged: some r_hat at or above ")
            << fit.report.r_hat_threshold << "\n";

  fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  std::ostringstream draws;
  chpt::write_draws_csv(fit.chains, draws);
  chpt::write_file_atomic(out_dir / "draws.csv", draws.str());
  chpt::write_file_atomic(out_dir / "diagnostics.json",
                          chpt::diagnostics_to_json(fit.report).dump(2) + "\n");

  ordered_json options = model_options_json(a.model, fit.sigma_upper);
  options.update(sampler_options_json(a.sampler));
  options["sentiment"] = a.sentiment;
  write_manifest(out_dir, "fit", {{"series", a.input}},
                 {{"draws", (out_dir / "draws.csv").string()},
                  {"diagnostics", (out_dir / "diagnostics.json").string()}},
                 options);
  return fit.report.converged ? 0 : 3;
}

struct ReportFiles {
  ordered_json result;
  std::vector<std::pair<std::string, std::string>> plots;
};

ReportFiles build_report(const chpt::WeeklySeries& series, const chpt::ChainSet& chains,
                         const chpt::DiagnosticsReport& diagnostics,
                         chpt::Sentiment sentiment, const ModelOptions& model,
                         const std::string& series_path, const std::string& category,
                         const std::string& event_window, double band, bool band_noise,
                         std::uint64_t seed) {
  std::optional<chpt::DateWindow> window;
  if (!event_window.empty()) {
    window = chpt::parse_date_window(event_window);
    if (!window)
      chpt::throw_error(chpt::ErrorKind::Config,
                        "--event-window must be YYYY-MM-DD:YYYY-MM-DD with begin <= end");
  }

  const Eigen::Index T = series.size();
  chpt::LikelihoodKind kind = resolve_likelihood(model);
  chpt::ChangePointEstimate est = chpt::estimate_changepoint(chains, series, window);
  Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(T, 0.0, static_cast<double>(T - 1));
  chpt::PredictiveBand pband =
      chpt::predictive_band(chains, T, kind, model.sharpness, grid, band_noise, band, seed);
  chpt::ResidualDiagnostics res =
      chpt::residuals_and_qq(chains, series.target(sentiment), model.sharpness);

  chpt::ResultInputs inputs;
  inputs.series_path = series_path;
  inputs.category = category;
  inputs.sentiment = sentiment;
  inputs.series = &series;
  inputs.config_echo = model_options_json(model, 0.0);
  inputs.config_echo.erase("sigma_upper");  // not known from draws alone
  inputs.config_echo["band"] = band;
  inputs.config_echo["band_noise"] = band_noise;
  inputs.config_echo["seed"] = seed;
  if (!event_window.empty()) inputs.config_echo["event_window"] = event_window;
  inputs.diagnostics = &diagnostics;
  inputs.estimate = &est;
  inputs.band = &pband;
  inputs.residuals = &res;
  inputs.window = window;

  ReportFiles files;
  files.result = chpt::emit_result(inputs);

  chpt::RenderInputs render;
  render.series = &series;
  render.sentiment = sentiment;
  render.chains = &chains;
  render.estimate = &est;
  render.band = &pband;
  render.residuals = &res;
  render.sharpness = model.sharpness;
  files.plots = chpt::render_plots(render);
  return files;
}

int run_report(CLI::App* cmd, ReportArgs& a) {
  apply_config_file(cmd, a.model);
  chpt::WeeklySeries series = load_series(a.series);
  chpt::ChainSet chains = load_draws(a.draws);
  chpt::Sentiment sentiment = sentiment_from(a.sentiment);

  // divergence counts live in the fit-stage diagnostics file; summaries are
  // recomputed from the draws when it is absent
  chpt::DiagnosticsReport diagnostics;
  fs::path diag_path = a.diagnostics.empty()
                           ? fs::path(a.draws).parent_path() / "diagnostics.json"
                           : fs::path(a.diagnostics);
  if (fs::exists(diag_path)) {
    diagnostics =
        chpt::diagnostics_from_json(nlohmann::json::parse(chpt::read_file(diag_path)));
  } else {
    diagnostics = chpt::summarize(chains);
  }

  ReportFiles files =
      build_report(series, chains, diagnostics, sentiment, a.model, a.series, a.category,
                   a.event_window, a.band, !a.no_band_noise, a.seed);

  fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  chpt::write_file_atomic(out_dir / "result.json", files.result.dump(2) + "\n");
  ordered_json plot_names = ordered_json::array();
  for (const auto& [name, doc] : files.plots) {
    chpt::write_file_atomic(out_dir / name, doc);
    plot_names.push_back((out_dir / name).string());
  }

  ordered_json options = {{"sentiment", a.sentiment},
                          {"category", a.category},
                          {"likelihood", a.model.likelihood},
                          {"sharpness", a.model.sharpness},
                          {"band", a.band},
                          {"band_noise", !a.no_band_noise},
                          {"seed", a.seed},
                          {"event_window", a.event_window}};
  write_manifest(out_dir, "report",
                 {{"series", a.series},
                  {"draws", a.draws},
                  {"diagnostics", fs::exists(diag_path) ? diag_path.string() : ""}},
                 {{"result", (out_dir / "result.json").string()}, {"plots", plot_names}},
                 options);

  std::cout << "change point: week " << files.result["changepoint"]["week_index"]
            << " (" << files.result["changepoint"]["calendar_date"].get<std::string>()
            << ")\n";
  return 0;
}

struct RunAllArgs {
  IngestArgs ingest;
  std::string series;  // skip ingest when given
  std::string out_dir = ".";
  std::string sentiment = "positive";
  std::string category;
  std::string event_window;
  double band = 0.90;
  bool no_band_noise = false;
  ModelOptions model;
  SamplerOptions sampler;
};

int run_all(CLI::App* cmd, RunAllArgs& a) {
  apply_config_file(cmd, a.model);
  fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);

  chpt::WeeklySeries series;
  std::string series_path;
  ordered_json stage_inputs;
  if (!a.series.empty()) {
    series = load_series(a.series);
    series_path = a.series;
    stage_inputs["series"] = a.series;
  } else {
    if (a.ingest.input.empty())
      chpt::throw_error(chpt::ErrorKind::Config,
                        "run-all needs either --input (raw reviews) or --series");
    std::istringstream in(chpt::read_file(a.ingest.input));
    chpt::ReviewCsvSchema schema{a.ingest.col_date, a.ingest.col_rating,
                                 a.ingest.col_category};
    chpt::ParseResult parsed = chpt::parse_reviews(in, schema);
    chpt::CategoryMap map = chpt::CategoryMap::defaults();
    if (!a.ingest.category_map.empty()) {
      std::istringstream map_in(chpt::read_file(a.ingest.category_map));
      map = chpt::CategoryMap::load(map_in);
    }
    series = chpt::aggregate_weekly(parsed.records, a.category, a.ingest.min_year, map);
    std::ostringstream csv;
    chpt::write_series_csv(series, csv);
    chpt::write_file_atomic(out_dir / "series.csv", csv.str());
    std::ostringstream rejects;
    rejects << "line,reason\n";
    for (const auto& r : parsed.rejects)
      rejects << r.line << ',' << chpt::csv_escape(r.reason) << '\n';
    chpt::write_file_atomic(out_dir / "rejects.csv", rejects.str());
    series_path = (out_dir / "series.csv").string();
    stage_inputs["reviews"] = a.ingest.input;
  }

  chpt::Sentiment sentiment = sentiment_from(a.sentiment);
  FitOutcome fit = fit_series(series, sentiment, a.model, a.sampler);
  std::cout << chpt::format_table(fit.report);

  std::ostringstream draws;
  chpt::write_draws_csv(fit.chains, draws);
  chpt::write_file_atomic(out_dir / "draws.csv", draws.str());
  chpt::write_file_atomic(out_dir / "diagnostics.json",
                          chpt::diagnostics_to_json(fit.report).dump(2) + "\n");

  ReportFiles files = build_report(series, fit.chains, fit.report, sentiment, a.model,
                                   series_path, a.category, a.event_window, a.band,
                                   !a.no_band_noise, a.sampler.seed);
  chpt::write_file_atomic(out_dir / "result.json", files.result.dump(2) + "\n");
  for (const auto& [name, doc] : files.plots)
    chpt::write_file_atomic(out_dir / name, doc);

  ordered_json options = model_options_json(a.model, fit.sigma_upper);
  options.update(sampler_options_json(a.sampler));
  options["sentiment"] = a.sentiment;
  options["category"] = a.category;
  options["event_window"] = a.event_window;
  options["band"] = a.band;
  options["band_noise"] = !a.no_band_noise;
  write_manifest(out_dir, "run-all", stage_inputs,
                 {{"draws", (out_dir / "draws.csv").string()},
                  {"result", (out_dir / "result.json").string()}},
                 options);
  return fit.report.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian change-point estimation for weekly review-count series"};
  app.set_version_flag("--version", std::string("chpt ") + chpt::kToolVersion);
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic weekly series");
  synth->add_option("--w1", synth_args.w1, "slope before the change point");
  synth->add_option("--w2", synth_args.w2, "slope after the change point");
  synth->add_option("--b1", synth_args.b1, "intercept before the change point");
  synth->add_option("--b2", synth_args.b2, "intercept after the change point");
  synth->add_option("--tau", synth_args.tau, "true change point in (0, 1)");
  synth->add_option("--sigma", synth_args.sigma, "noise scale (target units)");
  synth->add_option("--T", synth_args.T, "number of weeks");
  synth->add_option("--noise", synth_args.noise, "noise family")
      ->check(CLI::IsMember({"normal", "cauchy"}));
  synth->add_option("--seed", synth_args.seed, "RNG seed");
  synth->add_option("--start-date", synth_args.start_date, "date of week 0");
  synth->add_option("--out", synth_args.out, "output series CSV path");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "aggregate raw reviews into a weekly series");
  ingest->add_option("--input", ingest_args.input, "raw reviews CSV")->required();
  ingest->add_option("--out", ingest_args.out, "output series CSV path");
  ingest->add_option("--col-date", ingest_args.col_date, "name of the date column");
  ingest->add_option("--col-rating", ingest_args.col_rating, "name of the rating column");
  ingest->add_option("--col-category", ingest_args.col_category,
                     "name of the category column");
  ingest->add_option("--category", ingest_args.category,
                     "keep only this category (mapped through the category map)");
  ingest->add_option("--sentiment", ingest_args.sentiment,
                     "sentiment of interest, recorded in the manifest")
      ->check(CLI::IsMember({"positive", "negative"}));
  ingest->add_option("--min-year", ingest_args.min_year, "drop reviews before this year");
  ingest->add_option("--category-map", ingest_args.category_map,
                     "category merge rules file ('raw => canonical' lines)");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "sample the change-point posterior with HMC");
  fit->add_option("--input", fit_args.input, "series CSV")->required();
  fit->add_option("--out-dir", fit_args.out_dir, "directory for draws + diagnostics");
  fit->add_option("--sentiment", fit_args.sentiment, "target column")
      ->check(CLI::IsMember({"positive", "negative"}));
  add_model_options(fit, fit_args.model);
  add_sampler_options(fit, fit_args.sampler);

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "summarize draws into results and plots");
  report->add_option("--series", report_args.series, "series CSV")->required();
  report->add_option("--draws", report_args.draws, "draws CSV from fit")->required();
  report->add_option("--diagnostics", report_args.diagnostics,
                     "diagnostics JSON from fit (default: next to draws)");
  report->add_option("--out-dir", report_args.out_dir, "directory for result + plots");
  report->add_option("--sentiment", report_args.sentiment, "target column")
      ->check(CLI::IsMember({"positive", "negative"}));
  report->add_option("--category", report_args.category, "category label for the result");
  report->add_option("--event-window", report_args.event_window,
                     "YYYY-MM-DD:YYYY-MM-DD window for the in_window flag");
  report->add_option("--band", report_args.band, "credible band probability");
  report->add_flag("--no-band-noise", report_args.no_band_noise,
                   "band of the mean curve only, without observation noise");
  report->add_option("--seed", report_args.seed, "RNG seed for band noise draws");
  add_model_options(report, report_args.model);

  RunAllArgs all_args;
  auto* all = app.add_subcommand("run-all", "ingest (optional) + fit + report");
  all->add_option("--input", all_args.ingest.input, "raw reviews CSV");
  all->add_option("--series", all_args.series, "series CSV (skips ingest)");
  all->add_option("--out-dir", all_args.out_dir, "directory for all outputs");
  all->add_option("--col-date", all_args.ingest.col_date, "name of the date column");
  all->add_option("--col-rating", all_args.ingest.col_rating, "name of the rating column");
  all->add_option("--col-category", all_args.ingest.col_category,
                  "name of the category column");
  all->add_option("--category", all_args.category, "category filter and result label");
  all->add_option("--min-year", all_args.ingest.min_year, "drop reviews before this year");
  all->add_option("--category-map", all_args.ingest.category_map,
                  "category merge rules file");
  all->add_option("--sentiment", all_args.sentiment, "target column")
      ->check(CLI::IsMember({"positive", "negative"}));
  all->add_option("--event-window", all_args.event_window,
                  "YYYY-MM-DD:YYYY-MM-DD window for the in_window flag");
  all->add_option("--band", all_args.band, "credible band probability");
  all->add_flag("--no-band-noise", all_args.no_band_noise,
                "band of the mean curve only, without observation noise");
  add_model_options(all, all_args.model);
  add_sampler_options(all, all_args.sampler);

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return run_synth(synth_args);
    if (ingest->parsed()) return run_ingest(ingest_args);
    if (fit->parsed()) return run_fit(fit, fit_args);
    if (report->parsed()) return run_report(report, report_args);
    if (all->parsed()) return run_all(all, all_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const chpt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
