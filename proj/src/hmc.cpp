#include "chpt/hmc.hpp"

#include <array>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "chpt/csv.hpp"
#include "chpt/errors.hpp"

namespace chpt {

void HmcConfig::validate() const {
  if (num_samples <= 0) throw_error(ErrorKind::Config, "num_samples must be positive");
  if (num_chains <= 0) throw_error(ErrorKind::Config, "num_chains must be positive");
  if (warmup_steps < 0) throw_error(ErrorKind::Config, "warmup_steps must be >= 0");
  if (!(initial_step_size > 0.0))
    throw_error(ErrorKind::Config, "initial_step_size must be positive");
  if (num_leapfrog_steps <= 0)
    throw_error(ErrorKind::Config, "num_leapfrog_steps must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw_error(ErrorKind::Config, "target_accept must lie in (0, 1)");
  if (!(divergence_energy_threshold > 0.0))
    throw_error(ErrorKind::Config, "divergence_energy_threshold must be positive");
}

namespace {

// OLS line fit over y[lo..hi), x = week index
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
};

LineFit fit_line(const Eigen::ArrayXd& y, Eigen::Index lo, Eigen::Index hi) {
  const Eigen::Index n = hi - lo;
  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(n, static_cast<double>(lo),
                                               static_cast<double>(hi - 1));
  Eigen::ArrayXd seg = y.segment(lo, n);
  double x_mean = x.mean();
  double y_mean = seg.mean();
  double sxx = (x - x_mean).square().sum();
  LineFit f;
  f.slope = sxx > 0.0 ? ((x - x_mean) * (seg - y_mean)).sum() / sxx : 0.0;
  f.intercept = y_mean - f.slope * x_mean;
  f.sse = (seg - (f.intercept + f.slope * x)).square().sum();
  return f;
}

// Candidate state from a two-segment least-squares fit at a given split.
// Used by the warmup mode search; the posterior for this model is multimodal
// ("no change point" line fits attract chains started far from the truth)
// and plain HMC cannot cross between those modes.
ParamVector split_candidate(const Eigen::ArrayXd& y, Eigen::Index split,
                            const PriorSpec& priors) {
  const Eigen::Index T = y.size();
  LineFit left = fit_line(y, 0, split);
  LineFit right = fit_line(y, split, T);
  ChangePointParams p;
  p.w1 = left.slope;
  p.b1 = left.intercept;
  p.w2 = right.slope;
  p.b2 = right.intercept;
  p.tau = static_cast<double>(split) / static_cast<double>(T - 1);
  double sigma = std::sqrt((left.sse + right.sse) / static_cast<double>(T));
  p.sigma = std::min(std::max(sigma, 0.05 * priors.sigma_upper),
                     0.95 * priors.sigma_upper);
  p.tau = std::min(std::max(p.tau, 1e-6), 1.0 - 1e-6);
  return to_unconstrained(p, priors);
}

}  // namespace

Eigen::MatrixXd posterior_preconditioner(Eigen::Index num_weeks,
                                         const PriorSpec& priors) {
  const double span = static_cast<double>(num_weeks - 1);
  const double n = static_cast<double>(num_weeks);
  const double sigma_mid = 0.5 * priors.sigma_upper;

  // least-squares information scales, capped by the prior widths
  auto slope_scale = [&](double prior_sd) {
    return std::max(std::min(sigma_mid * std::sqrt(3.0) / std::pow(span, 1.5), prior_sd),
                    1e-10);
  };
  const double s_w1 = slope_scale(priors.sd_w1);
  const double s_w2 = slope_scale(priors.sd_w2);
  const double s_level = std::max(sigma_mid * std::sqrt(4.0 / n), 1e-10);
  const double center1 = 0.25 * span;
  const double center2 = 0.75 * span;

  // coordinates: (slope1, slope2, level1 at center1, level2 at center2,
  // logit tau, logit sigma/upper); intercepts follow as b = level - w * center
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
  m(0, 0) = s_w1;
  m(1, 1) = s_w2;
  m(2, 2) = std::min(priors.sd_b1, s_level);
  m(3, 3) = std::min(priors.sd_b2, s_level);
  m(2, 0) = -center1 * s_w1;
  m(3, 1) = -center2 * s_w2;
  m(4, 4) = 0.1;                 // logit(tau)
  m(5, 5) = std::sqrt(2.0 / n);  // logit(sigma / upper)
  return m;
}

ChainSet run_chains(const Eigen::ArrayXd& y, const PriorSpec& priors,
                    LikelihoodKind kind, double sharpness, const HmcConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd precond = posterior_preconditioner(y.size(), priors);
  const Eigen::MatrixXd precond_inv = precond.inverse();
  const Eigen::Index T = y.size();

  // Mode-search schedule: during the first half of warmup, a handful of
  // greedy jump moves propose two-segment least-squares fits at randomly
  // scanned splits and relocate the chain when that beats its current
  // state. Jump states are never retained; every stored draw comes from
  // plain HMC transitions targeting the configured posterior.
  const int search_until = cfg.warmup_steps / 2;
  const int search_every = 25;
  const int splits_per_scan = 32;

  ChainSet set;
  set.config = cfg;
  set.chains.reserve(cfg.num_chains);

  for (int c = 0; c < cfg.num_chains; ++c) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(c));

    ChangePointParams init;
    init.w1 = rng.normal(priors.mu_w1, priors.sd_w1);
    init.w2 = rng.normal(priors.mu_w2, priors.sd_w2);
    init.b1 = rng.normal(priors.mu_b1, priors.sd_b1);
    init.b2 = rng.normal(priors.mu_b2, priors.sd_b2);
    double tau = rng.beta(priors.alpha, priors.beta);
    init.tau = std::min(std::max(tau, 1e-9), 1.0 - 1e-9);
    init.sigma = rng.uniform(0.1 * priors.sigma_upper, 0.9 * priors.sigma_upper);

    PosteriorTarget target(y, priors, kind, sharpness);
    PreconditionedTarget<PosteriorTarget> view{target, precond};
    Eigen::VectorXd v = precond_inv * to_unconstrained(init, priors);

    DualAveraging adapt(cfg.initial_step_size, cfg.target_accept);
    for (int m = 0; m < cfg.warmup_steps; ++m) {
      if (T >= 8 && m < search_until && m % search_every == 0) {
        double best = view.log_density(v);
        for (int s = 0; s < splits_per_scan; ++s) {
          Eigen::Index split =
              2 + static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(T - 3));
          Eigen::VectorXd cand = precond_inv * split_candidate(y, split, priors);
          double cand_density = view.log_density(cand);
          if (cand_density > best) {
            best = cand_density;
            v = cand;
          }
        }
      }
      TransitionResult tr =
          hmc_transition(v, rng, jittered_step(adapt.current_step(), rng),
                         cfg.num_leapfrog_steps, view, cfg.divergence_energy_threshold);
      adapt.update(tr.accept_prob);
    }
    const double step =
        cfg.warmup_steps > 0 ? adapt.adapted_step() : cfg.initial_step_size;

    Chain chain;
    chain.final_step_size = step;
    chain.draws.resize(cfg.num_samples, 6);
    long accepted = 0;
    for (int m = 0; m < cfg.num_samples; ++m) {
      TransitionResult tr =
          hmc_transition(v, rng, jittered_step(step, rng), cfg.num_leapfrog_steps, view,
                         cfg.divergence_energy_threshold);
      if (tr.diverged) ++chain.num_divergences;
      if (tr.accepted) ++accepted;
      ChangePointParams p = to_constrained(precond * v, priors);
      chain.draws(m, 0) = p.w1;
      chain.draws(m, 1) = p.w2;
      chain.draws(m, 2) = p.b1;
      chain.draws(m, 3) = p.b2;
      chain.draws(m, 4) = p.tau;
      chain.draws(m, 5) = p.sigma;
    }
    chain.accept_rate =
        cfg.num_samples > 0 ? static_cast<double>(accepted) / cfg.num_samples : 0.0;
    set.chains.push_back(std::move(chain));
  }

  bool all_divergent = true;
  for (const auto& chain : set.chains)
    all_divergent = all_divergent && chain.num_divergences == cfg.num_samples;
  if (all_divergent) {
    std::string msg = "sampling failed: every transition in every chain diverged;";
    msg += " step sizes:";
    for (const auto& chain : set.chains)
      msg += " " + std::to_string(chain.final_step_size);
    throw_error(ErrorKind::Sampling, msg);
  }
  return set;
}

void write_draws_csv(const ChainSet& set, std::ostream& out) {
  out << "chain,iter,w1,w2,b1,b2,tau,sigma\n";
  char buf[32];
  for (std::size_t c = 0; c < set.chains.size(); ++c) {
    const Eigen::MatrixXd& draws = set.chains[c].draws;
    for (Eigen::Index m = 0; m < draws.rows(); ++m) {
      out << c << ',' << m;
      for (Eigen::Index j = 0; j < draws.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", draws(m, j));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

ChainSet read_draws_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw_error(ErrorKind::Schema, "draws file is empty");
  if (fields.size() != 8 || fields[0] != "chain" || fields[1] != "iter")
    throw_error(ErrorKind::Schema, "draws file header does not match expected schema");

  std::vector<std::vector<std::array<double, 6>>> rows;
  while (reader.next(fields)) {
    long line = reader.record_line();
    if (fields.size() != 8)
      throw_error(ErrorKind::Schema,
                  "draws line " + std::to_string(line) + ": expected 8 columns");
    std::size_t chain_idx;
    std::array<double, 6> v{};
    try {
      chain_idx = std::stoul(fields[0]);
      for (int j = 0; j < 6; ++j) v[j] = std::stod(fields[2 + j]);
    } catch (const std::exception&) {
      throw_error(ErrorKind::Schema,
                  "draws line " + std::to_string(line) + ": bad numeric value");
    }
    if (chain_idx >= rows.size()) rows.resize(chain_idx + 1);
    rows[chain_idx].push_back(v);
  }
  if (rows.empty()) throw_error(ErrorKind::Schema, "draws file has no data rows");

  ChainSet set;
  set.config.num_chains = static_cast<int>(rows.size());
  set.config.num_samples = static_cast<int>(rows[0].size());
  for (const auto& chain_rows : rows) {
    if (chain_rows.empty() || chain_rows.size() != rows[0].size())
      throw_error(ErrorKind::Schema, "draws file: chains have unequal draw counts");
    Chain chain;
    chain.draws.resize(static_cast<Eigen::Index>(chain_rows.size()), 6);
    for (std::size_t m = 0; m < chain_rows.size(); ++m)
      for (int j = 0; j < 6; ++j)
        chain.draws(static_cast<Eigen::Index>(m), j) = chain_rows[m][j];
    set.chains.push_back(std::move(chain));
  }
  return set;
}

}  // namespace chpt
