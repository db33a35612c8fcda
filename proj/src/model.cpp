#include "chpt/model.hpp"

#include <cmath>

#include "chpt/errors.hpp"
#include "chpt/rng.hpp"
#include "chpt/stats.hpp"

namespace chpt {

std::string_view likelihood_name(LikelihoodKind k) {
  return k == LikelihoodKind::Normal ? "normal" : "cauchy";
}

std::optional<LikelihoodKind> parse_likelihood(std::string_view text) {
  if (text == "normal") return LikelihoodKind::Normal;
  if (text == "cauchy") return LikelihoodKind::Cauchy;
  return std::nullopt;
}

double logistic(double t) {
  if (t >= 0.0) {
    double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

namespace {

double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double normal_lpdf(double v, double mu, double sd) {
  double u = (v - mu) / sd;
  return -0.5 * std::log(2.0 * kPi) - std::log(sd) - 0.5 * u * u;
}

double lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

void validate_priors(const PriorSpec& p) {
  if (!(p.sd_w1 > 0.0 && p.sd_w2 > 0.0 && p.sd_b1 > 0.0 && p.sd_b2 > 0.0))
    throw_error(ErrorKind::Config, "prior standard deviations must be positive");
  if (!(p.alpha > 0.0 && p.beta > 0.0))
    throw_error(ErrorKind::Config, "Beta prior parameters must be positive");
  if (!(p.sigma_upper > 0.0))
    throw_error(ErrorKind::Config, "sigma_upper must be positive");
}

struct EvalResult {
  double value = 0.0;
  ParamVector grad = ParamVector::Zero();
};

EvalResult eval_posterior(const ParamVector& z, const Eigen::ArrayXd& x,
                          const Eigen::ArrayXd& y, const PriorSpec& pr,
                          LikelihoodKind kind, double sharpness, bool want_grad) {
  const Eigen::Index T = y.size();
  const double w1 = z[0], w2 = z[1], b1 = z[2], b2 = z[3];
  const double tau = logistic(z[4]);
  const double s_sig = logistic(z[5]);
  const double sigma = pr.sigma_upper * s_sig;
  const double span = static_cast<double>(T - 1);
  const double gamma_wk = tau * span;

  Eigen::ArrayXd seg1 = w1 * x + b1;
  Eigen::ArrayXd delta = (w2 - w1) * x + (b2 - b1);
  Eigen::ArrayXd s(T);
  if (sharpness > 0.0) {
    s = (sharpness * (x - gamma_wk)).unaryExpr([](double t) { return logistic(t); });
  } else {
    s = (x >= gamma_wk).cast<double>();
  }
  Eigen::ArrayXd r = y - (seg1 + s * delta);

  double loglik;
  double d_sigma = 0.0;
  Eigen::ArrayXd g;  // d loglik / d mu_i
  if (kind == LikelihoodKind::Normal) {
    const double inv_var = 1.0 / (sigma * sigma);
    const double sum_r2 = r.square().sum();
    loglik = -0.5 * static_cast<double>(T) * std::log(2.0 * kPi * sigma * sigma) -
             0.5 * sum_r2 * inv_var;
    if (want_grad) {
      g = r * inv_var;
      d_sigma = -static_cast<double>(T) / sigma + sum_r2 / (sigma * sigma * sigma);
    }
  } else {
    Eigen::ArrayXd q2 = (r / sigma).square();
    loglik = -static_cast<double>(T) * std::log(kPi * sigma) -
             q2.unaryExpr([](double v) { return std::log1p(v); }).sum();
    if (want_grad) {
      Eigen::ArrayXd denom = sigma * sigma + r.square();
      g = 2.0 * r / denom;
      d_sigma = -static_cast<double>(T) / sigma +
                (2.0 / sigma) * (r.square() / denom).sum();
    }
  }

  const double ln_tau = -softplus(-z[4]);
  const double ln_1mtau = -softplus(z[4]);
  double logprior = normal_lpdf(w1, pr.mu_w1, pr.sd_w1) +
                    normal_lpdf(w2, pr.mu_w2, pr.sd_w2) +
                    normal_lpdf(b1, pr.mu_b1, pr.sd_b1) +
                    normal_lpdf(b2, pr.mu_b2, pr.sd_b2) +
                    (pr.alpha - 1.0) * ln_tau + (pr.beta - 1.0) * ln_1mtau -
                    lbeta(pr.alpha, pr.beta) - std::log(pr.sigma_upper);

  // log-Jacobian of tau = logistic(z_tau), sigma = sigma_upper * logistic(z_sigma)
  double log_jac = ln_tau + ln_1mtau + std::log(pr.sigma_upper) - softplus(z[5]) -
                   softplus(-z[5]);

  EvalResult out;
  out.value = loglik + logprior + log_jac;
  if (!want_grad) return out;

  double d_tau_lik = 0.0;
  if (sharpness > 0.0) {
    d_tau_lik = -sharpness * span * (g * s * (1.0 - s) * delta).sum();
  }
  out.grad[0] = (g * (1.0 - s) * x).sum() - (w1 - pr.mu_w1) / (pr.sd_w1 * pr.sd_w1);
  out.grad[1] = (g * s * x).sum() - (w2 - pr.mu_w2) / (pr.sd_w2 * pr.sd_w2);
  out.grad[2] = (g * (1.0 - s)).sum() - (b1 - pr.mu_b1) / (pr.sd_b1 * pr.sd_b1);
  out.grad[3] = (g * s).sum() - (b2 - pr.mu_b2) / (pr.sd_b2 * pr.sd_b2);
  // chain rule through the logistic maps, with the Beta and Jacobian terms
  // folded in algebraically so boundary values stay finite
  out.grad[4] = d_tau_lik * tau * (1.0 - tau) + (pr.alpha - 1.0) * (1.0 - tau) -
                (pr.beta - 1.0) * tau + (1.0 - 2.0 * tau);
  out.grad[5] = d_sigma * sigma * (1.0 - s_sig) + (1.0 - 2.0 * s_sig);
  return out;
}

}  // namespace

double auto_sigma_upper(const Eigen::ArrayXd& target) {
  double sd = sample_std(target.matrix());
  return std::max(2.0 * sd, 1e-3);
}

PriorSpec derive_priors(const Eigen::ArrayXd& target, double alpha, double beta,
                        double sigma_upper, double slope_sd) {
  const Eigen::Index T = target.size();
  if (T < 8)
    throw_error(ErrorKind::Domain,
                "series too short: need at least 8 weeks, got " + std::to_string(T));
  if (!(beta > 0.0) || !(alpha > beta))
    throw_error(ErrorKind::Config, "tau prior requires alpha > beta > 0");
  if (!(sigma_upper > 0.0))
    throw_error(ErrorKind::Config, "sigma_upper must be positive");
  if (!(slope_sd > 0.0))
    throw_error(ErrorKind::Config, "slope_sd must be positive");

  const Eigen::Index q = (T + 3) / 4;  // ceil(T / 4)
  PriorSpec p;
  p.mu_w1 = 0.0;
  p.mu_w2 = 0.0;
  p.sd_w1 = slope_sd;
  p.sd_w2 = slope_sd;
  p.mu_b1 = target.head(q).mean();
  p.mu_b2 = target.tail(q).mean();
  p.sd_b1 = 1.0;
  p.sd_b2 = std::max(p.mu_b2 / 4.0, 0.25);
  p.alpha = alpha;
  p.beta = beta;
  p.sigma_upper = sigma_upper;
  return p;
}

double predict_mean(const ChangePointParams& p, double x, Eigen::Index T,
                    double sharpness) {
  const double gamma_wk = p.tau * static_cast<double>(T - 1);
  const double seg1 = p.w1 * x + p.b1;
  const double seg2 = p.w2 * x + p.b2;
  if (sharpness <= 0.0) return x >= gamma_wk ? seg2 : seg1;
  const double s = logistic(sharpness * (x - gamma_wk));
  return s * seg2 + (1.0 - s) * seg1;
}

Eigen::ArrayXd mean_curve(const ChangePointParams& p, const Eigen::ArrayXd& x,
                          Eigen::Index T, double sharpness) {
  const double gamma_wk = p.tau * static_cast<double>(T - 1);
  Eigen::ArrayXd seg1 = p.w1 * x + p.b1;
  Eigen::ArrayXd delta = (p.w2 - p.w1) * x + (p.b2 - p.b1);
  if (sharpness <= 0.0) return seg1 + (x >= gamma_wk).cast<double>() * delta;
  Eigen::ArrayXd s =
      (sharpness * (x - gamma_wk)).unaryExpr([](double t) { return logistic(t); });
  return seg1 + s * delta;
}

double log_likelihood(const ChangePointParams& p, const Eigen::ArrayXd& y,
                      LikelihoodKind kind, double sharpness) {
  const Eigen::Index T = y.size();
  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(T, 0.0, static_cast<double>(T - 1));
  Eigen::ArrayXd r = y - mean_curve(p, x, T, sharpness);
  if (kind == LikelihoodKind::Normal) {
    return -0.5 * static_cast<double>(T) * std::log(2.0 * kPi * p.sigma * p.sigma) -
           0.5 * r.square().sum() / (p.sigma * p.sigma);
  }
  return -static_cast<double>(T) * std::log(kPi * p.sigma) -
         (r / p.sigma).square().unaryExpr([](double v) { return std::log1p(v); }).sum();
}

double log_prior(const ChangePointParams& p, const PriorSpec& priors) {
  validate_priors(priors);
  return normal_lpdf(p.w1, priors.mu_w1, priors.sd_w1) +
         normal_lpdf(p.w2, priors.mu_w2, priors.sd_w2) +
         normal_lpdf(p.b1, priors.mu_b1, priors.sd_b1) +
         normal_lpdf(p.b2, priors.mu_b2, priors.sd_b2) +
         (priors.alpha - 1.0) * std::log(p.tau) +
         (priors.beta - 1.0) * std::log1p(-p.tau) - lbeta(priors.alpha, priors.beta) -
         std::log(priors.sigma_upper);
}

ParamVector to_unconstrained(const ChangePointParams& p, const PriorSpec& priors) {
  if (!(p.tau > 0.0 && p.tau < 1.0))
    throw_error(ErrorKind::Domain, "tau on or outside its (0, 1) boundary");
  if (!(p.sigma > 0.0 && p.sigma < priors.sigma_upper))
    throw_error(ErrorKind::Domain, "sigma on or outside its (0, sigma_upper) boundary");
  ParamVector z;
  z << p.w1, p.w2, p.b1, p.b2, logit(p.tau), logit(p.sigma / priors.sigma_upper);
  return z;
}

ChangePointParams to_constrained(const ParamVector& z, const PriorSpec& priors) {
  ChangePointParams p;
  p.w1 = z[0];
  p.w2 = z[1];
  p.b1 = z[2];
  p.b2 = z[3];
  p.tau = logistic(z[4]);
  p.sigma = priors.sigma_upper * logistic(z[5]);
  return p;
}

double log_posterior_unconstrained(const ParamVector& z, const Eigen::ArrayXd& y,
                                   const PriorSpec& priors, LikelihoodKind kind,
                                   double sharpness) {
  Eigen::ArrayXd x =
      Eigen::ArrayXd::LinSpaced(y.size(), 0.0, static_cast<double>(y.size() - 1));
  return eval_posterior(z, x, y, priors, kind, sharpness, false).value;
}

ParamVector grad_log_posterior(const ParamVector& z, const Eigen::ArrayXd& y,
                               const PriorSpec& priors, LikelihoodKind kind,
                               double sharpness) {
  Eigen::ArrayXd x =
      Eigen::ArrayXd::LinSpaced(y.size(), 0.0, static_cast<double>(y.size() - 1));
  return eval_posterior(z, x, y, priors, kind, sharpness, true).grad;
}

PosteriorTarget::PosteriorTarget(Eigen::ArrayXd y, PriorSpec priors,
                                 LikelihoodKind kind, double sharpness)
    : y_(std::move(y)), priors_(priors), kind_(kind), sharpness_(sharpness) {
  if (y_.size() < 2) throw_error(ErrorKind::Domain, "series must have at least 2 weeks");
  validate_priors(priors_);
  x_ = Eigen::ArrayXd::LinSpaced(y_.size(), 0.0, static_cast<double>(y_.size() - 1));
}

double PosteriorTarget::log_density(const Eigen::VectorXd& z) const {
  return eval_posterior(z, x_, y_, priors_, kind_, sharpness_, false).value;
}

Eigen::VectorXd PosteriorTarget::gradient(const Eigen::VectorXd& z) const {
  return eval_posterior(z, x_, y_, priors_, kind_, sharpness_, true).grad;
}

}  // namespace chpt
