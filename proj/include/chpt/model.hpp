#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string_view>

namespace chpt {

enum class LikelihoodKind { Normal, Cauchy };

std::string_view likelihood_name(LikelihoodKind k);
std::optional<LikelihoodKind> parse_likelihood(std::string_view text);

// Constrained parameters of the two-segment regression. tau locates the
// change point as a fraction of the span: Gamma = tau * (T - 1) in weeks.
// Week x takes segment 1 (w1, b1) when x < Gamma and segment 2 when x >= Gamma.
struct ChangePointParams {
  double w1 = 0.0;
  double w2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double tau = 0.5;    // (0, 1)
  double sigma = 1.0;  // (0, sigma_upper)
};

struct PriorSpec {
  double mu_w1 = 0.0, sd_w1 = 0.1;
  double mu_w2 = 0.0, sd_w2 = 0.1;
  double mu_b1 = 0.0, sd_b1 = 1.0;
  double mu_b2 = 0.0, sd_b2 = 1.0;
  double alpha = 4.0, beta = 2.0;  // Beta prior on tau; alpha > beta
  double sigma_upper = 1.0;        // Uniform(0, sigma_upper) prior on sigma
};

// Unconstrained coordinates used by the sampler, ordered
// (w1, w2, b1, b2, z_tau, z_sigma) with tau = logistic(z_tau) and
// sigma = sigma_upper * logistic(z_sigma).
using ParamVector = Eigen::Matrix<double, 6, 1>;

inline constexpr std::array<std::string_view, 6> kParamNames = {
    "w1", "w2", "b1", "b2", "tau", "sigma"};

// Segment-blend sharpness in weeks^-1 (0 = hard switch). Two per week keeps
// the fitted switch within the weekly sampling resolution while leaving the
// posterior geometry navigable; steeper blends turn the change-point
// direction into a comb of near-discontinuities that stalls the sampler.
inline constexpr double kDefaultSharpness = 2.0;
inline constexpr double kDefaultSlopeSd = 0.1;

double logistic(double t);
double logit(double p);

// Intercept prior means come from the first/last quarter of the series in
// time order; sd_b2 = mu_b2 / 4 with a 0.25 floor so a near-zero early level
// cannot collapse the prior. Requires T >= 8 and alpha > beta > 0.
PriorSpec derive_priors(const Eigen::ArrayXd& target, double alpha, double beta,
                        double sigma_upper, double slope_sd);

// 2 * sample std of the target, the default Uniform upper bound on sigma.
double auto_sigma_upper(const Eigen::ArrayXd& target);

// sharpness = 0: hard switch at Gamma; sharpness k > 0: sigmoid blend
// s = logistic(k * (x - Gamma)) between the two segment lines.
double predict_mean(const ChangePointParams& p, double x, Eigen::Index T,
                    double sharpness);
Eigen::ArrayXd mean_curve(const ChangePointParams& p, const Eigen::ArrayXd& x,
                          Eigen::Index T, double sharpness);

double log_likelihood(const ChangePointParams& p, const Eigen::ArrayXd& y,
                      LikelihoodKind kind, double sharpness);

double log_prior(const ChangePointParams& p, const PriorSpec& priors);

// Bijective on the interior; throws when tau or sigma sits on a boundary.
ParamVector to_unconstrained(const ChangePointParams& p, const PriorSpec& priors);
ChangePointParams to_constrained(const ParamVector& z, const PriorSpec& priors);

// log_likelihood + log_prior at to_constrained(z) plus the log-Jacobian of
// the two logistic transforms; the evidence term is dropped (constant in z).
double log_posterior_unconstrained(const ParamVector& z, const Eigen::ArrayXd& y,
                                   const PriorSpec& priors, LikelihoodKind kind,
                                   double sharpness);

// Analytic gradient of log_posterior_unconstrained. In hard mode the z_tau
// component carries only the prior and Jacobian parts; the likelihood is
// flat in tau between knots.
ParamVector grad_log_posterior(const ParamVector& z, const Eigen::ArrayXd& y,
                               const PriorSpec& priors, LikelihoodKind kind,
                               double sharpness);

// Bundles data, priors, and settings into the density/gradient pair the
// sampler drives. Week indices are the array positions 0..T-1.
class PosteriorTarget {
 public:
  PosteriorTarget(Eigen::ArrayXd y, PriorSpec priors, LikelihoodKind kind,
                  double sharpness);

  int dim() const { return 6; }
  double log_density(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;

  const Eigen::ArrayXd& y() const { return y_; }
  const PriorSpec& priors() const { return priors_; }
  LikelihoodKind kind() const { return kind_; }
  double sharpness() const { return sharpness_; }

  // warmup continuation: the sampler widens the segment blend early on and
  // tightens it back to the configured value before any retained draw
  void set_sharpness(double sharpness) { sharpness_ = sharpness; }

 private:
  Eigen::ArrayXd y_;
  Eigen::ArrayXd x_;  // week indices 0..T-1
  PriorSpec priors_;
  LikelihoodKind kind_;
  double sharpness_;
};

}  // namespace chpt
