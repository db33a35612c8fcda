#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include "chpt/model.hpp"
#include "chpt/rng.hpp"

namespace chpt {

struct HmcConfig {
  int num_samples = 800;   // post-warmup draws per chain
  int num_chains = 4;
  int warmup_steps = 500;  // step-size adaptation, discarded
  double initial_step_size = 0.1;
  int num_leapfrog_steps = 32;
  double target_accept = 0.8;
  double divergence_energy_threshold = 1000.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Chain {
  Eigen::MatrixXd draws;  // num_samples x dim, constrained space for the model
  double accept_rate = 0.0;
  int num_divergences = 0;  // post-warmup transitions only
  double final_step_size = 0.0;
};

struct ChainSet {
  std::vector<Chain> chains;
  HmcConfig config;

  int total_divergences() const {
    int n = 0;
    for (const auto& c : chains) n += c.num_divergences;
    return n;
  }
};

// One symplectic leapfrog step with identity mass matrix:
// half-kick, drift, half-kick. `grad` maps position to the gradient of the
// log target density.
template <class GradFn>
inline void leapfrog(Eigen::VectorXd& z, Eigen::VectorXd& momentum, double step_size,
                     GradFn&& grad) {
  momentum.noalias() += (0.5 * step_size) * grad(z);
  z.noalias() += step_size * momentum;
  momentum.noalias() += (0.5 * step_size) * grad(z);
}

inline double accept_probability(double delta_h) {
  return delta_h <= 0.0 ? 1.0 : std::exp(-delta_h);
}

struct TransitionResult {
  bool accepted = false;
  bool diverged = false;
  double accept_prob = 0.0;  // 0 when diverged
  double delta_h = 0.0;
};

// One HMC transition: fresh standard-normal momentum, L leapfrog steps,
// Metropolis accept on the Hamiltonian error. A non-finite state or an
// energy error above `divergence_threshold` is a divergence; the proposal
// is rejected and reported, not raised.
template <class Target>
TransitionResult hmc_transition(Eigen::VectorXd& z, Rng& rng, double step_size,
                                int num_leapfrog_steps, const Target& target,
                                double divergence_threshold) {
  const Eigen::Index dim = z.size();
  Eigen::VectorXd momentum(dim);
  for (Eigen::Index i = 0; i < dim; ++i) momentum[i] = rng.normal();

  const double h0 = -target.log_density(z) + 0.5 * momentum.squaredNorm();

  Eigen::VectorXd zq = z;
  Eigen::VectorXd pq = momentum;
  auto grad = [&target](const Eigen::VectorXd& v) { return target.gradient(v); };

  TransitionResult res;
  for (int step = 0; step < num_leapfrog_steps; ++step) {
    leapfrog(zq, pq, step_size, grad);
    if (!zq.allFinite() || !pq.allFinite()) {
      res.diverged = true;
      res.delta_h = std::numeric_limits<double>::infinity();
      return res;
    }
  }

  const double h1 = -target.log_density(zq) + 0.5 * pq.squaredNorm();
  res.delta_h = h1 - h0;
  if (!std::isfinite(res.delta_h) || res.delta_h > divergence_threshold) {
    res.diverged = true;
    return res;
  }
  res.accept_prob = accept_probability(res.delta_h);
  if (rng.uniform() < res.accept_prob) {
    res.accepted = true;
    z = zq;
  }
  return res;
}

// Symmetric per-transition step-size jitter. A fixed step and leapfrog count
// can resonate with a target's oscillation period, aliasing every proposal
// back near its start; +/-10% jitter breaks the periodicity and preserves
// detailed balance.
inline double jittered_step(double step, Rng& rng) {
  return step * rng.uniform(0.9, 1.1);
}

// Nesterov-style dual averaging of log step size toward a target acceptance
// rate; the averaged iterate is frozen after warmup.
class DualAveraging {
 public:
  DualAveraging(double initial_step_size, double target_accept)
      : mu_(std::log(10.0 * initial_step_size)),
        target_(target_accept),
        log_step_(std::log(initial_step_size)),
        log_step_avg_(std::log(initial_step_size)) {}

  double current_step() const { return std::exp(log_step_); }
  double adapted_step() const { return std::exp(log_step_avg_); }

  void update(double accept_prob) {
    ++count_;
    const double m = static_cast<double>(count_);
    h_bar_ = (1.0 - 1.0 / (m + kT0)) * h_bar_ + (target_ - accept_prob) / (m + kT0);
    log_step_ = mu_ - std::sqrt(m) / kGamma * h_bar_;
    const double w = std::pow(m, -kKappa);
    log_step_avg_ = w * log_step_ + (1.0 - w) * log_step_avg_;
  }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;

  double mu_;
  double target_;
  double log_step_;
  double log_step_avg_;
  double h_bar_ = 0.0;
  long count_ = 0;
};

// Warmup-adapt then sample one chain over an arbitrary target; draws are in
// the target's own coordinates. Divergences are counted post-warmup.
template <class Target>
Chain sample_chain(const Target& target, const Eigen::VectorXd& z0, Rng& rng,
                   const HmcConfig& cfg) {
  Eigen::VectorXd z = z0;
  DualAveraging adapt(cfg.initial_step_size, cfg.target_accept);

  for (int m = 0; m < cfg.warmup_steps; ++m) {
    TransitionResult tr =
        hmc_transition(z, rng, jittered_step(adapt.current_step(), rng),
                       cfg.num_leapfrog_steps, target, cfg.divergence_energy_threshold);
    adapt.update(tr.accept_prob);
  }
  const double step = cfg.warmup_steps > 0 ? adapt.adapted_step() : cfg.initial_step_size;

  Chain chain;
  chain.final_step_size = step;
  chain.draws.resize(cfg.num_samples, z.size());
  long accepted = 0;
  for (int m = 0; m < cfg.num_samples; ++m) {
    TransitionResult tr =
        hmc_transition(z, rng, jittered_step(step, rng), cfg.num_leapfrog_steps, target,
                       cfg.divergence_energy_threshold);
    if (tr.diverged) ++chain.num_divergences;
    if (tr.accepted) ++accepted;
    chain.draws.row(m) = z;
  }
  chain.accept_rate =
      cfg.num_samples > 0 ? static_cast<double>(accepted) / cfg.num_samples : 0.0;
  return chain;
}

// View of a target through a fixed linear change of coordinates z = M v.
// Sampling the view with an identity mass matrix equals sampling the
// original target with the constant mass (M M^T)^-1, which tames badly
// mismatched coordinate scales and the slope/intercept ridge of the
// regression block.
template <class Target>
struct PreconditionedTarget {
  const Target& target;
  Eigen::MatrixXd map;  // z = map * v

  int dim() const { return target.dim(); }
  double log_density(const Eigen::VectorXd& v) const {
    return target.log_density(map * v);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& v) const {
    return map.transpose() * target.gradient(map * v);
  }
};

// Deterministic preconditioner for the change-point posterior, built from
// the regression design and the prior widths alone: slope directions shrink
// with span^(3/2), intercepts are sampled as line values at fixed segment
// centers (T/4 and 3T/4), the noise direction shrinks with sqrt(T).
Eigen::MatrixXd posterior_preconditioner(Eigen::Index num_weeks,
                                         const PriorSpec& priors);

// Runs num_chains independent chains on the change-point posterior, chain c
// seeded with seed + c. Initial points are drawn from the priors (sigma from
// the central 80% of its Uniform support), draws are stored in constrained
// space. Sampling happens in the rescaled coordinates above; draws are
// mapped back before storage. Identical config and inputs give bit-identical
// results.
ChainSet run_chains(const Eigen::ArrayXd& y, const PriorSpec& priors,
                    LikelihoodKind kind, double sharpness, const HmcConfig& cfg);

// columns: chain,iter,w1,w2,b1,b2,tau,sigma (doubles round-trip exactly)
void write_draws_csv(const ChainSet& set, std::ostream& out);
ChainSet read_draws_csv(std::istream& in);

}  // namespace chpt
