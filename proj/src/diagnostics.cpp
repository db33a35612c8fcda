#include "chpt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chpt/errors.hpp"
#include "chpt/stats.hpp"

namespace chpt {

namespace {

// halves of every chain, middle draw dropped for odd lengths
std::vector<Eigen::VectorXd> split_halves(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> halves;
  halves.reserve(2 * chains.size());
  for (const auto& c : chains) {
    Eigen::Index half = c.size() / 2;
    halves.emplace_back(c.head(half));
    halves.emplace_back(c.tail(half));
  }
  return halves;
}

double sample_var(const Eigen::VectorXd& v) {
  double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

double r_hat(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty()) throw_error(ErrorKind::Domain, "r_hat needs at least one chain");
  for (const auto& c : chains)
    if (c.size() < 4)
      throw_error(ErrorKind::Domain, "r_hat needs at least 4 draws per chain");

  std::vector<Eigen::VectorXd> halves = split_halves(chains);
  const double n = static_cast<double>(halves.front().size());
  const double m = static_cast<double>(halves.size());

  double w = 0.0;
  Eigen::VectorXd means(halves.size());
  for (std::size_t h = 0; h < halves.size(); ++h) {
    means[static_cast<Eigen::Index>(h)] = halves[h].mean();
    w += sample_var(halves[h]);
  }
  w /= m;
  if (w == 0.0) return 1.0;
  const double b = n * sample_var(means);  // between-half variance, Gelman scaling
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty())
    throw_error(ErrorKind::Domain, "effective_sample_size needs at least one chain");
  const Eigen::Index n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n || n < 8)
      throw_error(ErrorKind::Domain,
                  "effective_sample_size needs equal-length chains of >= 8 draws");
  const double n_total = static_cast<double>(n) * static_cast<double>(chains.size());

  // per-chain autocovariances (1/n normalization), averaged across chains
  Eigen::VectorXd acov = Eigen::VectorXd::Zero(n);
  for (const auto& c : chains) {
    double mean = c.mean();
    Eigen::VectorXd centered = c.array() - mean;
    for (Eigen::Index k = 0; k < n; ++k) {
      acov[k] += centered.head(n - k).dot(centered.tail(n - k)) / static_cast<double>(n);
    }
  }
  acov /= static_cast<double>(chains.size());
  if (acov[0] <= 0.0) return n_total;  // zero-variance draws

  double sum_pairs = 0.0;
  for (Eigen::Index t = 0; 2 * t + 1 < n; ++t) {
    double pair = (acov[2 * t] + acov[2 * t + 1]) / acov[0];
    if (pair <= 0.0) break;
    sum_pairs += pair;
  }
  double tau_int = std::max(-1.0 + 2.0 * sum_pairs, 1e-12);
  double ess = n_total / tau_int;
  return std::min(ess, n_total);
}

DiagnosticsReport summarize(const ChainSet& set, double r_hat_threshold) {
  if (set.chains.empty())
    throw_error(ErrorKind::Domain, "summarize needs a non-empty chain set");
  const Eigen::Index dim = set.chains.front().draws.cols();
  const Eigen::Index per_chain = set.chains.front().draws.rows();
  for (const auto& c : set.chains)
    if (c.draws.rows() != per_chain || c.draws.cols() != dim)
      throw_error(ErrorKind::Domain, "summarize: chains have mismatched shapes");

  DiagnosticsReport report;
  report.r_hat_threshold = r_hat_threshold;
  report.total_divergences = set.total_divergences();
  report.converged = true;

  const Eigen::Index n_chains = static_cast<Eigen::Index>(set.chains.size());
  for (Eigen::Index j = 0; j < dim; ++j) {
    std::vector<Eigen::VectorXd> per_param;
    per_param.reserve(n_chains);
    Eigen::VectorXd pooled(per_chain * n_chains);
    for (Eigen::Index c = 0; c < n_chains; ++c) {
      per_param.emplace_back(set.chains[c].draws.col(j));
      pooled.segment(c * per_chain, per_chain) = set.chains[c].draws.col(j);
    }
    Eigen::VectorXd sorted = pooled;
    std::sort(sorted.data(), sorted.data() + sorted.size());

    ParamSummary s;
    s.name = j < static_cast<Eigen::Index>(kParamNames.size())
                 ? std::string(kParamNames[j])
                 : "p" + std::to_string(j);
    s.mean = pooled.mean();
    s.std = sample_std(pooled);
    s.median = quantile_sorted(sorted, 0.5);
    s.q05 = quantile_sorted(sorted, 0.05);
    s.q95 = quantile_sorted(sorted, 0.95);
    s.r_hat = r_hat(per_param);
    // chains shorter than the autocorrelation estimator supports count as iid
    s.n_eff = per_chain >= 8 ? effective_sample_size(per_param)
                             : static_cast<double>(pooled.size());
    report.converged = report.converged && s.r_hat < r_hat_threshold;
    report.params.push_back(std::move(s));
  }
  return report;
}

std::string format_table(const DiagnosticsReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s%10s%10s%10s%10s%10s%10s%10s\n", "", "mean",
                "std", "median", "5.0%", "95.0%", "n_eff", "r_hat");
  out += buf;
  for (const auto& p : report.params) {
    std::snprintf(buf, sizeof(buf), "%-10s%10.2f%10.2f%10.2f%10.2f%10.2f%10.2f%10.2f\n",
                  p.name.c_str(), p.mean, p.std, p.median, p.q05, p.q95, p.n_eff,
                  p.r_hat);
    out += buf;
  }
  out += "\nNumber of divergences: " + std::to_string(report.total_divergences) + "\n";
  return out;
}

nlohmann::ordered_json diagnostics_to_json(const DiagnosticsReport& report) {
  nlohmann::ordered_json j;
  for (const auto& p : report.params) {
    j[p.name] = {{"mean", p.mean},   {"std", p.std}, {"median", p.median},
                 {"q05", p.q05},     {"q95", p.q95}, {"n_eff", p.n_eff},
                 {"r_hat", p.r_hat}};
  }
  j["divergences"] = report.total_divergences;
  j["r_hat_threshold"] = report.r_hat_threshold;
  j["converged"] = report.converged;
  return j;
}

DiagnosticsReport diagnostics_from_json(const nlohmann::json& j) {
  DiagnosticsReport report;
  report.total_divergences = j.at("divergences").get<int>();
  report.r_hat_threshold = j.value("r_hat_threshold", 1.1);
  report.converged = j.at("converged").get<bool>();
  for (const auto& name : kParamNames) {
    const auto key = std::string(name);
    if (!j.contains(key)) continue;
    const auto& pj = j.at(key);
    ParamSummary s;
    s.name = key;
    s.mean = pj.at("mean").get<double>();
    s.std = pj.at("std").get<double>();
    s.median = pj.at("median").get<double>();
    s.q05 = pj.at("q05").get<double>();
    s.q95 = pj.at("q95").get<double>();
    s.n_eff = pj.at("n_eff").get<double>();
    s.r_hat = pj.at("r_hat").get<double>();
    report.params.push_back(std::move(s));
  }
  return report;
}

}  // namespace chpt
