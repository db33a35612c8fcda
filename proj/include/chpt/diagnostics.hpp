#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "chpt/hmc.hpp"

#include "json.hpp"

namespace chpt {

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double n_eff = 0.0;
  double r_hat = 1.0;
};

struct DiagnosticsReport {
  std::vector<ParamSummary> params;
  int total_divergences = 0;
  double r_hat_threshold = 1.1;
  bool converged = false;  // every r_hat below the threshold
};

// Split-half potential scale reduction factor: each chain is halved (the
// middle draw of an odd-length chain is dropped), W is the mean within-half
// variance, B/n the variance of the half means, and
// r_hat = sqrt(((n-1)/n * W + B/n) / W). All-identical draws return 1.
double r_hat(const std::vector<Eigen::VectorXd>& chains);

// N / (1 + 2 * sum of pooled autocorrelations), truncated at Geyer's first
// negative even-odd pair sum and clamped to (0, N]. Zero-variance input
// returns N by convention.
double effective_sample_size(const std::vector<Eigen::VectorXd>& chains);

DiagnosticsReport summarize(const ChainSet& set, double r_hat_threshold = 1.1);

// Plain-text table in the layout of the sampling-results figures:
// columns mean, std, median, 5.0%, 95.0%, n_eff, r_hat, then a
// "Number of divergences: N" line.
std::string format_table(const DiagnosticsReport& report);

nlohmann::ordered_json diagnostics_to_json(const DiagnosticsReport& report);
DiagnosticsReport diagnostics_from_json(const nlohmann::json& j);

}  // namespace chpt
