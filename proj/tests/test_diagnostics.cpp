#include "chpt/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"

#include "chpt/errors.hpp"
#include "chpt/rng.hpp"

using namespace chpt;

namespace {

Eigen::VectorXd iid_normal(Rng& rng, int n, double mean = 0.0, double sd = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal(mean, sd);
  return v;
}

// stationary AR(1) with unit marginal variance
Eigen::VectorXd ar1(Rng& rng, int n, double rho) {
  Eigen::VectorXd v(n);
  v[0] = rng.normal();
  double innov_sd = std::sqrt(1.0 - rho * rho);
  for (int i = 1; i < n; ++i) v[i] = rho * v[i - 1] + innov_sd * rng.normal();
  return v;
}

// independent re-implementation of the split-half formula
double ref_split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> halves;
  for (const auto& c : chains) {
    Eigen::Index h = c.size() / 2;
    halves.push_back(c.head(h));
    halves.push_back(c.tail(h));
  }
  double n = double(halves[0].size());
  double w = 0.0;
  std::vector<double> means;
  for (const auto& h : halves) {
    double mu = h.mean();
    means.push_back(mu);
    w += (h.array() - mu).square().sum() / (n - 1.0);
  }
  w /= double(halves.size());
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= double(means.size());
  double var_means = 0.0;
  for (double m : means) var_means += (m - grand) * (m - grand);
  var_means /= double(means.size()) - 1.0;
  return std::sqrt(((n - 1.0) / n * w + var_means) / w);
}

ChainSet toy_chain_set() {
  // two identical chains whose draws are 1..5 in every column
  ChainSet set;
  for (int c = 0; c < 2; ++c) {
    Chain chain;
    chain.draws.resize(5, 6);
    for (int m = 0; m < 5; ++m)
      for (int j = 0; j < 6; ++j) chain.draws(m, j) = double(m + 1);
    chain.num_divergences = c;  // 0 + 1 = 1 total
    set.chains.push_back(chain);
  }
  return set;
}

}  // namespace

TEST_CASE("r_hat is 1 for identical constant chains") {
  std::vector<Eigen::VectorXd> chains(3, Eigen::VectorXd::Constant(20, 2.5));
  CHECK(r_hat(chains) == 1.0);
}

TEST_CASE("r_hat on iid chains sits near 1") {
  Rng rng(101);
  std::vector<Eigen::VectorXd> chains;
  for (int c = 0; c < 4; ++c) chains.push_back(iid_normal(rng, 1000));
  double r = r_hat(chains);
  CHECK(r >= 0.99);
  CHECK(r <= 1.05);
  CHECK(r == doctest::Approx(ref_split_rhat(chains)).epsilon(1e-12));
}

TEST_CASE("r_hat explodes when one chain is shifted") {
  Rng rng(103);
  std::vector<Eigen::VectorXd> chains;
  chains.push_back(iid_normal(rng, 1000, 0.0));
  chains.push_back(iid_normal(rng, 1000, 10.0));
  double r = r_hat(chains);
  CHECK(r > 3.0);
  CHECK(r == doctest::Approx(ref_split_rhat(chains)).epsilon(1e-12));
}

TEST_CASE("r_hat is invariant under common affine maps") {
  Rng rng(107);
  std::vector<Eigen::VectorXd> chains;
  for (int c = 0; c < 3; ++c) chains.push_back(iid_normal(rng, 400, 1.0, 2.0));
  double base = r_hat(chains);
  std::vector<Eigen::VectorXd> mapped;
  for (const auto& c : chains) mapped.push_back((3.5 * c.array() - 7.0).matrix());
  CHECK(r_hat(mapped) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("r_hat detects within-chain drift via the split halves") {
  // two identical trending chains: classic between-chain variance is zero,
  // but the split halves disagree
  Eigen::VectorXd trend = Eigen::VectorXd::LinSpaced(400, 0.0, 8.0);
  std::vector<Eigen::VectorXd> chains{trend, trend};
  CHECK(r_hat(chains) > 1.5);
}

TEST_CASE("r_hat preconditions") {
  CHECK_THROWS_AS(r_hat({}), Error);
  std::vector<Eigen::VectorXd> tiny{Eigen::VectorXd::Ones(3)};
  CHECK_THROWS_AS(r_hat(tiny), Error);
}

TEST_CASE("effective sample size: iid draws keep most of their size") {
  Rng rng(109);
  std::vector<Eigen::VectorXd> chains{iid_normal(rng, 4000)};
  double ess = effective_sample_size(chains);
  CHECK(ess > 0.8 * 4000);
  CHECK(ess <= 4000.0);
}

TEST_CASE("effective sample size tracks AR(1) autocorrelation") {
  Rng rng(113);
  std::vector<Eigen::VectorXd> chains{ar1(rng, 4000, 0.9)};
  double want = 4000.0 * (1.0 - 0.9) / (1.0 + 0.9);  // ~ 210.5
  double ess = effective_sample_size(chains);
  CHECK(ess > 0.7 * want);
  CHECK(ess < 1.3 * want);

  SUBCASE("more autocorrelation means fewer effective draws") {
    Rng rng2(113);
    std::vector<Eigen::VectorXd> mild{ar1(rng2, 4000, 0.5)};
    CHECK(effective_sample_size(mild) > ess);
  }
}

TEST_CASE("effective sample size conventions") {
  std::vector<Eigen::VectorXd> flat{Eigen::VectorXd::Constant(100, 3.0)};
  CHECK(effective_sample_size(flat) == 100.0);
  CHECK_THROWS_AS(effective_sample_size({}), Error);
}

TEST_CASE("summarize pools chains and applies the quantile rule") {
  ChainSet set = toy_chain_set();
  DiagnosticsReport report = summarize(set);
  REQUIRE(report.params.size() == 6);
  const ParamSummary& s = report.params[0];
  CHECK(s.name == "w1");
  CHECK(s.mean == 3.0);
  CHECK(s.median == 3.0);
  // pooled sorted: 1,1,2,2,3,3,4,4,5,5; h = 0.05 * 9 = 0.45 and 8.55
  CHECK(s.q05 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.q95 == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(s.q05 <= s.median);
  CHECK(s.median <= s.q95);
  CHECK(report.total_divergences == 1);
}

TEST_CASE("summarize quantiles interpolate between order statistics") {
  ChainSet set;
  Chain chain;
  chain.draws.resize(4, 6);
  for (int m = 0; m < 4; ++m)
    for (int j = 0; j < 6; ++j) chain.draws(m, j) = double(m);  // 0,1,2,3
  set.chains.push_back(chain);
  DiagnosticsReport report = summarize(set);
  // h = 0.05 * 3 = 0.15 -> 0.15; h = 0.95 * 3 = 2.85 -> 2.85
  CHECK(report.params[0].q05 == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(report.params[0].q95 == doctest::Approx(2.85).epsilon(1e-12));
  CHECK(report.params[0].median == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("summarize is permutation-invariant across chains") {
  Rng rng(127);
  ChainSet set;
  for (int c = 0; c < 3; ++c) {
    Chain chain;
    chain.draws.resize(200, 6);
    for (int m = 0; m < 200; ++m)
      for (int j = 0; j < 6; ++j) chain.draws(m, j) = rng.normal();
    set.chains.push_back(chain);
  }
  ChainSet reversed;
  reversed.chains = {set.chains[2], set.chains[1], set.chains[0]};
  DiagnosticsReport a = summarize(set);
  DiagnosticsReport b = summarize(reversed);
  for (int j = 0; j < 6; ++j) {
    CHECK(a.params[j].mean == doctest::Approx(b.params[j].mean).epsilon(1e-12));
    CHECK(a.params[j].r_hat == doctest::Approx(b.params[j].r_hat).epsilon(1e-12));
    CHECK(a.params[j].n_eff == doctest::Approx(b.params[j].n_eff).epsilon(1e-12));
    CHECK(a.params[j].q05 == doctest::Approx(b.params[j].q05).epsilon(1e-12));
  }
}

TEST_CASE("summarize flags convergence against the threshold") {
  Rng rng(131);
  ChainSet set;
  for (int c = 0; c < 2; ++c) {
    Chain chain;
    chain.draws.resize(500, 6);
    for (int m = 0; m < 500; ++m)
      for (int j = 0; j < 6; ++j) chain.draws(m, j) = rng.normal(c == 0 ? 0.0 : 5.0, 1.0);
    set.chains.push_back(chain);
  }
  DiagnosticsReport report = summarize(set, 1.1);
  CHECK_FALSE(report.converged);
  for (const auto& p : report.params) CHECK(p.r_hat > 1.1);
}

TEST_CASE("format_table matches the published column layout") {
  DiagnosticsReport report = summarize(toy_chain_set());
  std::string table = format_table(report);

  std::istringstream lines(table);
  std::string header;
  std::getline(lines, header);
  std::istringstream cols(header);
  std::string c1, c2, c3, c4, c5, c6, c7;
  cols >> c1 >> c2 >> c3 >> c4 >> c5 >> c6 >> c7;
  CHECK(c1 == "mean");
  CHECK(c2 == "std");
  CHECK(c3 == "median");
  CHECK(c4 == "5.0%");
  CHECK(c5 == "95.0%");
  CHECK(c6 == "n_eff");
  CHECK(c7 == "r_hat");
  CHECK(table.find("\nNumber of divergences: 1\n") != std::string::npos);
  // one row per parameter, in model order
  CHECK(table.find("w1") != std::string::npos);
  CHECK(table.find("tau") != std::string::npos);
  CHECK(table.find("sigma") != std::string::npos);
}

TEST_CASE("diagnostics JSON round-trips") {
  DiagnosticsReport report = summarize(toy_chain_set());
  nlohmann::ordered_json j = diagnostics_to_json(report);
  CHECK(j.contains("w1"));
  CHECK(j["divergences"] == 1);
  CHECK(j["w1"].contains("mean"));
  CHECK(j["w1"].contains("r_hat"));

  DiagnosticsReport back = diagnostics_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.params.size() == report.params.size());
  CHECK(back.total_divergences == report.total_divergences);
  CHECK(back.converged == report.converged);
  for (std::size_t i = 0; i < back.params.size(); ++i) {
    CHECK(back.params[i].name == report.params[i].name);
    CHECK(back.params[i].mean == report.params[i].mean);
    CHECK(back.params[i].n_eff == report.params[i].n_eff);
  }
}
