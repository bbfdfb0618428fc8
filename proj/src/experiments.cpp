#include "seqprior/experiments.hpp"

#include <cmath>
#include <unordered_map>
#include <utility>

#include "seqprior/errors.hpp"
#include "seqprior/numerics.hpp"
#include "seqprior/stopping.hpp"

namespace seqprior {

namespace {

enum class Table2Prior { Jeffreys, RefSeq, Approx };

Table2Prior classify_prior(PriorKind prior) {
  switch (prior) {
    case PriorKind::JeffreysFixed:
      return Table2Prior::Jeffreys;
    case PriorKind::JeffreysSequential:
    case PriorKind::ReferenceSequential:
      return Table2Prior::RefSeq;
    case PriorKind::ApproxSqrtN:
      return Table2Prior::Approx;
    default:
      throw UnsupportedError("coverage: prior must be pi_J, pi_R* or pi_M, got " +
                             to_string(prior));
  }
}

// The pi_M posterior is the stationary law of the sqrt-modified sampler:
// E_p[sqrt N] replaces sqrt(E_p N) inside the sequential-reference posterior,
// with the fixed Jeffreys prior kept as pi_F. Its prior part on the canonical
// midpoint grid, log E_p[sqrt N_r] + log pi_J(p), computed once per r and
// shared across all posterior evaluations.
std::vector<double> approx_prior_log_grid(int r, int points) {
  std::vector<double> logs(points);
  for (int i = 0; i < points; ++i) {
    const double p = (i + 0.5) / points;
    logs[i] = std::log(negbin_expected_sqrt(r, p)) + bernoulli_log_jeffreys(p);
  }
  return logs;
}

// Both one-sided quantiles of the posterior given (r, k) under the cell's prior.
struct QuantilePair {
  double q05;
  double q95;
};

class CellPosterior {
 public:
  CellPosterior(int r, Table2Prior prior, int quad_points)
      : r_(r), prior_(prior), points_(quad_points) {
    if (prior_ == Table2Prior::Approx) prior_logs_ = approx_prior_log_grid(r, points_);
  }

  QuantilePair quantiles(std::int64_t k) const {
    switch (prior_) {
      case Table2Prior::Jeffreys: {
        const BetaParams post{r_ + 0.5, static_cast<double>(k - r_) + 0.5};
        return {beta_quantile(0.05, post.alpha, post.beta),
                beta_quantile(0.95, post.alpha, post.beta)};
      }
      case Table2Prior::RefSeq: {
        const BetaParams post{static_cast<double>(r_), static_cast<double>(k - r_) + 0.5};
        return {beta_quantile(0.05, post.alpha, post.beta),
                beta_quantile(0.95, post.alpha, post.beta)};
      }
      case Table2Prior::Approx: {
        std::vector<double> logf(points_);
        const double tail = static_cast<double>(k - r_);
        for (int i = 0; i < points_; ++i) {
          const double p = (i + 0.5) / points_;
          logf[i] = prior_logs_[i] + r_ * std::log(p) + tail * std::log1p(-p);
        }
        const DensityTable table = density_table_from_logs(logf);
        return {table.quantile(0.05), table.quantile(0.95)};
      }
    }
    throw UnsupportedError("coverage: unknown prior class");
  }

 private:
  int r_;
  Table2Prior prior_;
  int points_;
  std::vector<double> prior_logs_;
};

}  // namespace

CoverageReport table2_cell(int r, double p, PriorKind prior, const CoverageOptions& opts) {
  if (r < 1) throw DomainError("table2_cell: r must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("table2_cell: p must lie in (0, 1)");
  const Table2Prior cls = classify_prior(prior);
  const CellPosterior posterior(r, cls, opts.quadrature_points);

  const double q = 1.0 - p;
  double pmf = std::pow(p, r);  // P(N = r)
  double mass = 0.0;
  double cov05 = 0.0, cov95 = 0.0;
  std::int64_t k = r;
  for (;; ++k) {
    if (k - r > opts.max_k) {
      throw NumericError("table2_cell: stopping-distribution tail bound not met within the cap");
    }
    const QuantilePair bounds = posterior.quantiles(k);
    if (p <= bounds.q05) cov05 += pmf;
    if (p <= bounds.q95) cov95 += pmf;
    mass += pmf;
    if (1.0 - mass < opts.tail_tol) break;
    pmf *= q * static_cast<double>(k) / static_cast<double>(k - r + 1);
  }

  CoverageReport report;
  report.r = r;
  report.p = p;
  report.prior = prior;
  report.coverage_lower_5 = cov05;
  report.coverage_upper_95 = cov95;
  report.method = CoverageReport::Method::ExactSeries;
  report.truncation_k = k;
  report.tail_bound = 1.0 - mass;
  return report;
}

CoverageReport monte_carlo_coverage(int r, double p, PriorKind prior, std::int64_t replicates,
                                    std::uint64_t seed, const CoverageOptions& opts) {
  if (replicates < 1) throw DomainError("monte_carlo_coverage: replicates must be >= 1");
  const Table2Prior cls = classify_prior(prior);
  const CellPosterior posterior(r, cls, opts.quadrature_points);
  const StoppingRule rule = StoppingRule::negbin(r);
  const ParamPoint theta = ParamPoint::one(p);

  std::unordered_map<std::int64_t, QuantilePair> memo;
  std::int64_t hit05 = 0, hit95 = 0;
  for (std::int64_t i = 0; i < replicates; ++i) {
    const auto draw = rule.simulate(theta, derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto k = static_cast<std::int64_t>(draw.value);
    auto it = memo.find(k);
    if (it == memo.end()) it = memo.emplace(k, posterior.quantiles(k)).first;
    if (p <= it->second.q05) ++hit05;
    if (p <= it->second.q95) ++hit95;
  }

  CoverageReport report;
  report.r = r;
  report.p = p;
  report.prior = prior;
  report.coverage_lower_5 = static_cast<double>(hit05) / replicates;
  report.coverage_upper_95 = static_cast<double>(hit95) / replicates;
  report.method = CoverageReport::Method::MonteCarlo;
  report.replicates = replicates;
  const double c1 = report.coverage_lower_5, c2 = report.coverage_upper_95;
  report.se = std::sqrt(std::max(c1 * (1.0 - c1), c2 * (1.0 - c2)) / replicates);
  return report;
}

std::vector<Figure1Row> figure1_data(const std::vector<int>& r_values,
                                     const std::vector<double>& p_grid) {
  std::vector<Figure1Row> rows;
  rows.reserve(r_values.size() * p_grid.size());
  for (int r : r_values) {
    for (double p : p_grid) {
      const double sqrt_r = std::sqrt(static_cast<double>(r));
      rows.push_back({r, p, std::sqrt(r / p) / sqrt_r, negbin_expected_sqrt(r, p) / sqrt_r});
    }
  }
  return rows;
}

Figure2Data figure2_data(int r, std::int64_t n_obs, int grid_points) {
  if (n_obs < r) throw DomainError("figure2_data: n_obs < r");
  const double tail = static_cast<double>(n_obs - r);

  auto beta_logs = [&](double alpha, double beta) {
    std::vector<double> logs(grid_points);
    for (int i = 0; i < grid_points; ++i) {
      const double p = (i + 0.5) / grid_points;
      logs[i] = (alpha - 1.0) * std::log(p) + (beta - 1.0) * std::log1p(-p);
    }
    return logs;
  };

  const BetaParams post_j = negbin_conjugate_posterior(PriorKind::JeffreysFixed, r, n_obs);
  const BetaParams post_r = negbin_conjugate_posterior(PriorKind::JeffreysSequential, r, n_obs);

  std::vector<double> approx_logs = approx_prior_log_grid(r, grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double p = (i + 0.5) / grid_points;
    approx_logs[i] += r * std::log(p) + tail * std::log1p(-p);
  }

  return {r, n_obs, density_table_from_logs(beta_logs(post_j.alpha, post_j.beta)),
          density_table_from_logs(beta_logs(post_r.alpha, post_r.beta)),
          density_table_from_logs(approx_logs)};
}

std::vector<BrownianCurveRow> brownian_prior_curve(double a, double b,
                                                   const std::vector<double>& theta_grid) {
  std::vector<BrownianCurveRow> rows;
  rows.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    const double e = brownian_exit_expected_time(a, b, theta);
    rows.push_back({theta, e, std::sqrt(e)});
  }
  return rows;
}

double linear_fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("linear_fit_slope: need two same-length series");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace seqprior
