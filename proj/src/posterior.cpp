#include "seqprior/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "seqprior/errors.hpp"
#include "seqprior/numerics.hpp"

namespace seqprior {

BetaParams negbin_conjugate_posterior(PriorKind prior_kind, int r, long long n_obs) {
  if (r < 1) throw DomainError("negbin_conjugate_posterior: r must be >= 1");
  if (n_obs < r) {
    throw DomainError("negbin_conjugate_posterior: n_obs=" + std::to_string(n_obs) +
                      " < r=" + std::to_string(r));
  }
  const double nr = static_cast<double>(n_obs - r);
  switch (prior_kind) {
    case PriorKind::JeffreysFixed:
      return {r + 0.5, nr + 0.5};
    case PriorKind::JeffreysSequential:
    case PriorKind::ReferenceSequential:
      return {static_cast<double>(r), nr + 0.5};
    default:
      throw UnsupportedError("negbin_conjugate_posterior: no closed form for " +
                             to_string(prior_kind));
  }
}

PosteriorTarget1D negbin_posterior_target(const PriorSpec& prior, int r, long long n_obs) {
  if (n_obs < r) throw DomainError("negbin_posterior_target: n_obs < r");
  const double rd = static_cast<double>(r);
  const double tail = static_cast<double>(n_obs - r);
  auto log_eval = prior.log_eval;
  return {[log_eval, rd, tail](double p) {
            return log_eval(ParamPoint::one(p)) + rd * std::log(p) + tail * std::log1p(-p);
          },
          0.0, 1.0};
}

std::function<double(const ParamPoint&)> posterior_target(const PriorSpec& prior,
                                                          const TwoParamExpFamily& model,
                                                          const Sample& data) {
  auto log_eval = prior.log_eval;
  return [log_eval, model, data](const ParamPoint& theta) {
    return log_eval(theta) + log_likelihood(model, data, theta);
  };
}

namespace detail {

DensityTable build_density_table(std::vector<double> xs, const std::vector<double>& logf,
                                 const CoordinateMap* map) {
  const int n = static_cast<int>(xs.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (double lt : logf) max_log = std::max(max_log, lt);
  if (!std::isfinite(max_log)) {
    throw NumericError("quadrature_posterior: target vanishes on the whole grid");
  }

  DensityTable table;
  table.x_ = std::move(xs);
  table.density_.resize(n);
  table.cdf_.resize(n);
  table.cell_width_t_ = 1.0 / n;

  // Densities in the transformed coordinate t; half-cell edge rectangles plus
  // interior trapezoids make the accumulated mass end at exactly 1.
  std::vector<double> ft(n);
  for (int i = 0; i < n; ++i) ft[i] = std::exp(logf[i] - max_log);

  const double h = table.cell_width_t_;
  double acc = 0.5 * h * ft[0];  // left edge rectangle
  std::vector<double> mass_to_right_edge(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) acc += 0.5 * h * (ft[i - 1] + ft[i]);
    mass_to_right_edge[i] = acc + 0.5 * h * ft[i];
  }
  const double z = mass_to_right_edge[n - 1];
  for (int i = 0; i < n; ++i) {
    table.cdf_[i] = mass_to_right_edge[i] / z;
    // density with respect to x
    const double jac = map ? map->dxdt((i + 0.5) / n) : 1.0;
    table.density_[i] = ft[i] / (z * jac);
  }
  // guard monotonicity against roundoff
  for (int i = 1; i < n; ++i) table.cdf_[i] = std::max(table.cdf_[i], table.cdf_[i - 1]);
  table.cdf_[n - 1] = 1.0;
  return table;
}

}  // namespace detail

DensityTable quadrature_posterior(const PosteriorTarget1D& target, const GridConfig& grid,
                                  const CoordinateMap* map) {
  const int n = grid.points;
  if (n < 8) throw DomainError("quadrature_posterior: grid must have at least 8 points");

  std::vector<double> xs(n), logf(n);
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    double x = t, jac = 1.0;
    if (map) {
      x = map->to_x(t);
      jac = map->dxdt(t);
    }
    xs[i] = x;
    const double lt = target.log_target(x) + std::log(jac);
    if (std::isnan(lt) || lt == std::numeric_limits<double>::infinity()) {
      std::ostringstream os;
      os << "quadrature_posterior: log target not finite at grid point x=" << x;
      throw NumericError(os.str());
    }
    logf[i] = lt;
  }
  return detail::build_density_table(std::move(xs), logf, map);
}

DensityTable density_table_from_logs(const std::vector<double>& log_values) {
  const int n = static_cast<int>(log_values.size());
  if (n < 8) throw DomainError("density_table_from_logs: grid must have at least 8 points");
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = (i + 0.5) / n;
  return detail::build_density_table(std::move(xs), log_values, nullptr);
}

double DensityTable::quantile(double prob) const {
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile: prob must be in [0, 1]");
  const int n = static_cast<int>(x_.size());
  // piecewise-linear CDF through the cell right edges, anchored at the left
  // edge of the first cell with CDF 0
  auto edge_x = [&](int i) {
    return i + 1 < n ? 0.5 * (x_[i] + x_[i + 1]) : x_[n - 1] + 0.5 * (x_[n - 1] - x_[n - 2]);
  };
  double prev_cdf = 0.0;
  double prev_x = x_[0] - 0.5 * (x_[1] - x_[0]);
  for (int i = 0; i < n; ++i) {
    const double cur_cdf = cdf_[i];
    const double cur_x = edge_x(i);
    if (prob <= cur_cdf || i == n - 1) {
      if (cur_cdf == prev_cdf) return cur_x;
      const double w = (prob - prev_cdf) / (cur_cdf - prev_cdf);
      return prev_x + w * (cur_x - prev_x);
    }
    prev_cdf = cur_cdf;
    prev_x = cur_x;
  }
  return x_.back();
}

double DensityTable::sup_density_gap(const DensityTable& other) const {
  if (x_.size() != other.x_.size()) throw DomainError("sup_density_gap: grids differ");
  double sup = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    sup = std::max(sup, std::fabs(density_[i] - other.density_[i]));
  }
  return sup;
}

double DensityTable::total_variation(const DensityTable& other) const {
  if (x_.size() != other.x_.size()) throw DomainError("total_variation: grids differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double w = i + 1 < x_.size() ? x_[i + 1] - x_[i]
                                       : (i > 0 ? x_[i] - x_[i - 1] : cell_width_t_);
    acc += std::fabs(density_[i] - other.density_[i]) * w;
  }
  return 0.5 * acc;
}

void DensityTable::write_csv(std::ostream& os) const {
  os << "coordinate,density,cdf\n";
  char buf[96];
  for (std::size_t i = 0; i < x_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x_[i], density_[i], cdf_[i]);
    os << buf;
  }
}

CredibleBound credible_bound(const BetaParams& posterior, double level, BoundSide side) {
  return {level, side, beta_quantile(level, posterior.alpha, posterior.beta),
          CredibleBound::Method::BetaClosedForm};
}

CredibleBound credible_bound(const DensityTable& posterior, double level, BoundSide side) {
  return {level, side, posterior.quantile(level), CredibleBound::Method::Quadrature};
}

}  // namespace seqprior
