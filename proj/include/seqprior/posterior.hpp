#ifndef SEQPRIOR_POSTERIOR_HPP_
#define SEQPRIOR_POSTERIOR_HPP_

#include <functional>
#include <iosfwd>
#include <vector>

#include "seqprior/prior.hpp"

namespace seqprior {

// Beta(alpha, beta) posterior parameters for the negative binomial example.
struct BetaParams {
  double alpha;
  double beta;
  double mean() const { return alpha / (alpha + beta); }
};

// Conjugate posteriors for data (r successes, n_obs trials):
//   pi_J  (Beta(1/2,1/2)-type prior)      -> Beta(r + 1/2, n - r + 1/2)
//   pi_R* (sequential Jeffreys/reference) -> Beta(r,       n - r + 1/2)
// Exponent bookkeeping from prior x likelihood; see the README note on the
// source display.
BetaParams negbin_conjugate_posterior(PriorKind prior_kind, int r, long long n_obs);

// A one-dimensional posterior target: log prior + log likelihood, evaluated
// through a single callable so samplers and quadrature share one definition.
struct PosteriorTarget1D {
  std::function<double(double)> log_target;
  double lo;  // open interval of the (possibly transformed) coordinate
  double hi;
};

// Target ~ prior(p) * p^r (1-p)^{n-r} on (0,1) for the negative binomial data.
PosteriorTarget1D negbin_posterior_target(const PriorSpec& prior, int r, long long n_obs);

// General posterior target for the two-parameter family: log prior plus the
// log-likelihood of the sample (whose length is the realized stopping time).
// Consumable by the samplers through TargetComponents::log_fixed_posterior.
std::function<double(const ParamPoint&)> posterior_target(const PriorSpec& prior,
                                                          const TwoParamExpFamily& model,
                                                          const Sample& data);

struct GridConfig {
  int points = 4096;
};

// Optional monotone map from the quadrature coordinate t in (0,1) to the
// parameter x; dxdt is its derivative. Identity when omitted.
struct CoordinateMap {
  std::function<double(double)> to_x;
  std::function<double(double)> dxdt;
};

class DensityTable;

namespace detail {
DensityTable build_density_table(std::vector<double> xs, const std::vector<double>& log_values,
                                 const CoordinateMap* map);
}

// Normalized density and CDF on a midpoint grid (endpoints excluded by a
// half-step). The CDF column holds the mass up to each cell's right edge,
// so its last entry is exactly 1.
class DensityTable {
 public:
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& density() const { return density_; }
  const std::vector<double>& cdf() const { return cdf_; }

  double quantile(double prob) const;
  // sup |f - g| over the shared grid; tables must share a grid.
  double sup_density_gap(const DensityTable& other) const;
  // total variation distance (1/2) integral |f - g|
  double total_variation(const DensityTable& other) const;

  void write_csv(std::ostream& os) const;  // columns: coordinate, density, cdf

 private:
  friend DensityTable detail::build_density_table(std::vector<double>, const std::vector<double>&,
                                                  const CoordinateMap*);
  std::vector<double> x_, density_, cdf_;
  double cell_width_t_ = 0.0;
};

// Table on the canonical midpoint grid of (0,1), x_i = (i + 1/2)/n, from
// precomputed unnormalized log-density values.
DensityTable density_table_from_logs(const std::vector<double>& log_values);

// Trapezoid-normalized density table for a 1-D target with finite transformed
// support. Throws NumericError when the log target is not finite at an
// interior grid point.
DensityTable quadrature_posterior(const PosteriorTarget1D& target, const GridConfig& grid = {},
                                  const CoordinateMap* map = nullptr);

enum class BoundSide { Lower, Upper };

struct CredibleBound {
  double level;
  BoundSide side;
  double value;
  enum class Method { BetaClosedForm, Quadrature } method;
};

// One-sided bound: the level-alpha quantile of the posterior, so that
// {p <= q(alpha)} carries posterior mass alpha.
CredibleBound credible_bound(const BetaParams& posterior, double level, BoundSide side);
CredibleBound credible_bound(const DensityTable& posterior, double level, BoundSide side);

}  // namespace seqprior

#endif  // SEQPRIOR_POSTERIOR_HPP_
