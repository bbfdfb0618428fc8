#ifndef SEQPRIOR_EXPERIMENTS_HPP_
#define SEQPRIOR_EXPERIMENTS_HPP_

#include <cstdint>
#include <vector>

#include "seqprior/posterior.hpp"
#include "seqprior/prior.hpp"

namespace seqprior {

// Frequentist coverage of the one-sided credible bounds for the negative
// binomial experiment. The reported column at level alpha is
//   P_N( p <= q_alpha(posterior given (r, N)) ),
// i.e. the coverage of the lower credible set {p' <= q_alpha}, evaluated at
// alpha = 0.05 and 0.95. This convention reproduces the near-nominal
// (0.05, 0.95) behavior of the matching prior at large r.
struct CoverageReport {
  int r;
  double p;
  PriorKind prior;
  double coverage_lower_5;
  double coverage_upper_95;
  enum class Method { ExactSeries, MonteCarlo } method;
  // ExactSeries: enumeration truncation K and the residual tail mass
  std::int64_t truncation_k = 0;
  double tail_bound = 0.0;
  // MonteCarlo: replicate count and the larger of the two binomial SEs
  std::int64_t replicates = 0;
  double se = 0.0;
};

struct CoverageOptions {
  double tail_tol = 1e-8;          // stop enumerating when remaining pmf mass < tail_tol
  std::int64_t max_k = 2000000;    // enumeration cap; exceeding it is an error
  int quadrature_points = 4096;    // pi_M posterior grid
};

// One Table-2 cell by exact series enumeration over the stopping distribution.
// prior must be JeffreysFixed (pi_J), JeffreysSequential / ReferenceSequential
// (pi_R*), or ApproxSqrtN (pi_M).
CoverageReport table2_cell(int r, double p, PriorKind prior, const CoverageOptions& opts = {});

// Monte Carlo cross-check of the same cell.
CoverageReport monte_carlo_coverage(int r, double p, PriorKind prior, std::int64_t replicates,
                                    std::uint64_t seed, const CoverageOptions& opts = {});

struct Figure1Row {
  int r;
  double p;
  double sqrt_of_expected;  // sqrt(E_p[N/r])
  double expected_of_sqrt;  // E_p[sqrt(N/r)]
};

std::vector<Figure1Row> figure1_data(const std::vector<int>& r_values,
                                     const std::vector<double>& p_grid);

// Normalized posterior densities under pi_J, pi_R* and pi_M on a shared
// midpoint grid over (0,1).
struct Figure2Data {
  int r;
  std::int64_t n_obs;
  DensityTable jeffreys;   // pi_J posterior
  DensityTable ref_seq;    // pi_R* posterior
  DensityTable approx;     // pi_M posterior
};

Figure2Data figure2_data(int r, std::int64_t n_obs, int grid_points = 1024);

struct BrownianCurveRow {
  double theta;
  double expected_t;
  double sqrt_expected_t;
};

std::vector<BrownianCurveRow> brownian_prior_curve(double a, double b,
                                                   const std::vector<double>& theta_grid);

// Least-squares slope of y against x (used for the log-log tail fits).
double linear_fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace seqprior

#endif  // SEQPRIOR_EXPERIMENTS_HPP_
