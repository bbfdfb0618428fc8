#ifndef SEQPRIOR_TESTS_SUPPORT_HPP_
#define SEQPRIOR_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "seqprior/posterior.hpp"
#include "seqprior/rng.hpp"
#include "seqprior/sampler.hpp"

namespace seqprior::testing {

// Two-sample Kolmogorov-Smirnov distance.
inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

inline std::vector<double> beta_draws(std::size_t n, double a, double b, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = draw_beta(a, b, rng);
  return out;
}

// iid draws from a quadrature table by inverse-CDF sampling.
inline std::vector<double> table_draws(std::size_t n, const DensityTable& table,
                                       std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = table.quantile(unif01(rng));
  return out;
}

inline std::vector<double> chain_values(const Chain& chain, int coord = 0) {
  std::vector<double> out(chain.draws.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = chain.draws[i].coord(coord);
  return out;
}

}  // namespace seqprior::testing

#endif  // SEQPRIOR_TESTS_SUPPORT_HPP_
