#ifndef SEQPRIOR_STOPPING_HPP_
#define SEQPRIOR_STOPPING_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "seqprior/exp_family.hpp"
#include "seqprior/param_point.hpp"
#include "seqprior/rng.hpp"

namespace seqprior {

// Outcome of one stopping-time simulation. `value` is an integer count for
// the discrete rules and a real time for BrownianExit. A capped draw means
// the hard cap was hit before the rule fired; it is never silently truncated.
struct StopDraw {
  double value;
  bool capped;
};

struct ExpectedN {
  enum class Method { ClosedForm, MonteCarlo };
  double value;
  Method method;
  double se;                // 0 for closed form
  std::int64_t replicates;  // 0 for closed form
  bool biased_low;          // true when any Monte Carlo replicate was capped
};

struct McConfig {
  std::int64_t replicates = 10000;
  std::uint64_t seed = 1;
};

// Stopping rules as immutable values. simulate() is deterministic in
// (rule, theta, rng state); replicate batches derive independent seeds.
class StoppingRule {
 public:
  enum class Kind { NegBin, BrownianExit, BoseBoukai, WoodroofeLrt, FixedN };

  // N_r = inf{n >= 1 : X_1 + ... + X_n = r}, Bernoulli(p) observations.
  static StoppingRule negbin(int r);
  // T_ab = inf{t > 0 : Z(t) <= a or Z(t) >= b}, Brownian motion with drift.
  static StoppingRule brownian_exit(double a, double b, double dt = 1e-3);
  // N_a = inf{n >= m0 : Y_n < G1'(-a^2/n^2)} with Y_n the normalized statistic
  // mean(U1) - G2(mean(U2)); equivalent to the sum-statistic form of the rule.
  static StoppingRule bose_boukai(TwoParamExpFamily model, double a, int m0);
  // N_a = min(b2 a, inf{n >= b1 a : sum X_i^2 - n - n log(sigma_hat_n^2) > 2a}),
  // normal observations.
  static StoppingRule woodroofe_lrt(double a, double b1, double b2);
  static StoppingRule fixed_n(std::int64_t n);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  // Smallest stopping time the rule can produce.
  double floor_value() const;
  std::int64_t cap() const { return n_max_; }
  StoppingRule with_cap(std::int64_t n_max) const;
  double brownian_dt() const;

  StopDraw simulate(const ParamPoint& theta, Rng& rng) const;
  StopDraw simulate(const ParamPoint& theta, std::uint64_t seed) const;

  // E_theta[N]: closed form for NegBin, BrownianExit and FixedN; Monte Carlo
  // otherwise. The Monte Carlo path for expected_n and expected_sqrt_n uses
  // the same replicate draws for a given config, so the sample-level Jensen
  // inequality E[sqrt N] <= sqrt(E[N]) holds deterministically.
  ExpectedN expected_n(const ParamPoint& theta, const McConfig& cfg = {}) const;

  // E_theta[sqrt(N)]: truncated series for NegBin (tail bound 1e-12),
  // closed form for FixedN, Monte Carlo otherwise.
  ExpectedN expected_sqrt_n(const ParamPoint& theta, const McConfig& cfg = {}) const;

  // Limit of N_a / a as a -> infinity. BoseBoukai: 1/sqrt(|theta1|).
  // WoodroofeLrt: 1 / clamp(rho^2(theta), 1/b2, 1/b1). FixedN: 1.
  double tau_limit(const ParamPoint& theta) const;

  // Rule parameters (throw UnsupportedError for mismatched kinds).
  int negbin_r() const;
  double exit_a() const;
  double exit_b() const;
  const TwoParamExpFamily& model() const;

 private:
  StoppingRule() = default;

  void require_theta(const ParamPoint& theta) const;

  Kind kind_ = Kind::FixedN;
  std::string name_;
  std::int64_t n_max_ = 10000000;  // hard cap on draws within one stopping time

  // NegBin
  int r_ = 0;
  // BrownianExit
  double a_bound_ = 0.0, b_bound_ = 0.0, dt_ = 1e-3;
  // BoseBoukai / WoodroofeLrt
  std::optional<TwoParamExpFamily> model_;
  double bb_a_ = 0.0;
  int m0_ = 2;
  double w_a_ = 0.0, b1_ = 0.0, b2_ = 0.0;
  // FixedN
  std::int64_t fixed_n_ = 0;
};

// Closed-form E_theta(T_ab) for Brownian motion with drift theta, unit
// variance: (1/theta)[b - (b-a)(e^{2b theta}-1)/(e^{2(b-a) theta}-1)] for
// theta != 0 and -ab at theta = 0, evaluated in overflow-safe form and
// switched to the -ab limit for |theta| < 1e-8.
double brownian_exit_expected_time(double a, double b, double theta);

// Negative binomial stopping distribution, P(N_r = k) for k = r, r+1, ...
double negbin_pmf(int r, double p, std::int64_t k);

// E_p[sqrt(N_r)] by series, truncated when a geometric tail envelope drops
// below `tail_tol`.
double negbin_expected_sqrt(int r, double p, double tail_tol = 1e-12);

// Var_p(N_r) = r (1-p) / p^2, the trials-until-r-successes variance.
double negbin_variance(int r, double p);

}  // namespace seqprior

#endif  // SEQPRIOR_STOPPING_HPP_
