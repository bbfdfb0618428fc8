#ifndef SEQPRIOR_SAMPLER_HPP_
#define SEQPRIOR_SAMPLER_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "seqprior/param_point.hpp"
#include "seqprior/posterior.hpp"
#include "seqprior/prior.hpp"
#include "seqprior/rng.hpp"
#include "seqprior/stopping.hpp"

namespace seqprior {

// The operator Psi applied to E_theta[N] in the sequential prior.
struct Psi {
  enum class Kind { Identity, Sqrt, Power };
  Kind kind = Kind::Identity;
  double exponent = 1.0;

  static Psi identity() { return {Kind::Identity, 1.0}; }
  static Psi sqrt() { return {Kind::Sqrt, 0.5}; }
  static Psi power(double e) { return {Kind::Power, e}; }

  double apply_log(double log_value) const {
    switch (kind) {
      case Kind::Identity:
        return log_value;
      case Kind::Sqrt:
        return 0.5 * log_value;
      case Kind::Power:
        return exponent * log_value;
    }
    return log_value;
  }
};

struct SamplerConfig {
  long long iterations = 11000;
  long long burn_in = -1;  // negative: use the default of 10% of iterations
  std::uint64_t seed = 1;
  Psi psi = Psi::identity();
  int e_n_replicates = 1000;  // brute force only
  int inner_steps = 50;       // random-walk steps per expensive step when no exact draw
  double rw_step = 0.15;
  // Reproduce the displayed orientation of the acceptance ratios (current
  // state's quantity in the numerator) instead of the detailed-balance one.
  bool paper_literal_ratio = false;

  long long effective_burn_in() const {
    return burn_in >= 0 ? burn_in : iterations / 10;
  }
};

// What a sampler needs from the posterior: a way to propose from the
// fixed-sample-size posterior pi_F * likelihood (exact iid draws when
// available, otherwise a random-walk chain on log_fixed_posterior), and one
// stopping-time simulation per parameter value.
struct TargetComponents {
  std::function<ParamPoint(Rng&)> propose_exact;               // may be empty
  std::function<double(const ParamPoint&)> log_fixed_posterior;  // needed for the RW fallback
  std::function<bool(const ParamPoint&)> in_domain;
  std::function<StopDraw(const ParamPoint&, Rng&)> simulate_n;
  std::function<double(const ParamPoint&)> exact_expected_n;   // optional closed-form override
  ParamPoint init = ParamPoint::one(0.5);
};

struct Chain {
  std::vector<ParamPoint> draws;       // kept draws, length iterations - burn_in
  std::vector<double> latent_n;        // latent-variable samplers only
  std::vector<std::uint8_t> accepted;  // per kept iteration
  double acceptance_rate = 0.0;
  long long iterations = 0;
  long long burn_in = 0;
  // instrumentation
  std::uint64_t stop_sim_count = 0;  // simulate_n calls made across iterations
  std::uint64_t init_sim_count = 0;  // simulate_n calls made during initialization
  std::uint64_t capped_count = 0;    // capped simulations (proposals rejected)
};

struct CoordDiagnostics {
  double mean;
  double variance;
  double lag1_autocorr;
  double ess;
};

struct ChainDiagnostics {
  std::vector<CoordDiagnostics> coords;
  double acceptance_rate;
};

ChainDiagnostics chain_diagnostics(const Chain& chain);
CoordDiagnostics series_diagnostics(const std::vector<double>& series);

// Brute-force pseudo-marginal Metropolis: propose from the fixed posterior,
// estimate E_{theta'}[N] from e_n_replicates fresh simulations, accept with
// min{1, Psi(E')/Psi(E)}. The estimate attached to the current state is
// retained while the state is held, so Psi = Identity is a valid
// pseudo-marginal scheme; other Psi use the plug-in estimate and are
// documented as approximate.
Chain brute_force_metropolis(const TargetComponents& target, const SamplerConfig& config);

// Latent-variable Metropolis: propose theta' from the fixed posterior and
// N~' by one stopping-rule simulation, accept with min{1, N~'/N~}. The
// theta-marginal targets E_theta[N] pi_F likelihood.
Chain latent_variable_metropolis(const TargetComponents& target, const SamplerConfig& config);

// Square-root-modified latent-variable Metropolis: acceptance
// min{1, sqrt(N~'/N~)}; the theta-marginal targets E_theta[sqrt N] pi_F
// likelihood, approximating the sqrt(E N) reference posterior.
Chain modified_sqrt_metropolis(const TargetComponents& target, const SamplerConfig& config);

// Components for the negative binomial scenario: data (r successes in n_obs
// trials), fixed prior pi_F, stopping simulation from `rule`. The exact
// conjugate proposal is available when pi_F is Beta-conjugate; otherwise the
// samplers fall back to the inner random walk.
TargetComponents negbin_target_components(int r, long long n_obs, const PriorSpec& fixed_prior,
                                          const StoppingRule& rule,
                                          bool with_exact_expected_n = false);

double draw_beta(double a, double b, Rng& rng);

}  // namespace seqprior

#endif  // SEQPRIOR_SAMPLER_HPP_
