#include "seqprior/sampler.hpp"

#include <cmath>
#include <limits>

#include "seqprior/errors.hpp"
#include "seqprior/numerics.hpp"

namespace seqprior {

namespace {

void validate(const SamplerConfig& cfg) {
  if (cfg.iterations < 1) throw DomainError("sampler: iterations must be >= 1");
  if (cfg.effective_burn_in() >= cfg.iterations) {
    throw DomainError("sampler: burn_in must be smaller than iterations");
  }
  if (cfg.e_n_replicates < 1) throw DomainError("sampler: e_n_replicates must be >= 1");
}

// One proposal from the fixed-sample posterior: an exact iid draw when the
// target provides one, otherwise `inner_steps` random-walk Metropolis steps
// on log_fixed_posterior. Either kernel is reversible with respect to the
// fixed posterior, so the outer acceptance ratio reduces to the Psi part.
ParamPoint propose_fixed_posterior(const TargetComponents& tc, const SamplerConfig& cfg,
                                   const ParamPoint& current, Rng& rng) {
  if (tc.propose_exact) return tc.propose_exact(rng);
  if (!tc.log_fixed_posterior) {
    throw DomainError("sampler: target provides neither an exact proposal nor a log density");
  }
  std::normal_distribution<double> step(0.0, cfg.rw_step);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  ParamPoint x = current;
  double log_fx = tc.log_fixed_posterior(x);
  for (int s = 0; s < cfg.inner_steps; ++s) {
    ParamPoint y = ParamPoint::one(0.0);
    if (x.dim() == 1) {
      y = ParamPoint::one(x.coord(0) + step(rng));
    } else {
      const double d0 = step(rng);
      const double d1 = step(rng);
      y = ParamPoint::two(x.coord(0) + d0, x.coord(1) + d1);
    }
    if (tc.in_domain && !tc.in_domain(y)) {
      unif01(rng);  // keep the draw count independent of the rejection path
      continue;
    }
    const double log_fy = tc.log_fixed_posterior(y);
    if (std::log(unif01(rng)) < log_fy - log_fx) {
      x = y;
      log_fx = log_fy;
    }
  }
  return x;
}

struct EstimateResult {
  double log_value;
  bool any_capped;
};

}  // namespace

Chain brute_force_metropolis(const TargetComponents& target, const SamplerConfig& config) {
  validate(config);
  Rng rng = make_rng(config.seed);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  Chain chain;
  chain.iterations = config.iterations;
  chain.burn_in = config.effective_burn_in();

  auto estimate_log_e = [&](const ParamPoint& theta, bool init) -> EstimateResult {
    if (target.exact_expected_n) return {std::log(target.exact_expected_n(theta)), false};
    double sum = 0.0;
    bool capped = false;
    for (int i = 0; i < config.e_n_replicates; ++i) {
      const StopDraw d = target.simulate_n(theta, rng);
      sum += d.value;
      capped = capped || d.capped;
      if (init) {
        ++chain.init_sim_count;
      } else {
        ++chain.stop_sim_count;
      }
    }
    if (capped) ++chain.capped_count;
    return {std::log(sum / config.e_n_replicates), capped};
  };

  ParamPoint theta = propose_fixed_posterior(target, config, target.init, rng);
  double log_e_cur = estimate_log_e(theta, true).log_value;

  long long accepted_total = 0;
  chain.draws.reserve(static_cast<std::size_t>(config.iterations - chain.burn_in));
  for (long long it = 0; it < config.iterations; ++it) {
    const ParamPoint prop = propose_fixed_posterior(target, config, theta, rng);
    const EstimateResult est = estimate_log_e(prop, false);
    double log_ratio = config.psi.apply_log(est.log_value) - config.psi.apply_log(log_e_cur);
    if (config.paper_literal_ratio) log_ratio = -log_ratio;
    const bool accept = std::log(unif01(rng)) < log_ratio;
    if (accept) {
      theta = prop;
      log_e_cur = est.log_value;  // retained with the state (pseudo-marginal)
      ++accepted_total;
    }
    if (it >= chain.burn_in) {
      chain.draws.push_back(theta);
      chain.accepted.push_back(accept ? 1 : 0);
    }
  }
  chain.acceptance_rate = static_cast<double>(accepted_total) / config.iterations;
  return chain;
}

namespace {

Chain latent_metropolis_impl(const TargetComponents& target, const SamplerConfig& config,
                             bool sqrt_ratio) {
  validate(config);
  if (!sqrt_ratio && config.psi.kind != Psi::Kind::Identity) {
    throw UnsupportedError(
        "latent_variable_metropolis: the latent-variable target requires Psi = Identity");
  }
  Rng rng = make_rng(config.seed);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  Chain chain;
  chain.iterations = config.iterations;
  chain.burn_in = config.effective_burn_in();

  ParamPoint theta = propose_fixed_posterior(target, config, target.init, rng);
  StopDraw latent = target.simulate_n(theta, rng);
  ++chain.init_sim_count;

  long long accepted_total = 0;
  chain.draws.reserve(static_cast<std::size_t>(config.iterations - chain.burn_in));
  for (long long it = 0; it < config.iterations; ++it) {
    const ParamPoint prop = propose_fixed_posterior(target, config, theta, rng);
    const StopDraw latent_prop = target.simulate_n(prop, rng);  // one simulation per iteration
    ++chain.stop_sim_count;
    bool accept = false;
    const double u = unif01(rng);
    if (latent_prop.capped) {
      ++chain.capped_count;  // capped draw: reject the proposal outright
    } else {
      double log_ratio = std::log(latent_prop.value) - std::log(latent.value);
      if (sqrt_ratio) log_ratio *= 0.5;
      if (config.paper_literal_ratio) log_ratio = -log_ratio;
      accept = std::log(u) < log_ratio;
    }
    if (accept) {
      theta = prop;
      latent = latent_prop;
      ++accepted_total;
    }
    if (it >= chain.burn_in) {
      chain.draws.push_back(theta);
      chain.latent_n.push_back(latent.value);
      chain.accepted.push_back(accept ? 1 : 0);
    }
  }
  chain.acceptance_rate = static_cast<double>(accepted_total) / config.iterations;
  return chain;
}

}  // namespace

Chain latent_variable_metropolis(const TargetComponents& target, const SamplerConfig& config) {
  return latent_metropolis_impl(target, config, false);
}

Chain modified_sqrt_metropolis(const TargetComponents& target, const SamplerConfig& config) {
  return latent_metropolis_impl(target, config, true);
}

CoordDiagnostics series_diagnostics(const std::vector<double>& series) {
  if (series.empty()) throw DomainError("chain_diagnostics: empty chain");
  const double n = static_cast<double>(series.size());
  const double mean = pairwise_sum(series) / n;
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= std::max(1.0, n - 1.0);
  if (var == 0.0) return {mean, 0.0, 0.0, n};

  auto autocorr = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = lag; i < series.size(); ++i) {
      acc += (series[i] - mean) * (series[i - lag] - mean);
    }
    return acc / ((n - 1.0) * var);
  };
  const double rho1 = autocorr(1);
  // ESS by truncating the autocorrelation sum at the first non-positive term
  double rho_sum = 0.0;
  for (std::size_t lag = 1; lag < series.size() / 2; ++lag) {
    const double rho = autocorr(lag);
    if (rho <= 0.0) break;
    rho_sum += rho;
  }
  return {mean, var, rho1, n / (1.0 + 2.0 * rho_sum)};
}

ChainDiagnostics chain_diagnostics(const Chain& chain) {
  if (chain.draws.empty()) throw DomainError("chain_diagnostics: empty chain");
  ChainDiagnostics d;
  d.acceptance_rate = chain.acceptance_rate;
  const int dim = chain.draws.front().dim();
  for (int c = 0; c < dim; ++c) {
    std::vector<double> series(chain.draws.size());
    for (std::size_t i = 0; i < chain.draws.size(); ++i) series[i] = chain.draws[i].coord(c);
    d.coords.push_back(series_diagnostics(series));
  }
  return d;
}

double draw_beta(double a, double b, Rng& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

TargetComponents negbin_target_components(int r, long long n_obs, const PriorSpec& fixed_prior,
                                          const StoppingRule& rule, bool with_exact_expected_n) {
  if (n_obs < r) throw DomainError("negbin_target_components: n_obs < r");
  TargetComponents tc;
  const double rd = static_cast<double>(r);
  const double tail = static_cast<double>(n_obs - r);

  if (fixed_prior.kind == PriorKind::JeffreysFixed) {
    const BetaParams post = negbin_conjugate_posterior(PriorKind::JeffreysFixed, r, n_obs);
    tc.propose_exact = [post](Rng& rng) {
      return ParamPoint::one(draw_beta(post.alpha, post.beta, rng));
    };
  }
  auto log_prior = fixed_prior.log_eval;
  tc.log_fixed_posterior = [log_prior, rd, tail](const ParamPoint& theta) {
    const double p = theta.scalar();
    return log_prior(theta) + rd * std::log(p) + tail * std::log1p(-p);
  };
  tc.in_domain = [](const ParamPoint& theta) {
    return theta.scalar() > 0.0 && theta.scalar() < 1.0;
  };
  tc.simulate_n = [rule](const ParamPoint& theta, Rng& rng) { return rule.simulate(theta, rng); };
  if (with_exact_expected_n) {
    tc.exact_expected_n = [rule](const ParamPoint& theta) {
      return rule.expected_n(theta).value;
    };
  }
  tc.init = ParamPoint::one(rd / std::max(1.0, rd + tail + 1.0) + 1e-3);
  return tc;
}

}  // namespace seqprior
