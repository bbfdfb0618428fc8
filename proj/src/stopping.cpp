#include "seqprior/stopping.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "seqprior/errors.hpp"
#include "seqprior/numerics.hpp"

namespace seqprior {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExpectedN closed_form(double value) {
  return {value, ExpectedN::Method::ClosedForm, 0.0, 0, false};
}

}  // namespace

StoppingRule StoppingRule::negbin(int r) {
  if (r < 1) throw DomainError("negbin rule: r must be >= 1, got " + std::to_string(r));
  StoppingRule rule;
  rule.kind_ = Kind::NegBin;
  rule.name_ = "negbin";
  rule.r_ = r;
  return rule;
}

StoppingRule StoppingRule::brownian_exit(double a, double b, double dt) {
  if (!(a < 0.0 && 0.0 < b)) {
    throw DomainError("brownian_exit rule: need a < 0 < b");
  }
  if (!(dt > 0.0)) throw DomainError("brownian_exit rule: dt must be > 0");
  StoppingRule rule;
  rule.kind_ = Kind::BrownianExit;
  rule.name_ = "brownian-exit";
  rule.a_bound_ = a;
  rule.b_bound_ = b;
  rule.dt_ = dt;
  return rule;
}

StoppingRule StoppingRule::bose_boukai(TwoParamExpFamily model, double a, int m0) {
  if (!(a >= 0.0)) throw DomainError("bose_boukai rule: a must be >= 0");
  if (m0 < 2) throw DomainError("bose_boukai rule: m0 must be >= 2, got " + std::to_string(m0));
  StoppingRule rule;
  rule.kind_ = Kind::BoseBoukai;
  rule.name_ = "bose-boukai";
  rule.model_ = std::move(model);
  rule.bb_a_ = a;
  rule.m0_ = m0;
  return rule;
}

StoppingRule StoppingRule::woodroofe_lrt(double a, double b1, double b2) {
  if (!(a > 0.0)) throw DomainError("woodroofe_lrt rule: a must be > 0");
  if (!(0.0 < b1 && b1 < b2)) throw DomainError("woodroofe_lrt rule: need 0 < b1 < b2");
  StoppingRule rule;
  rule.kind_ = Kind::WoodroofeLrt;
  rule.name_ = "woodroofe-lrt";
  rule.model_ = TwoParamExpFamily::normal();
  rule.w_a_ = a;
  rule.b1_ = b1;
  rule.b2_ = b2;
  return rule;
}

StoppingRule StoppingRule::fixed_n(std::int64_t n) {
  if (n < 1) throw DomainError("fixed_n rule: n must be >= 1");
  StoppingRule rule;
  rule.kind_ = Kind::FixedN;
  rule.name_ = "fixed-n";
  rule.fixed_n_ = n;
  return rule;
}

double StoppingRule::floor_value() const {
  switch (kind_) {
    case Kind::NegBin:
      return r_;
    case Kind::BrownianExit:
      return dt_;
    case Kind::BoseBoukai:
      return m0_;
    case Kind::WoodroofeLrt:
      // n = 1 leaves sigma_hat undefined, so the simulation floor is at least 2.
      return std::max(2.0, std::ceil(b1_ * w_a_));
    case Kind::FixedN:
      return static_cast<double>(fixed_n_);
  }
  return 0.0;
}

StoppingRule StoppingRule::with_cap(std::int64_t n_max) const {
  if (n_max < 1) throw DomainError("with_cap: n_max must be >= 1");
  StoppingRule rule = *this;
  rule.n_max_ = n_max;
  return rule;
}

double StoppingRule::brownian_dt() const {
  if (kind_ != Kind::BrownianExit) throw UnsupportedError(name_ + ": no dt parameter");
  return dt_;
}

int StoppingRule::negbin_r() const {
  if (kind_ != Kind::NegBin) throw UnsupportedError(name_ + ": no r parameter");
  return r_;
}

double StoppingRule::exit_a() const {
  if (kind_ != Kind::BrownianExit) throw UnsupportedError(name_ + ": no exit bounds");
  return a_bound_;
}

double StoppingRule::exit_b() const {
  if (kind_ != Kind::BrownianExit) throw UnsupportedError(name_ + ": no exit bounds");
  return b_bound_;
}

const TwoParamExpFamily& StoppingRule::model() const {
  if (!model_) throw UnsupportedError(name_ + ": rule has no attached model");
  return *model_;
}

void StoppingRule::require_theta(const ParamPoint& theta) const {
  switch (kind_) {
    case Kind::NegBin: {
      const double p = theta.scalar();
      // p = 1 is allowed for the stopping ops (N degenerates to r).
      if (!(p > 0.0 && p <= 1.0)) {
        throw DomainError("negbin rule: p=" + std::to_string(p) + " outside (0, 1]");
      }
      return;
    }
    case Kind::BrownianExit: {
      if (!std::isfinite(theta.scalar())) throw DomainError("brownian_exit rule: drift not finite");
      return;
    }
    case Kind::BoseBoukai:
    case Kind::WoodroofeLrt:
      model_->require_domain(theta);
      return;
    case Kind::FixedN:
      return;
  }
}

StopDraw StoppingRule::simulate(const ParamPoint& theta, std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  return simulate(theta, rng);
}

StopDraw StoppingRule::simulate(const ParamPoint& theta, Rng& rng) const {
  require_theta(theta);
  switch (kind_) {
    case Kind::NegBin: {
      const double p = theta.scalar();
      std::uniform_real_distribution<double> unif01(0.0, 1.0);
      int successes = 0;
      for (std::int64_t n = 1; n <= n_max_; ++n) {
        if (unif01(rng) < p) {
          if (++successes == r_) return {static_cast<double>(n), false};
        }
      }
      return {static_cast<double>(n_max_), true};
    }
    case Kind::BrownianExit: {
      const double drift = theta.scalar();
      std::normal_distribution<double> step(drift * dt_, std::sqrt(dt_));
      double z = 0.0;
      for (std::int64_t k = 1; k <= n_max_; ++k) {
        z += step(rng);
        if (z <= a_bound_ || z >= b_bound_) return {static_cast<double>(k) * dt_, false};
      }
      return {static_cast<double>(n_max_) * dt_, true};
    }
    case Kind::BoseBoukai: {
      const TwoParamExpFamily& m = *model_;
      double sum_u1 = 0.0, sum_u2 = 0.0;
      for (std::int64_t n = 1; n <= n_max_; ++n) {
        const double x = m.draw(theta, rng);
        sum_u1 += m.u1(x);
        sum_u2 += m.u2(x);
        if (n < m0_) continue;
        const double nd = static_cast<double>(n);
        const double y = sum_u1 / nd - m.g2(sum_u2 / nd);
        // a = 0 makes the threshold G1'(0-) = sup G1', i.e. stop at m0.
        const double threshold = bb_a_ == 0.0 ? kInf : m.g1p(-bb_a_ * bb_a_ / (nd * nd));
        if (y < threshold) return {nd, false};
      }
      return {static_cast<double>(n_max_), true};
    }
    case Kind::WoodroofeLrt: {
      const double mu = theta.theta2();
      const double sigma = std::sqrt(-0.5 / theta.theta1());
      std::normal_distribution<double> obs(mu, sigma);
      const auto n_floor = static_cast<std::int64_t>(floor_value());
      const auto n_cap = std::max<std::int64_t>(n_floor, static_cast<std::int64_t>(b2_ * w_a_));
      if (n_cap > n_max_) {
        // The rule's own cap b2*a exceeds the simulation budget.
        return {static_cast<double>(n_max_), true};
      }
      double sum_x = 0.0, sum_x2 = 0.0;
      for (std::int64_t n = 1; n <= n_cap; ++n) {
        const double x = obs(rng);
        sum_x += x;
        sum_x2 += x * x;
        if (n < n_floor) continue;
        const double nd = static_cast<double>(n);
        const double mean = sum_x / nd;
        const double s2 = sum_x2 / nd - mean * mean;
        const double stat = s2 > 0.0 ? sum_x2 - nd - nd * std::log(s2) : kInf;
        if (stat > 2.0 * w_a_) return {nd, false};
      }
      return {static_cast<double>(n_cap), false};
    }
    case Kind::FixedN:
      return {static_cast<double>(fixed_n_), false};
  }
  throw UnsupportedError("simulate: unknown rule kind");
}

namespace {

// Monte Carlo mean of f(N) over independent replicates with derived seeds.
ExpectedN mc_expected(const StoppingRule& rule, const ParamPoint& theta, const McConfig& cfg,
                      double (*f)(double)) {
  if (cfg.replicates < 1) throw DomainError("expected_n: replicates must be >= 1");
  std::vector<double> vals(static_cast<std::size_t>(cfg.replicates));
  bool any_capped = false;
  for (std::int64_t i = 0; i < cfg.replicates; ++i) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(i));
    const StopDraw draw = rule.simulate(theta, rng);
    any_capped = any_capped || draw.capped;
    vals[static_cast<std::size_t>(i)] = f(draw.value);
  }
  const double n = static_cast<double>(cfg.replicates);
  const double mean = pairwise_sum(vals) / n;
  double se = 0.0;
  if (cfg.replicates > 1) {
    std::vector<double> sq(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double d = vals[i] - mean;
      sq[i] = d * d;
    }
    se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return {mean, ExpectedN::Method::MonteCarlo, se, cfg.replicates, any_capped};
}

double identity_of(double x) { return x; }
double sqrt_of(double x) { return std::sqrt(x); }

}  // namespace

ExpectedN StoppingRule::expected_n(const ParamPoint& theta, const McConfig& cfg) const {
  require_theta(theta);
  switch (kind_) {
    case Kind::NegBin:
      return closed_form(static_cast<double>(r_) / theta.scalar());
    case Kind::BrownianExit:
      return closed_form(brownian_exit_expected_time(a_bound_, b_bound_, theta.scalar()));
    case Kind::FixedN:
      return closed_form(static_cast<double>(fixed_n_));
    case Kind::BoseBoukai:
    case Kind::WoodroofeLrt:
      return mc_expected(*this, theta, cfg, identity_of);
  }
  throw UnsupportedError("expected_n: unknown rule kind");
}

ExpectedN StoppingRule::expected_sqrt_n(const ParamPoint& theta, const McConfig& cfg) const {
  require_theta(theta);
  switch (kind_) {
    case Kind::NegBin:
      return closed_form(negbin_expected_sqrt(r_, theta.scalar()));
    case Kind::FixedN:
      return closed_form(std::sqrt(static_cast<double>(fixed_n_)));
    case Kind::BrownianExit:
    case Kind::BoseBoukai:
    case Kind::WoodroofeLrt:
      return mc_expected(*this, theta, cfg, sqrt_of);
  }
  throw UnsupportedError("expected_sqrt_n: unknown rule kind");
}

double StoppingRule::tau_limit(const ParamPoint& theta) const {
  require_theta(theta);
  switch (kind_) {
    case Kind::BoseBoukai:
      return 1.0 / std::sqrt(-theta.theta1());
    case Kind::WoodroofeLrt: {
      const double rho2 = rho_sq(*model_, theta);
      // a/N_a tends to rho^2 clamped to [1/b2, 1/b1]; outside that band the
      // rule's own floor and cap take over.
      if (rho2 < 1.0 / b2_) return b2_;
      if (rho2 > 1.0 / b1_) return b1_;
      return 1.0 / rho2;
    }
    case Kind::FixedN:
      return 1.0;
    case Kind::NegBin:
    case Kind::BrownianExit:
      throw UnsupportedError(name_ + ": tau_limit is not defined for this rule");
  }
  throw UnsupportedError("tau_limit: unknown rule kind");
}

double brownian_exit_expected_time(double a, double b, double theta) {
  if (!(a < 0.0 && 0.0 < b)) throw DomainError("brownian_exit_expected_time: need a < 0 < b");
  if (std::fabs(theta) < 1e-8) return -a * b;
  const double width = b - a;
  double ratio;  // (e^{2b theta} - 1) / (e^{2(b-a) theta} - 1)
  if (theta > 0.0) {
    ratio = std::exp(2.0 * a * theta) * std::expm1(-2.0 * b * theta) / std::expm1(-2.0 * width * theta);
  } else {
    ratio = std::expm1(2.0 * b * theta) / std::expm1(2.0 * width * theta);
  }
  return (b - width * ratio) / theta;
}

double negbin_pmf(int r, double p, std::int64_t k) {
  if (r < 1) throw DomainError("negbin_pmf: r must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("negbin_pmf: p outside (0, 1]");
  if (k < r) return 0.0;
  if (p == 1.0) return k == r ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(log_binom(kd - 1.0, r - 1.0) + r * std::log(p) + (kd - r) * std::log1p(-p));
}

double negbin_variance(int r, double p) {
  if (r < 1) throw DomainError("negbin_variance: r must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("negbin_variance: p outside (0, 1]");
  return r * (1.0 - p) / (p * p);
}

double negbin_expected_sqrt(int r, double p, double tail_tol) {
  if (r < 1) throw DomainError("negbin_expected_sqrt: r must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("negbin_expected_sqrt: p outside (0, 1]");
  if (p == 1.0) return std::sqrt(static_cast<double>(r));

  const double q = 1.0 - p;
  // pmf carried with a scale offset so extreme (r, p) corners cannot underflow.
  double pmf = std::exp(r * std::log(p));
  double log_scale = 0.0;
  if (pmf == 0.0) {
    pmf = 1.0;
    log_scale = r * std::log(p);
  }
  double sum = 0.0;
  constexpr std::int64_t kMaxTerms = 100000000;
  for (std::int64_t k = r;; ++k) {
    const double kd = static_cast<double>(k);
    const double term = pmf * std::sqrt(kd) * (log_scale == 0.0 ? 1.0 : std::exp(log_scale));
    sum += term;
    // ratio_k = t_{k+1}/t_k, decreasing in k; once < 1 it gives a geometric
    // envelope for the whole tail.
    const double ratio = q * std::sqrt((kd + 1.0) / kd) * (kd / (kd - r + 1.0));
    if (ratio < 1.0 && term * ratio / (1.0 - ratio) < tail_tol) break;
    if (k - r > kMaxTerms) {
      throw NumericError("negbin_expected_sqrt: series truncation bound not met");
    }
    pmf *= q * kd / (kd - r + 1.0);
    if (pmf < 1e-260 && pmf > 0.0) {
      pmf *= 1e260;
      log_scale -= 260.0 * std::log(10.0);
    }
  }
  return sum;
}

}  // namespace seqprior
