#include "seqprior/exp_family.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "seqprior/errors.hpp"
#include "seqprior/numerics.hpp"

namespace seqprior {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// h(t) = -t + t log(-t) + log Gamma(-t) on t < 0 (Table 1 caption).
double h_fn(double t) { return -t + t * std::log(-t) + std::lgamma(-t); }
double h_fn_p(double t) { return std::log(-t) - digamma(-t); }
double h_fn_pp(double t) { return 1.0 / t + trigamma(-t); }

// Michael--Schucany--Haas inverse Gaussian sampler, mean m > 0, shape lam > 0.
double draw_inverse_gaussian(double m, double lam, Rng& rng) {
  std::normal_distribution<double> normal01(0.0, 1.0);
  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  const double nu = normal01(rng);
  const double y = nu * nu;
  const double x =
      m + m * m * y / (2.0 * lam) - (m / (2.0 * lam)) * std::sqrt(4.0 * m * lam * y + m * m * y * y);
  const double u = unif01(rng);
  return u <= m / (m + x) ? x : m * m / x;
}

}  // namespace

double FisherInfo::log_det() const { return std::log(i11) + std::log(i22); }

TwoParamExpFamily TwoParamExpFamily::normal() {
  TwoParamExpFamily f;
  f.instance_ = Instance::Normal;
  f.name_ = "normal";
  f.fns_ = {
      [](double t) { return -0.5 * std::log(-2.0 * t); },
      [](double t) { return -1.0 / (2.0 * t); },
      [](double t) { return 1.0 / (2.0 * t * t); },
      [](double t) { return t * t; },
      [](double t) { return 2.0 * t; },
      [](double) { return 2.0; },
      [](double x) { return x * x; },
      [](double x) { return x; },
  };
  f.theta1_domain_ = {-kInf, 0.0};
  f.theta2_domain_ = {-kInf, kInf};
  f.support_ = {-kInf, kInf};
  f.sampler_ = [](const ParamPoint& theta, Rng& rng) {
    std::normal_distribution<double> d(theta.theta2(), std::sqrt(-0.5 / theta.theta1()));
    return d(rng);
  };
  f.familiar_ = {
      "mu",
      "sigma2",
      [](double mu, double s2) { return ParamPoint::two(-0.5 / s2, mu); },
      [](const ParamPoint& th) { return std::make_pair(th.theta2(), -0.5 / th.theta1()); },
      [](double, double s2) { return -std::log(2.0) - 2.0 * std::log(s2); },
  };
  return f;
}

TwoParamExpFamily TwoParamExpFamily::inverse_gaussian() {
  TwoParamExpFamily f;
  f.instance_ = Instance::InverseGaussian;
  f.name_ = "invgauss";
  f.fns_ = {
      [](double t) { return -0.5 * std::log(-2.0 * t); },
      [](double t) { return -1.0 / (2.0 * t); },
      [](double t) { return 1.0 / (2.0 * t * t); },
      [](double t) { return 1.0 / t; },
      [](double t) { return -1.0 / (t * t); },
      [](double t) { return 2.0 / (t * t * t); },
      [](double x) { return 1.0 / x; },
      [](double x) { return x; },
  };
  f.theta1_domain_ = {-kInf, 0.0};
  f.theta2_domain_ = {0.0, kInf};
  f.support_ = {0.0, kInf};
  f.sampler_ = [](const ParamPoint& theta, Rng& rng) {
    return draw_inverse_gaussian(theta.theta2(), -2.0 * theta.theta1(), rng);
  };
  // Conventional (mean, shape) of the inverse Gaussian law.
  f.familiar_ = {
      "mean",
      "shape",
      [](double m, double lam) { return ParamPoint::two(-0.5 * lam, m); },
      [](const ParamPoint& th) { return std::make_pair(th.theta2(), -2.0 * th.theta1()); },
      [](double, double) { return -std::log(2.0); },
  };
  return f;
}

TwoParamExpFamily TwoParamExpFamily::gamma_family() {
  TwoParamExpFamily f;
  f.instance_ = Instance::Gamma;
  f.name_ = "gamma";
  f.fns_ = {
      h_fn,
      h_fn_p,
      h_fn_pp,
      [](double t) { return -std::log(t); },
      [](double t) { return -1.0 / t; },
      [](double t) { return 1.0 / (t * t); },
      [](double x) { return -std::log(x); },
      [](double x) { return x; },
  };
  f.theta1_domain_ = {-kInf, 0.0};
  f.theta2_domain_ = {0.0, kInf};
  f.support_ = {0.0, kInf};
  f.sampler_ = [](const ParamPoint& theta, Rng& rng) {
    const double alpha = -theta.theta1();
    std::gamma_distribution<double> d(alpha, theta.theta2() / alpha);
    return d(rng);
  };
  f.familiar_ = {
      "shape",
      "mean",
      [](double alpha, double mu) { return ParamPoint::two(-alpha, mu); },
      [](const ParamPoint& th) { return std::make_pair(-th.theta1(), th.theta2()); },
      [](double, double) { return 0.0; },
  };
  return f;
}

TwoParamExpFamily TwoParamExpFamily::inverse_gamma() {
  TwoParamExpFamily f = gamma_family();
  f.instance_ = Instance::InverseGamma;
  f.name_ = "invgamma";
  f.fns_.u1 = [](double x) { return std::log(x); };
  f.fns_.u2 = [](double x) { return 1.0 / x; };
  f.sampler_ = [](const ParamPoint& theta, Rng& rng) {
    const double alpha = -theta.theta1();
    std::gamma_distribution<double> d(alpha, theta.theta2() / alpha);
    return 1.0 / d(rng);
  };
  return f;
}

TwoParamExpFamily TwoParamExpFamily::custom(Callables fns, Interval theta1_domain,
                                            Interval theta2_domain, Interval support,
                                            std::function<double(const ParamPoint&, Rng&)> sampler) {
  TwoParamExpFamily f;
  f.instance_ = Instance::Custom;
  f.name_ = "custom";
  f.fns_ = std::move(fns);
  f.theta1_domain_ = theta1_domain;
  f.theta2_domain_ = theta2_domain;
  f.support_ = support;
  f.sampler_ = std::move(sampler);
  return f;
}

bool TwoParamExpFamily::in_domain(const ParamPoint& theta) const {
  return theta.dim() == 2 && theta1_domain_.contains(theta.theta1()) &&
         theta2_domain_.contains(theta.theta2());
}

void TwoParamExpFamily::require_domain(const ParamPoint& theta) const {
  if (theta.dim() != 2) throw DomainError(name_ + ": parameter must be two-dimensional");
  if (!theta1_domain_.contains(theta.theta1())) {
    std::ostringstream os;
    os << name_ << ": theta1=" << theta.theta1() << " outside (" << theta1_domain_.lo << ", "
       << theta1_domain_.hi << ")";
    throw DomainError(os.str());
  }
  if (!theta2_domain_.contains(theta.theta2())) {
    std::ostringstream os;
    os << name_ << ": theta2=" << theta.theta2() << " outside (" << theta2_domain_.lo << ", "
       << theta2_domain_.hi << ")";
    throw DomainError(os.str());
  }
}

void TwoParamExpFamily::require_support(double x) const {
  if (!support_.contains(x)) {
    std::ostringstream os;
    os << name_ << ": observation x=" << x << " outside support (" << support_.lo << ", "
       << support_.hi << ")";
    throw DomainError(os.str());
  }
}

double TwoParamExpFamily::psi(const ParamPoint& theta) const {
  const double t1 = theta.theta1();
  const double t2 = theta.theta2();
  return -t1 * (t2 * g2p(t2) - g2(t2)) + g1(t1);
}

double TwoParamExpFamily::log_density(double x, const ParamPoint& theta) const {
  require_domain(theta);
  require_support(x);
  const double t1 = theta.theta1();
  const double t2 = theta.theta2();
  return t1 * u1(x) - t1 * g2p(t2) * u2(x) - psi(theta);
}

FisherInfo TwoParamExpFamily::fisher_info(const ParamPoint& theta) const {
  require_domain(theta);
  return {g1pp(theta.theta1()), -theta.theta1() * g2pp(theta.theta2())};
}

double TwoParamExpFamily::draw(const ParamPoint& theta, Rng& rng) const {
  require_domain(theta);
  if (!sampler_) throw UnsupportedError(name_ + ": no sampler attached to this instance");
  return sampler_(theta, rng);
}

double TwoParamExpFamily::invert_g1p(double y) const {
  if (!std::isfinite(y)) throw NumericError("invert_g1p: target value is not finite");
  const double lo_bound = theta1_domain_.lo;
  const double hi_bound = theta1_domain_.hi;

  double t0 = -1.0;
  if (!theta1_domain_.contains(t0)) {
    t0 = std::isinf(lo_bound) ? hi_bound - 1.0 : 0.5 * (lo_bound + hi_bound);
  }

  // Geometric expansion from t0 toward the violated boundary (G1' increasing).
  double lo = t0, hi = t0;
  double f_lo = g1p(t0) - y, f_hi = f_lo;
  int k = 0;
  while (f_hi < 0.0 && k < 200) {
    lo = hi;
    f_lo = f_hi;
    hi = std::isinf(hi_bound) ? (hi < 1.0 ? 1.0 : hi * 2.0) : hi_bound - 0.5 * (hi_bound - hi);
    f_hi = g1p(hi) - y;
    ++k;
  }
  while (f_lo > 0.0 && k < 200) {
    hi = lo;
    f_hi = f_lo;
    lo = std::isinf(lo_bound) ? (lo > -1.0 ? -1.0 : lo * 2.0) : lo_bound + 0.5 * (lo - lo_bound);
    f_lo = g1p(lo) - y;
    ++k;
  }
  if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
    std::ostringstream os;
    os << name_ << ": value " << y << " outside the range of G1' over the theta1 domain";
    throw NumericError(os.str());
  }

  // Safeguarded bisection with a secant step when it stays inside the bracket.
  constexpr double kTol = 1e-10;
  for (int it = 0; it < 200 && hi - lo > kTol * 0.01; ++it) {
    double mid = 0.5 * (lo + hi);
    if (f_hi != f_lo) {
      const double sec = lo - f_lo * (hi - lo) / (f_hi - f_lo);
      if (sec > lo + 0.01 * (hi - lo) && sec < hi - 0.01 * (hi - lo)) mid = sec;
    }
    const double f_mid = g1p(mid) - y;
    if (f_mid < 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

Sample Sample::from_values(const TwoParamExpFamily& model, std::vector<double> values) {
  if (values.empty()) throw DomainError("Sample: empty observation sequence");
  for (double x : values) model.require_support(x);
  Sample s;
  s.values_ = std::move(values);
  std::vector<double> u1s(s.values_.size()), u2s(s.values_.size());
  for (std::size_t i = 0; i < s.values_.size(); ++i) {
    u1s[i] = model.u1(s.values_[i]);
    u2s[i] = model.u2(s.values_[i]);
  }
  const double n = static_cast<double>(s.values_.size());
  s.mean_u1_ = pairwise_sum(u1s) / n;
  s.mean_u2_ = pairwise_sum(u2s) / n;
  s.y_stat_ = s.mean_u1_ - model.g2(s.mean_u2_);
  return s;
}

bool Sample::cache_consistent(const TwoParamExpFamily& model) const {
  const Sample fresh = from_values(model, values_);
  return fresh.mean_u1_ == mean_u1_ && fresh.mean_u2_ == mean_u2_ && fresh.y_stat_ == y_stat_;
}

double bregman_i1(double omega1, double theta1, const TwoParamExpFamily& model) {
  if (!model.theta1_domain().contains(omega1) || !model.theta1_domain().contains(theta1)) {
    throw DomainError(model.name() + ": bregman_i1 arguments outside the theta1 domain");
  }
  return model.g1(theta1) - model.g1(omega1) - model.g1p(omega1) * (theta1 - omega1);
}

double bregman_i2(double omega2, double theta2, const TwoParamExpFamily& model) {
  if (!model.theta2_domain().contains(omega2) || !model.theta2_domain().contains(theta2)) {
    throw DomainError(model.name() + ": bregman_i2 arguments outside the theta2 domain");
  }
  return model.g2(omega2) - model.g2(theta2) - model.g2p(theta2) * (omega2 - theta2);
}

double log_likelihood(const TwoParamExpFamily& model, const Sample& sample,
                      const ParamPoint& theta) {
  model.require_domain(theta);
  const double t1 = theta.theta1();
  const double t2 = theta.theta2();
  const double n = static_cast<double>(sample.n());
  return n * (t1 * sample.mean_u1() - t1 * model.g2p(t2) * sample.mean_u2() - model.psi(theta));
}

ParamPoint mle(const TwoParamExpFamily& model, const Sample& sample) {
  const double t2_hat = sample.mean_u2();
  if (!model.theta2_domain().contains(t2_hat)) {
    std::ostringstream os;
    os << "MLE undefined: U2-mean " << t2_hat << " outside the theta2 domain";
    throw MleUndefinedError(os.str());
  }
  try {
    const double t1_hat = model.invert_g1p(sample.y_stat());
    return ParamPoint::two(t1_hat, t2_hat);
  } catch (const NumericError& e) {
    throw MleUndefinedError(std::string("MLE undefined: ") + e.what());
  }
}

SignedRoots signed_roots(const TwoParamExpFamily& model, const Sample& sample,
                         const ParamPoint& theta) {
  model.require_domain(theta);
  const ParamPoint hat = mle(model, sample);
  const double n = static_cast<double>(sample.n());
  const double i1 = std::max(0.0, bregman_i1(hat.theta1(), theta.theta1(), model));
  const double i2 = std::max(0.0, bregman_i2(hat.theta2(), theta.theta2(), model));
  const double z1 = std::sqrt(2.0 * n * i1) * sgn(theta.theta1() - hat.theta1());
  const double z2 = std::sqrt(-2.0 * n * theta.theta1() * i2) * sgn(theta.theta2() - hat.theta2());
  return {z1, z2};
}

double rho_sq(const TwoParamExpFamily& model, const ParamPoint& theta) {
  if (model.instance() != TwoParamExpFamily::Instance::Normal) {
    throw UnsupportedError("rho_sq: defined for the normal instance only");
  }
  model.require_domain(theta);
  const double t1 = theta.theta1();
  const double t2 = theta.theta2();
  return model.g1(t1) - model.g1(-0.5) - model.g1p(-0.5) * (t1 + 0.5) - t1 * t2 * t2;
}

double rho_sq_closed_form(double mu, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw DomainError("rho_sq_closed_form: sigma_sq must be > 0");
  return 0.5 * ((mu * mu + 1.0) / sigma_sq + std::log(sigma_sq) - 1.0);
}

void require_bernoulli_domain(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("bernoulli: p=" + std::to_string(p) + " outside (0, 1)");
  }
}

double bernoulli_fisher_info(double p) {
  require_bernoulli_domain(p);
  return 1.0 / (p * (1.0 - p));
}

double bernoulli_log_jeffreys(double p) {
  require_bernoulli_domain(p);
  return -0.5 * (std::log(p) + std::log1p(-p));
}

}  // namespace seqprior
