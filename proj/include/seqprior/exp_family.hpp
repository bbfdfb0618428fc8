#ifndef SEQPRIOR_EXP_FAMILY_HPP_
#define SEQPRIOR_EXP_FAMILY_HPP_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "seqprior/param_point.hpp"
#include "seqprior/rng.hpp"

namespace seqprior {

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return x > lo && x < hi; }
};

// Diagonal 2x2 Fisher information: diag(G1''(theta1), -theta1 * G2''(theta2)).
struct FisherInfo {
  double i11;
  double i22;
  double det() const { return i11 * i22; }
  double log_det() const;
};

// The Bar-Lev--Reiser two-parameter exponential family
//   f(x | theta1, theta2) = a(x) exp{theta1 U1(x) - theta1 G2'(theta2) U2(x) - psi(theta1, theta2)}
// with theta1 < 0, theta2 = E[U2(X)], and convex generators G1, G2.
//
// The carrier a(x) is theta-free and omitted everywhere: log_density is the
// log-density up to log a(x), which cancels in every posterior and
// likelihood-ratio computation this library performs.
class TwoParamExpFamily {
 public:
  enum class Instance { Normal, InverseGaussian, Gamma, InverseGamma, Custom };

  struct Callables {
    std::function<double(double)> g1, g1p, g1pp;
    std::function<double(double)> g2, g2p, g2pp;
    std::function<double(double)> u1, u2;
  };

  // Familiar-coordinate chart: a bijection (f1, f2) <-> (theta1, theta2) with
  // the log-Jacobian of theta with respect to the familiar coordinates, used
  // when a prior density is wanted in conventional parameters.
  struct FamiliarMap {
    std::string name1, name2;
    std::function<ParamPoint(double, double)> to_theta;
    std::function<std::pair<double, double>(const ParamPoint&)> from_theta;
    std::function<double(double, double)> log_jacobian;  // log |det d(theta)/d(familiar)|
  };

  static TwoParamExpFamily normal();
  static TwoParamExpFamily inverse_gaussian();
  static TwoParamExpFamily gamma_family();
  static TwoParamExpFamily inverse_gamma();
  static TwoParamExpFamily custom(Callables fns, Interval theta1_domain, Interval theta2_domain,
                                  Interval support,
                                  std::function<double(const ParamPoint&, Rng&)> sampler = {});

  Instance instance() const { return instance_; }
  const std::string& name() const { return name_; }
  const Interval& theta1_domain() const { return theta1_domain_; }
  const Interval& theta2_domain() const { return theta2_domain_; }
  const Interval& support() const { return support_; }
  const FamiliarMap& familiar() const { return familiar_; }

  bool in_domain(const ParamPoint& theta) const;
  void require_domain(const ParamPoint& theta) const;
  void require_support(double x) const;

  double g1(double t) const { return fns_.g1(t); }
  double g1p(double t) const { return fns_.g1p(t); }
  double g1pp(double t) const { return fns_.g1pp(t); }
  double g2(double t) const { return fns_.g2(t); }
  double g2p(double t) const { return fns_.g2p(t); }
  double g2pp(double t) const { return fns_.g2pp(t); }
  double u1(double x) const { return fns_.u1(x); }
  double u2(double x) const { return fns_.u2(x); }

  // psi(theta1, theta2) = -theta1 {theta2 G2'(theta2) - G2(theta2)} + G1(theta1)
  double psi(const ParamPoint& theta) const;

  // Log-density up to the theta-free carrier term log a(x).
  double log_density(double x, const ParamPoint& theta) const;

  FisherInfo fisher_info(const ParamPoint& theta) const;

  // One observation X ~ f(. | theta).
  double draw(const ParamPoint& theta, Rng& rng) const;

  // Solve G1'(t) = y on the theta1 domain; G1' is strictly increasing.
  // Absolute tolerance 1e-10. Throws NumericError when y is outside the range.
  double invert_g1p(double y) const;

 private:
  TwoParamExpFamily() = default;

  Instance instance_ = Instance::Custom;
  std::string name_;
  Callables fns_;
  Interval theta1_domain_{};
  Interval theta2_domain_{};
  Interval support_{};
  FamiliarMap familiar_{};
  std::function<double(const ParamPoint&, Rng&)> sampler_;
};

// A sample bound to a model: observations plus cached sufficient statistics.
class Sample {
 public:
  static Sample from_values(const TwoParamExpFamily& model, std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  long long n() const { return static_cast<long long>(values_.size()); }
  double mean_u1() const { return mean_u1_; }
  double mean_u2() const { return mean_u2_; }
  // Y_n = n^{-1} sum U1(x_i) - G2(n^{-1} sum U2(x_i))
  double y_stat() const { return y_stat_; }

  // Recompute the cached statistics from the stored values; returns true when
  // they match the cache exactly (same summation routine, bitwise equality).
  bool cache_consistent(const TwoParamExpFamily& model) const;

 private:
  Sample() = default;
  std::vector<double> values_;
  double mean_u1_ = 0.0;
  double mean_u2_ = 0.0;
  double y_stat_ = 0.0;
};

// Bregman divergences entering the likelihood-ratio decomposition:
//   I1(w1, t1) = G1(t1) - G1(w1) - G1'(w1) (t1 - w1)
//   I2(w2, t2) = G2(w2) - G2(t2) - G2'(t2) (w2 - t2)
double bregman_i1(double omega1, double theta1, const TwoParamExpFamily& model);
double bregman_i2(double omega2, double theta2, const TwoParamExpFamily& model);

// Log-likelihood of the sample (carrier omitted).
double log_likelihood(const TwoParamExpFamily& model, const Sample& sample,
                      const ParamPoint& theta);

// MLE: theta2_hat = mean of U2 exactly; theta1_hat solves Y_n = G1'(theta1).
// Throws MleUndefinedError off the event {Y_n in G1'(Theta1), U2-mean in Theta2}.
ParamPoint mle(const TwoParamExpFamily& model, const Sample& sample);

struct SignedRoots {
  double z1;
  double z2;
};

// Generalized signed square roots of the log-likelihood ratio:
//   z1 = {2n I1(t1_hat, t1)}^{1/2} sgn(t1 - t1_hat)
//   z2 = {-2n theta1 I2(t2_hat, t2)}^{1/2} sgn(t2 - t2_hat)
SignedRoots signed_roots(const TwoParamExpFamily& model, const Sample& sample,
                         const ParamPoint& theta);

// rho^2 of the Woodroofe limit, normal instance only. Both algebraic forms;
// they agree to ~1e-12 and the default entry point returns the G1-based one.
double rho_sq(const TwoParamExpFamily& model, const ParamPoint& theta);
double rho_sq_closed_form(double mu, double sigma_sq);

// One-parameter helpers.
double bernoulli_fisher_info(double p);
double bernoulli_log_jeffreys(double p);
void require_bernoulli_domain(double p);

}  // namespace seqprior

#endif  // SEQPRIOR_EXP_FAMILY_HPP_
