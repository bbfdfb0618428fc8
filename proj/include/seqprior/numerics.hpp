#ifndef SEQPRIOR_NUMERICS_HPP_
#define SEQPRIOR_NUMERICS_HPP_

#include <cstddef>
#include <functional>
#include <span>

namespace seqprior {

// psi(x) = d/dx log Gamma(x), x > 0.
double digamma(double x);

// psi'(x), x > 0.
double trigamma(double x);

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double x, double a, double b);

double beta_cdf(double x, double a, double b);
double beta_log_pdf(double x, double a, double b);
double beta_pdf(double x, double a, double b);

// Inverse of beta_cdf by bisection; absolute tolerance 1e-10 in x.
double beta_quantile(double prob, double a, double b);

// log C(n, k) via lgamma.
double log_binom(double n, double k);

// Order-insensitive summation: recursive pairwise reduction.
double pairwise_sum(std::span<const double> values);

// Central difference d/dx f at x with step h.
double central_diff(const std::function<double(double)>& f, double x, double h);

// Central second difference d^2/dx^2 f at x with step h.
double central_diff2(const std::function<double(double)>& f, double x, double h);

}  // namespace seqprior

#endif  // SEQPRIOR_NUMERICS_HPP_
