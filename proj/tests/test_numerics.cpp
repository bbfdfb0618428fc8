#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "seqprior/numerics.hpp"

using namespace seqprior;

TEST_CASE("digamma and trigamma at known points") {
  // digamma(1) = -gamma, trigamma(1) = pi^2/6
  CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-12));
  CHECK(trigamma(1.0) == doctest::Approx(1.6449340668482264).epsilon(1e-12));
  // digamma(1/2) = -gamma - 2 log 2
  CHECK(digamma(0.5) == doctest::Approx(-1.9635100260214235).epsilon(1e-12));
  CHECK(trigamma(0.5) == doctest::Approx(4.934802200544679).epsilon(1e-12));
}

TEST_CASE("digamma matches finite differences of lgamma") {
  for (double x : {0.3, 0.9, 1.7, 4.2, 11.0, 55.0}) {
    const double h = 1e-6 * std::max(1.0, x);
    const double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2.0 * h);
    CHECK(digamma(x) == doctest::Approx(fd).epsilon(1e-7));
    const double fd2 = (std::lgamma(x + h) - 2.0 * std::lgamma(x) + std::lgamma(x - h)) / (h * h);
    CHECK(trigamma(x) == doctest::Approx(fd2).epsilon(1e-4));
  }
}

TEST_CASE("regularized incomplete beta against binomial tails") {
  // Integer (a, b): I_x(a, b) = P(Bin(a+b-1, x) >= a)
  CHECK(regularized_incomplete_beta(0.5, 2, 3) == doctest::Approx(11.0 / 16.0).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(0.25, 1, 1) == doctest::Approx(0.25).epsilon(1e-12));
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  for (double x : {0.05, 0.3, 0.77}) {
    for (double a : {0.5, 2.0, 7.5}) {
      for (double b : {0.5, 3.5, 12.0}) {
        CHECK(regularized_incomplete_beta(x, a, b) ==
              doctest::Approx(1.0 - regularized_incomplete_beta(1.0 - x, b, a)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("beta cdf integrates the pdf") {
  // trapezoid integral of the pdf as an independent oracle
  const double a = 2.0, b = 3.5;
  const int n = 20000;
  double acc = 0.0;
  double prev = beta_pdf(0.0, a, b);
  for (int i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) / n * 0.73;
    const double cur = beta_pdf(x, a, b);
    acc += 0.5 * (prev + cur) * (0.73 / n);
    prev = cur;
  }
  CHECK(beta_cdf(0.73, a, b) == doctest::Approx(acc).epsilon(1e-6));
}

TEST_CASE("beta quantile inverts the cdf") {
  for (double a : {0.5, 1.0, 2.0, 10.0}) {
    for (double b : {0.5, 3.5, 15.5}) {
      for (double prob : {0.01, 0.05, 0.5, 0.95, 0.99}) {
        const double q = beta_quantile(prob, a, b);
        CHECK(beta_cdf(q, a, b) == doctest::Approx(prob).epsilon(1e-8));
      }
    }
  }
  CHECK(beta_quantile(0.05, 1, 1) == doctest::Approx(0.05).epsilon(1e-10));
}

TEST_CASE("pairwise sum is order-stable and exact on permutations") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(1000);
  for (auto& x : v) x = u(rng);
  const double s = pairwise_sum(v);
  double plain = 0.0;
  for (double x : v) plain += x;
  CHECK(s == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("log_binom") {
  CHECK(std::exp(log_binom(5, 2)) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(std::exp(log_binom(60, 30)) == doctest::Approx(1.18264581564861e17).epsilon(1e-10));
}
