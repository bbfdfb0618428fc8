#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqprior/errors.hpp"
#include "seqprior/numerics.hpp"
#include "seqprior/rng.hpp"
#include "seqprior/stopping.hpp"

using namespace seqprior;

TEST_CASE("negbin simulation degenerates at p = 1") {
  const auto rule = StoppingRule::negbin(3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto draw = rule.simulate(ParamPoint::one(1.0), seed);
    CHECK(draw.value == 3.0);
    CHECK_FALSE(draw.capped);
  }
}

TEST_CASE("negbin empirical mean matches r/p") {
  const auto rule = StoppingRule::negbin(2);
  const auto theta = ParamPoint::one(0.5);
  const int reps = 100000;
  std::vector<double> ns(reps);
  for (int i = 0; i < reps; ++i) {
    ns[i] = rule.simulate(theta, derive_seed(3, i)).value;
    CHECK(ns[i] >= rule.floor_value());
  }
  const double mean = pairwise_sum(ns) / reps;
  double var = 0.0;
  for (double v : ns) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (reps - 1.0) / reps);
  CHECK(std::fabs(mean - 4.0) < 3.0 * se);
}

TEST_CASE("negbin closed-form expectations") {
  const auto rule = StoppingRule::negbin(2);
  const auto en = rule.expected_n(ParamPoint::one(0.5));
  CHECK(en.value == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(en.method == ExpectedN::Method::ClosedForm);
  CHECK(en.se == 0.0);
}

TEST_CASE("negbin expected sqrt by series vs direct summation oracle") {
  // r=1, p=0.5: sum sqrt(k) 2^{-k}, truncated far beyond double precision at k=200
  double direct = 0.0;
  for (int k = 1; k <= 200; ++k) direct += std::sqrt(static_cast<double>(k)) * std::pow(0.5, k);
  const double series = negbin_expected_sqrt(1, 0.5);
  CHECK(series == doctest::Approx(direct).epsilon(1e-12));
  CHECK(series == doctest::Approx(1.347).epsilon(0.002));

  // degenerate: r=4, p=1 -> sqrt(4)
  const auto rule = StoppingRule::negbin(4);
  CHECK(rule.expected_sqrt_n(ParamPoint::one(1.0)).value == doctest::Approx(2.0));

  // series mean against Monte Carlo for a nontrivial case
  const auto r3 = StoppingRule::negbin(3);
  const int reps = 200000;
  std::vector<double> vals(reps);
  for (int i = 0; i < reps; ++i) vals[i] = std::sqrt(r3.simulate(ParamPoint::one(0.3), derive_seed(77, i)).value);
  const double mc = pairwise_sum(vals) / reps;
  double var = 0.0;
  for (double v : vals) var += (v - mc) * (v - mc);
  const double se = std::sqrt(var / (reps - 1.0) / reps);
  CHECK(std::fabs(negbin_expected_sqrt(3, 0.3) - mc) < 4.0 * se);
}

TEST_CASE("figure-1 style bound: r=9 curves nearly coincide") {
  const int r = 9;
  double worst = 0.0;
  for (int i = 0; i <= 90; ++i) {
    const double p = 0.05 + 0.9 * i / 90.0;
    const double sqrt_of_e = std::sqrt((r / p) / r);
    const double e_of_sqrt = negbin_expected_sqrt(r, p) / std::sqrt(static_cast<double>(r));
    worst = std::max(worst, std::fabs(e_of_sqrt - sqrt_of_e) / sqrt_of_e);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("brownian exit closed form") {
  CHECK(brownian_exit_expected_time(-1.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(brownian_exit_expected_time(-1.0, 1.0, 1.0) ==
        doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
  // reflection symmetry E_theta(T_ab) = E_{-theta}(T_{-b,-a})
  for (double theta : {-2.0, -0.3, 0.7, 25.0}) {
    CHECK(brownian_exit_expected_time(-0.7, 1.9, theta) ==
          doctest::Approx(brownian_exit_expected_time(-1.9, 0.7, -theta)).epsilon(1e-10));
  }
  // large-drift stability: E ~ b/theta as theta -> +inf
  CHECK(brownian_exit_expected_time(-1.0, 2.0, 400.0) == doctest::Approx(2.0 / 400.0).epsilon(1e-9));
  CHECK(brownian_exit_expected_time(-3.0, 1.0, -500.0) ==
        doctest::Approx(-3.0 / -500.0).epsilon(1e-9));
}

TEST_CASE("brownian exit Monte Carlo matches the closed form") {
  // dt = 1e-4 keeps the discretization bias near 1%, well inside 4 SE here
  const auto rule = StoppingRule::brownian_exit(-1.0, 1.0, 1e-4);
  const auto theta = ParamPoint::one(1.0);
  const auto mc = rule.expected_n(theta, {0, 0});  // force the MC path? closed form rule
  // expected_n for BrownianExit is closed form by contract:
  CHECK(mc.method == ExpectedN::Method::ClosedForm);

  const int reps = 3000;
  std::vector<double> ts(reps);
  for (int i = 0; i < reps; ++i) ts[i] = rule.simulate(theta, derive_seed(11, i)).value;
  const double mean = pairwise_sum(ts) / reps;
  double var = 0.0;
  for (double t : ts) var += (t - mean) * (t - mean);
  const double se = std::sqrt(var / (reps - 1.0) / reps);
  CHECK(std::fabs(mean - std::tanh(1.0)) < 4.0 * se);
}

TEST_CASE("bose-boukai floor and limit direction") {
  const auto normal = TwoParamExpFamily::normal();
  SUBCASE("floor respected and a=0 stops at m0") {
    const auto rule0 = StoppingRule::bose_boukai(normal, 0.0, 4);
    CHECK(rule0.simulate(ParamPoint::two(-0.5, 0.0), 1).value == 4.0);
  }
  SUBCASE("N_a/a approaches 1/sqrt(|theta1|) and the gap shrinks in a") {
    const auto theta = ParamPoint::two(-0.5, 0.0);  // sigma^2 = 1, limit sqrt(2)
    const double target = std::sqrt(2.0);
    double prev_gap = 1e9;
    int stream = 0;
    for (double a : {50.0, 100.0, 200.0}) {
      const auto rule = StoppingRule::bose_boukai(normal, a, 2);
      const int reps = 2000;
      std::vector<double> ratios(reps);
      for (int i = 0; i < reps; ++i) {
        ratios[i] = rule.simulate(theta, derive_seed(13, stream * 1000000 + i)).value / a;
      }
      ++stream;
      const double gap = std::fabs(pairwise_sum(ratios) / reps - target);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.05 * target);
  }
}

TEST_CASE("bose-boukai limit holds for sigma^2 = 2") {
  const auto normal = TwoParamExpFamily::normal();
  const auto rule = StoppingRule::bose_boukai(normal, 200.0, 2);
  const auto theta = normal.familiar().to_theta(0.0, 2.0);  // theta1 = -1/4, limit 2
  CHECK(rule.tau_limit(theta) == doctest::Approx(2.0).epsilon(1e-14));
  const int reps = 400;
  std::vector<double> ratios(reps);
  for (int i = 0; i < reps; ++i) ratios[i] = rule.simulate(theta, derive_seed(17, i)).value / 200.0;
  CHECK(pairwise_sum(ratios) / reps == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("woodroofe rule: tau limit and simulation oracle on sigma^2 = 1") {
  const auto normal = TwoParamExpFamily::normal();
  auto theta_of = [&](double mu, double s2) { return normal.familiar().to_theta(mu, s2); };
  const auto rule = StoppingRule::woodroofe_lrt(500.0, 0.5, 4.0);

  SUBCASE("null: rho^2 = 0 < 1/b2, tau = b2") {
    const auto theta = theta_of(0.0, 1.0);
    CHECK(rule.tau_limit(theta) == doctest::Approx(4.0).epsilon(1e-14));
    const auto draw = rule.simulate(theta, 3);
    CHECK(draw.value == doctest::Approx(4.0 * 500.0).epsilon(1e-12));  // stops at the cap b2*a
  }
  SUBCASE("middle band: mu = sqrt(2), rho^2 = 1, tau = 1") {
    const auto theta = theta_of(std::sqrt(2.0), 1.0);
    CHECK(rule.tau_limit(theta) == doctest::Approx(1.0).epsilon(1e-12));
    const int reps = 50;
    std::vector<double> ratios(reps);
    for (int i = 0; i < reps; ++i) ratios[i] = rule.simulate(theta, derive_seed(23, i)).value / 500.0;
    CHECK(pairwise_sum(ratios) / reps == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("floor band: large mu pins N at ceil(b1 a)") {
    const auto theta = theta_of(4.0, 1.0);  // rho^2 = 8 > 1/b1 = 2
    CHECK(rule.tau_limit(theta) == doctest::Approx(0.5).epsilon(1e-12));
    const auto draw = rule.simulate(theta, 9);
    CHECK(draw.value == doctest::Approx(250.0).epsilon(1e-12));
  }
  SUBCASE("unsupported kinds") {
    CHECK_THROWS_AS(StoppingRule::negbin(2).tau_limit(ParamPoint::one(0.5)), UnsupportedError);
  }
  SUBCASE("fixed-n rule has tau = 1") {
    CHECK(StoppingRule::fixed_n(7).tau_limit(ParamPoint::one(0.5)) == 1.0);
  }
}

TEST_CASE("jensen ordering: E[sqrt N] <= sqrt(E[N])") {
  SUBCASE("negbin closed forms across a grid") {
    for (int r : {1, 2, 5, 9, 30}) {
      const auto rule = StoppingRule::negbin(r);
      for (double p : {0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        const auto theta = ParamPoint::one(p);
        CHECK(rule.expected_sqrt_n(theta).value <= std::sqrt(rule.expected_n(theta).value));
      }
    }
  }
  SUBCASE("monte carlo rules share draws, so the sample inequality is exact") {
    const auto normal = TwoParamExpFamily::normal();
    const auto rule = StoppingRule::bose_boukai(normal, 30.0, 2);
    McConfig cfg{500, 5};
    for (double s2 : {0.5, 1.0, 2.0}) {
      const auto theta = normal.familiar().to_theta(0.3, s2);
      CHECK(rule.expected_sqrt_n(theta, cfg).value <= std::sqrt(rule.expected_n(theta, cfg).value));
    }
  }
}

TEST_CASE("monte carlo expected_n agrees with closed form where both exist") {
  const auto rule = StoppingRule::negbin(3);
  const auto theta = ParamPoint::one(0.4);
  const int reps = 20000;
  std::vector<double> ns(reps);
  for (int i = 0; i < reps; ++i) ns[i] = rule.simulate(theta, derive_seed(29, i)).value;
  const double mean = pairwise_sum(ns) / reps;
  double var = 0.0;
  for (double v : ns) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (reps - 1.0) / reps);
  CHECK(std::fabs(mean - rule.expected_n(theta).value) < 4.0 * se);
}

TEST_CASE("cap exceeded is reported, not truncated silently") {
  const auto rule = StoppingRule::negbin(5).with_cap(10);
  const auto draw = rule.simulate(ParamPoint::one(0.01), 4);
  CHECK(draw.capped);
  CHECK(draw.value == 10.0);
  const auto en = StoppingRule::bose_boukai(TwoParamExpFamily::normal(), 100.0, 2)
                      .with_cap(20)
                      .expected_n(ParamPoint::two(-0.5, 0.0), {50, 3});
  CHECK(en.biased_low);
}

TEST_CASE("expected_sqrt_n gap to sqrt(E N) shrinks with r") {
  for (double p : {0.1, 0.5, 0.9}) {
    double prev = 1e9;
    for (int r : {1, 3, 9, 27}) {
      const double sqrt_e = std::sqrt(r / p);
      const double e_sqrt = negbin_expected_sqrt(r, p);
      const double rel = (sqrt_e - e_sqrt) / sqrt_e;
      CHECK(rel >= 0.0);
      CHECK(rel < prev);
      prev = rel;
    }
  }
}

TEST_CASE("negbin variance formula matches simulation") {
  const int r = 2;
  const double p = 0.5;
  const auto rule = StoppingRule::negbin(r);
  const int reps = 200000;
  std::vector<double> ns(reps);
  for (int i = 0; i < reps; ++i) ns[i] = rule.simulate(ParamPoint::one(p), derive_seed(41, i)).value;
  const double mean = pairwise_sum(ns) / reps;
  double m2 = 0.0, m4 = 0.0;
  for (double v : ns) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  const double var = m2 / (reps - 1.0);
  const double se_var = std::sqrt((m4 / reps - var * var) / reps);
  // r(1-p)/p^2 = 4; the rp/(1-p)^2 form would be 4 as well at p = 1/2, so
  // check a second point where the two differ: p = 0.25 gives 24 vs 8/9.
  CHECK(std::fabs(var - negbin_variance(r, p)) < 4.0 * se_var);
  CHECK(negbin_variance(2, 0.25) == doctest::Approx(24.0).epsilon(1e-12));
}

TEST_CASE("expected values respect the rule floor") {
  CHECK(StoppingRule::negbin(5).expected_n(ParamPoint::one(0.7)).value >= 5.0);
  CHECK(StoppingRule::fixed_n(12).expected_n(ParamPoint::one(0.5)).value == 12.0);
  const auto bb = StoppingRule::bose_boukai(TwoParamExpFamily::normal(), 20.0, 3);
  CHECK(bb.expected_n(ParamPoint::two(-0.5, 0.0), {200, 1}).value >= 3.0);
  const auto w = StoppingRule::woodroofe_lrt(10.0, 0.5, 4.0);
  CHECK(w.expected_n(ParamPoint::two(-0.5, 0.0), {100, 1}).value >= w.floor_value());
}

TEST_CASE("rule parameter validation") {
  CHECK_THROWS_AS(StoppingRule::negbin(0), DomainError);
  CHECK_THROWS_AS(StoppingRule::brownian_exit(1.0, 2.0), DomainError);
  CHECK_THROWS_AS(StoppingRule::bose_boukai(TwoParamExpFamily::normal(), 10.0, 1), DomainError);
  CHECK_THROWS_AS(StoppingRule::woodroofe_lrt(10.0, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(StoppingRule::negbin(2).simulate(ParamPoint::one(1.5), 0), DomainError);
}
