#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqprior/errors.hpp"
#include "seqprior/experiments.hpp"
#include "seqprior/numerics.hpp"
#include "seqprior/prior.hpp"

using namespace seqprior;

TEST_CASE("bernoulli jeffreys prior ratio with a finite-difference Fisher oracle") {
  // pi(0.25)/pi(0.5) = 0.5 / sqrt(0.1875)
  const double ratio = std::exp(bernoulli_log_jeffreys(0.25) - bernoulli_log_jeffreys(0.5));
  CHECK(ratio == doctest::Approx(0.5 / std::sqrt(0.1875)).epsilon(1e-12));

  // oracle: I(p) = -E d^2/dp^2 log f(X|p) by central differences of the pmf
  for (double p : {0.25, 0.5, 0.8}) {
    const double h = 1e-5;
    auto log_pmf = [](int x, double pp) { return x == 1 ? std::log(pp) : std::log1p(-pp); };
    double info = 0.0;
    for (int x : {0, 1}) {
      const double d2 = (log_pmf(x, p + h) - 2.0 * log_pmf(x, p) + log_pmf(x, p - h)) / (h * h);
      info -= (x == 1 ? p : 1.0 - p) * d2;
    }
    CHECK(bernoulli_fisher_info(p) == doctest::Approx(info).epsilon(1e-5));
    CHECK(bernoulli_log_jeffreys(p) == doctest::Approx(0.5 * std::log(info)).epsilon(1e-5));
  }
}

TEST_CASE("normal prior exponents in sigma^2 (fixed mu)") {
  const auto normal = TwoParamExpFamily::normal();
  const auto j = make_prior(PriorKind::JeffreysFixed, normal);
  const auto ref = make_prior(PriorKind::ReferenceFixed, normal);
  const auto f31j = make_prior(PriorKind::LargeAJeffreys, normal);
  const auto f31r = make_prior(PriorKind::LargeAReference, normal);

  std::vector<double> log_s2;
  std::vector<double> lj, lr, l7, l8;
  for (double s2 = 0.2; s2 <= 5.0; s2 *= 1.5) {
    log_s2.push_back(std::log(s2));
    lj.push_back(log_prior_in_familiar(j, normal, 0.7, s2));
    lr.push_back(log_prior_in_familiar(ref, normal, 0.7, s2));
    l7.push_back(log_prior_in_familiar(f31j, normal, 0.7, s2));
    l8.push_back(log_prior_in_familiar(f31r, normal, 0.7, s2));
  }
  CHECK(linear_fit_slope(log_s2, lj) == doctest::Approx(-1.5).epsilon(1e-10));
  CHECK(linear_fit_slope(log_s2, lr) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(linear_fit_slope(log_s2, l7) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(linear_fit_slope(log_s2, l8) == doctest::Approx(-0.75).epsilon(1e-10));
}

TEST_CASE("jeffreys closed form equals the determinant route") {
  for (const auto& model : {TwoParamExpFamily::normal(), TwoParamExpFamily::gamma_family()}) {
    for (double t1 : {-3.0, -0.7, -0.05}) {
      for (double t2 : {0.4, 1.0, 2.8}) {
        const auto theta = ParamPoint::two(t1, t2);
        const double direct =
            std::log(std::sqrt(-t1) * std::sqrt(model.g1pp(t1) * model.g2pp(t2)));
        CHECK(log_jeffreys_fixed(model, theta) == doctest::Approx(direct).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sequential jeffreys over the negative binomial rule") {
  const auto prior = make_prior_bernoulli(PriorKind::JeffreysSequential, StoppingRule::negbin(3));
  // pi*(p) propto p^{-1} (1-p)^{-1/2}
  for (double p : {0.1, 0.35, 0.8}) {
    const double expected_diff = -std::log(p / 0.5) - 0.5 * std::log((1.0 - p) / 0.5);
    CHECK(prior.log_eval(ParamPoint::one(p)) - prior.log_eval(ParamPoint::one(0.5)) ==
          doctest::Approx(expected_diff).epsilon(1e-12));
  }
}

TEST_CASE("brownian sequential prior is sqrt of the expected exit time") {
  const auto prior =
      make_prior_brownian(PriorKind::JeffreysSequential, StoppingRule::brownian_exit(-1.0, 1.0));
  CHECK(std::exp(prior.log_eval(ParamPoint::one(0.0))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::exp(prior.log_eval(ParamPoint::one(1.0))) ==
        doctest::Approx(std::sqrt(std::tanh(1.0))).epsilon(1e-12));
}

TEST_CASE("fact 3.1 identities") {
  const auto normal = TwoParamExpFamily::normal();
  for (double t1 : {-2.0, -0.5, -0.1}) {
    for (double t2 : {-1.0, 0.0, 2.0}) {
      const auto theta = ParamPoint::two(t1, t2);
      const auto [seq_j, seq_r] = large_a_log_priors(normal, theta);
      CHECK(seq_j == doctest::Approx(log_reference_fixed(normal, theta)).epsilon(1e-13));
      CHECK(seq_r - log_reference_fixed(normal, theta) ==
            doctest::Approx(-0.25 * std::log(-t1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("sequential jeffreys with Monte Carlo E[N_a] approaches its large-a form") {
  const auto normal = TwoParamExpFamily::normal();
  const auto rule = StoppingRule::bose_boukai(normal, 200.0, 2);
  const ExpectedNEvaluator en(rule, 2000, 99);
  // log-differences across a grid match the large-a closed form within Monte Carlo tolerance
  const auto ref = ParamPoint::two(-0.5, 0.0);
  const double base_seq = en.log_expected_n(ref) + log_jeffreys_fixed(normal, ref);
  const double base_large_a = large_a_log_priors(normal, ref).first;
  for (double t1 : {-1.0, -0.25}) {
    for (double t2 : {0.0, 1.0}) {
      const auto theta = ParamPoint::two(t1, t2);
      const double seq_diff =
          en.log_expected_n(theta) + log_jeffreys_fixed(normal, theta) - base_seq;
      const double large_a_diff = large_a_log_priors(normal, theta).first - base_large_a;
      CHECK(seq_diff == doctest::Approx(large_a_diff).epsilon(0.05));
    }
  }
}

TEST_CASE("matching prior") {
  const auto normal = TwoParamExpFamily::normal();
  SUBCASE("bose-boukai: matching equals the large-a reference form") {
    const auto rule = StoppingRule::bose_boukai(normal, 50.0, 2);
    for (double t1 : {-2.0, -0.5}) {
      const auto theta = ParamPoint::two(t1, 0.7);
      CHECK(log_matching_prior(normal, rule, theta) ==
            doctest::Approx(large_a_log_priors(normal, theta).second).epsilon(1e-12));
    }
  }
  SUBCASE("woodroofe cap band at the null") {
    const auto rule = StoppingRule::woodroofe_lrt(100.0, 0.5, 4.0);
    const auto theta = normal.familiar().to_theta(0.0, 1.0);
    CHECK(log_matching_prior(normal, rule, theta) ==
          doctest::Approx(std::log(2.0) + log_reference_fixed(normal, theta)).epsilon(1e-12));
  }
  SUBCASE("fixed-n rule collapses to the fixed reference prior") {
    const auto rule = StoppingRule::fixed_n(25);
    const auto theta = ParamPoint::two(-1.3, 0.2);
    CHECK(log_matching_prior(normal, rule, theta) ==
          doctest::Approx(log_reference_fixed(normal, theta)).epsilon(1e-13));
  }
}

TEST_CASE("approximate sqrt prior") {
  const auto prior = make_prior_bernoulli(PriorKind::ApproxSqrtN, StoppingRule::negbin(1));
  CHECK(std::exp(prior.log_eval(ParamPoint::one(0.5))) == doctest::Approx(1.3471).epsilon(2e-3));
  // p -> 1: E sqrt(N/r) -> 1
  const auto prior9 = make_prior_bernoulli(PriorKind::ApproxSqrtN, StoppingRule::negbin(9));
  CHECK(std::exp(prior9.log_eval(ParamPoint::one(0.999999))) / 3.0 ==
        doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("general reference_sequential factorization") {
  const int r = 3;
  std::vector<RefSeqGroup> groups;
  groups.push_back(
      {1, [r](const ParamPoint& t) { return r / t.scalar(); },
       [](const ParamPoint& t) { return std::log(bernoulli_fisher_info(t.scalar())); }});
  const auto seq = make_prior_bernoulli(PriorKind::JeffreysSequential, StoppingRule::negbin(r));
  SUBCASE("q=1 collapse: coincides with the sequential Jeffreys prior") {
    for (double p : {0.1, 0.4, 0.9}) {
      const auto theta = ParamPoint::one(p);
      CHECK(log_reference_sequential(groups, theta) ==
            doctest::Approx(seq.log_eval(theta)).epsilon(1e-12));
    }
  }
  SUBCASE("the all-q=2 convenience doubles the E[N] exponent") {
    const auto normal = TwoParamExpFamily::normal();
    const ExpectedNEvaluator en_fixed(StoppingRule::fixed_n(16), 100, 1);
    const auto theta = ParamPoint::two(-0.8, 0.3);
    const double single = log_reference_seq_one_at_a_time(normal, en_fixed, theta);
    const double paired = log_reference_seq_paired_groups(normal, en_fixed, theta);
    CHECK(paired - single == doctest::Approx(0.5 * std::log(16.0)).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(log_reference_sequential(groups, ParamPoint::two(-1.0, 0.5)), DomainError);
  }
}

TEST_CASE("two-parameter sequential jeffreys carries the full E[N] exponent") {
  // q = 2, so the E[N] factor enters with exponent q/2 = 1; with a fixed-n
  // rule this is exactly log n + fixed Jeffreys
  const auto normal = TwoParamExpFamily::normal();
  const auto prior =
      make_prior(PriorKind::JeffreysSequential, normal, StoppingRule::fixed_n(16));
  const auto theta = ParamPoint::two(-0.6, 1.1);
  CHECK(prior.log_eval(theta) ==
        doctest::Approx(std::log(16.0) + log_jeffreys_fixed(normal, theta)).epsilon(1e-13));
  const auto ref_seq =
      make_prior(PriorKind::ReferenceSequential, normal, StoppingRule::fixed_n(16));
  CHECK(ref_seq.log_eval(theta) ==
        doctest::Approx(0.5 * std::log(16.0) + log_reference_fixed(normal, theta)).epsilon(1e-13));
}

TEST_CASE("rule-presence invariant") {
  CHECK_THROWS_AS(make_prior_bernoulli(PriorKind::JeffreysSequential), DomainError);
  CHECK_THROWS_AS(make_prior_bernoulli(PriorKind::JeffreysFixed, StoppingRule::negbin(2)),
                  DomainError);
  CHECK_THROWS_AS(make_prior(PriorKind::Matching, TwoParamExpFamily::normal()), DomainError);
}

TEST_CASE("log_eval finite on the domain interior") {
  const auto normal = TwoParamExpFamily::normal();
  for (PriorKind kind : {PriorKind::JeffreysFixed, PriorKind::ReferenceFixed,
                         PriorKind::LargeAJeffreys, PriorKind::LargeAReference}) {
    const auto prior = make_prior(kind, normal);
    for (double t1 : {-10.0, -0.01}) {
      for (double t2 : {-50.0, 3.0}) {
        CHECK(std::isfinite(prior.log_eval(ParamPoint::two(t1, t2))));
      }
    }
  }
}

TEST_CASE("expected-N evaluator memoizes and is order-independent") {
  const auto normal = TwoParamExpFamily::normal();
  const auto rule = StoppingRule::bose_boukai(normal, 30.0, 2);
  const auto a = ParamPoint::two(-0.5, 0.0);
  const auto b = ParamPoint::two(-1.0, 1.0);

  const ExpectedNEvaluator ab(rule, 400, 7);
  const double va_first = ab.log_expected_n(a);
  const double vb_second = ab.log_expected_n(b);
  CHECK(ab.log_expected_n(a) == va_first);  // memoized, bitwise

  const ExpectedNEvaluator ba(rule, 400, 7);
  CHECK(ba.log_expected_n(b) == vb_second);  // order cannot change the estimate
  CHECK(ba.log_expected_n(a) == va_first);
}

TEST_CASE("capped Monte Carlo marks the evaluator biased-low") {
  const auto normal = TwoParamExpFamily::normal();
  const auto rule = StoppingRule::bose_boukai(normal, 100.0, 2).with_cap(10);
  const ExpectedNEvaluator en(rule, 50, 3);
  en.log_expected_n(ParamPoint::two(-0.5, 0.0));
  CHECK(en.biased_low_seen());
}
