#ifndef SEQPRIOR_PRIOR_HPP_
#define SEQPRIOR_PRIOR_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seqprior/exp_family.hpp"
#include "seqprior/param_point.hpp"
#include "seqprior/stopping.hpp"

namespace seqprior {

enum class PriorKind {
  JeffreysFixed,
  JeffreysSequential,
  ReferenceFixed,
  ReferenceSequential,
  LargeAJeffreys,
  LargeAReference,
  Matching,
  ApproxSqrtN,
};

std::string to_string(PriorKind kind);
bool prior_kind_is_sequential(PriorKind kind);

// All priors are unnormalized: operations return log values defined up to an
// additive constant and every consumer works with differences only.

double log_jeffreys_fixed(const TwoParamExpFamily& model, const ParamPoint& theta);
double log_reference_fixed(const TwoParamExpFamily& model, const ParamPoint& theta);

// Large-a closed forms of the sequential priors under the Bose-Boukai rule,
// where E[N_a] ~ a/sqrt(|theta1|): (sequential Jeffreys, one-at-a-time
// reference). The first coincides with the fixed reference prior, the second
// adds -1/4 log|theta1|.
std::pair<double, double> large_a_log_priors(const TwoParamExpFamily& model,
                                            const ParamPoint& theta);

double log_matching_prior(const TwoParamExpFamily& model, const StoppingRule& rule,
                          const ParamPoint& theta);

// Memoizes Monte Carlo E[N] values per parameter point. Cache keys quantize
// each coordinate to 1e-12 (coordinates are assumed moderate, |x| < 9e5).
// Safe for concurrent readers; writers are serialized.
class ExpectedNCache {
 public:
  std::optional<double> lookup(const ParamPoint& theta) const;
  void store(const ParamPoint& theta, double value);

 private:
  using Key = std::pair<std::int64_t, std::int64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  static Key quantize(const ParamPoint& theta);

  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, double, KeyHash> values_;
};

// Binds a rule to a replicate budget and seed policy so priors can evaluate
// log E[N] and log E[sqrt N] deterministically. Closed-form rules never touch
// Monte Carlo; for the others the per-point seed is derived from the
// quantized coordinates, so evaluation order cannot change results.
class ExpectedNEvaluator {
 public:
  ExpectedNEvaluator(StoppingRule rule, std::int64_t replicates = 10000, std::uint64_t seed = 1);

  double log_expected_n(const ParamPoint& theta) const;
  double log_expected_sqrt_n(const ParamPoint& theta) const;

  const StoppingRule& rule() const { return rule_; }
  // true once any Monte Carlo estimate used a capped replicate (biased low)
  bool biased_low_seen() const { return biased_low_->load(); }

 private:
  double eval(const ParamPoint& theta, bool sqrt_version, ExpectedNCache& cache) const;

  StoppingRule rule_;
  std::int64_t replicates_;
  std::uint64_t seed_;
  std::shared_ptr<ExpectedNCache> cache_n_;
  std::shared_ptr<ExpectedNCache> cache_sqrt_;
  std::shared_ptr<std::atomic<bool>> biased_low_;
};

// One group of the (2.4)-(2.5) factorization. The caller supplies the
// factorization; its correctness for the model is a documented caller
// obligation and is not verified here.
struct RefSeqGroup {
  int dim;                                                  // q_i
  std::function<double(const ParamPoint&)> factor;          // g_i(theta_(i))
  std::function<double(const ParamPoint&)> log_det_block;   // log |G_ii(theta_(i))|
};

// sum_i (q_i/2) log g_i(theta) + sum_i (1/2) log |G_ii(theta)|.
// Throws DomainError unless sum q_i equals the parameter dimension.
double log_reference_sequential(std::span<const RefSeqGroup> groups, const ParamPoint& theta);

// All q_i = 1 (one-at-a-time): sqrt(E N) * pi_R. All q_i = 2: E N * pi_R.
double log_reference_seq_one_at_a_time(const TwoParamExpFamily& model, const ExpectedNEvaluator& en,
                               const ParamPoint& theta);
double log_reference_seq_paired_groups(const TwoParamExpFamily& model, const ExpectedNEvaluator& en,
                               const ParamPoint& theta);

// An evaluable unnormalized log-prior tagged with its construction.
struct PriorSpec {
  PriorKind kind;
  bool sequential;
  std::function<double(const ParamPoint&)> log_eval;
  std::shared_ptr<const ExpectedNEvaluator> en;  // null for fixed kinds

  double operator()(const ParamPoint& theta) const { return log_eval(theta); }
};

// Factories validate the rule-presence invariant: sequential kinds require a
// stopping rule, fixed kinds reject one.
PriorSpec make_prior(PriorKind kind, const TwoParamExpFamily& model,
                     std::optional<StoppingRule> rule = std::nullopt,
                     std::int64_t mc_replicates = 10000, std::uint64_t mc_seed = 1);

// Bernoulli parameter p in (0,1); q = 1, so JeffreysSequential and
// ReferenceSequential coincide.
PriorSpec make_prior_bernoulli(PriorKind kind, std::optional<StoppingRule> rule = std::nullopt,
                               std::int64_t mc_replicates = 10000, std::uint64_t mc_seed = 1);

// Brownian drift; the fixed-time Jeffreys prior is constant, so the
// sequential prior is sqrt(E_theta T_ab).
PriorSpec make_prior_brownian(PriorKind kind, std::optional<StoppingRule> rule = std::nullopt,
                              std::int64_t mc_replicates = 10000, std::uint64_t mc_seed = 1);

// Prior density in familiar coordinates: log pi(theta(f)) + log-Jacobian.
double log_prior_in_familiar(const PriorSpec& prior, const TwoParamExpFamily& model, double f1,
                             double f2);

}  // namespace seqprior

#endif  // SEQPRIOR_PRIOR_HPP_
