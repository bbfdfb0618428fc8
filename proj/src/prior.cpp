#include "seqprior/prior.hpp"

#include <cmath>

#include "seqprior/errors.hpp"
#include "seqprior/rng.hpp"

namespace seqprior {

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::JeffreysFixed:
      return "jeffreys-fixed";
    case PriorKind::JeffreysSequential:
      return "jeffreys-seq";
    case PriorKind::ReferenceFixed:
      return "reference-fixed";
    case PriorKind::ReferenceSequential:
      return "reference-seq";
    case PriorKind::LargeAJeffreys:
      return "large-a-jeffreys";
    case PriorKind::LargeAReference:
      return "large-a-reference";
    case PriorKind::Matching:
      return "matching";
    case PriorKind::ApproxSqrtN:
      return "approx-sqrt";
  }
  return "unknown";
}

bool prior_kind_is_sequential(PriorKind kind) {
  switch (kind) {
    case PriorKind::JeffreysSequential:
    case PriorKind::ReferenceSequential:
    case PriorKind::Matching:
    case PriorKind::ApproxSqrtN:
      return true;
    case PriorKind::JeffreysFixed:
    case PriorKind::ReferenceFixed:
    case PriorKind::LargeAJeffreys:
    case PriorKind::LargeAReference:
      return false;
  }
  return false;
}

double log_jeffreys_fixed(const TwoParamExpFamily& model, const ParamPoint& theta) {
  return 0.5 * model.fisher_info(theta).log_det();
}

double log_reference_fixed(const TwoParamExpFamily& model, const ParamPoint& theta) {
  model.require_domain(theta);
  return 0.5 * (std::log(model.g1pp(theta.theta1())) + std::log(model.g2pp(theta.theta2())));
}

std::pair<double, double> large_a_log_priors(const TwoParamExpFamily& model,
                                            const ParamPoint& theta) {
  const double ref = log_reference_fixed(model, theta);
  return {ref, ref - 0.25 * std::log(-theta.theta1())};
}

double log_matching_prior(const TwoParamExpFamily& model, const StoppingRule& rule,
                          const ParamPoint& theta) {
  return 0.5 * std::log(rule.tau_limit(theta)) + log_reference_fixed(model, theta);
}

std::size_t ExpectedNCache::KeyHash::operator()(const Key& k) const {
  return std::hash<std::int64_t>()(k.first) ^
         (std::hash<std::int64_t>()(k.second) * 1099511628211ULL);
}

ExpectedNCache::Key ExpectedNCache::quantize(const ParamPoint& theta) {
  const double s = 1e12;
  const double a = theta.coord(0);
  const double b = theta.dim() == 2 ? theta.coord(1) : 0.0;
  return {static_cast<std::int64_t>(std::llround(a * s)),
          static_cast<std::int64_t>(std::llround(b * s))};
}

std::optional<double> ExpectedNCache::lookup(const ParamPoint& theta) const {
  std::shared_lock lock(mutex_);
  const auto it = values_.find(quantize(theta));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void ExpectedNCache::store(const ParamPoint& theta, double value) {
  std::unique_lock lock(mutex_);
  values_.emplace(quantize(theta), value);
}

ExpectedNEvaluator::ExpectedNEvaluator(StoppingRule rule, std::int64_t replicates,
                                       std::uint64_t seed)
    : rule_(std::move(rule)),
      replicates_(replicates),
      seed_(seed),
      cache_n_(std::make_shared<ExpectedNCache>()),
      cache_sqrt_(std::make_shared<ExpectedNCache>()),
      biased_low_(std::make_shared<std::atomic<bool>>(false)) {}

double ExpectedNEvaluator::eval(const ParamPoint& theta, bool sqrt_version,
                                ExpectedNCache& cache) const {
  if (const auto hit = cache.lookup(theta)) return *hit;
  // Per-point stream derived from the quantized coordinates, so evaluation
  // order and repetition cannot change the estimate.
  const std::uint64_t stream =
      splitmix64(static_cast<std::uint64_t>(std::llround(theta.coord(0) * 1e12))) ^
      splitmix64(static_cast<std::uint64_t>(
                     std::llround((theta.dim() == 2 ? theta.coord(1) : 0.0) * 1e12)) +
                 0x9e37ULL);
  const McConfig cfg{replicates_, derive_seed(seed_, stream)};
  const ExpectedN e =
      sqrt_version ? rule_.expected_sqrt_n(theta, cfg) : rule_.expected_n(theta, cfg);
  if (e.biased_low) biased_low_->store(true);
  const double value = std::log(e.value);
  cache.store(theta, value);
  return value;
}

double ExpectedNEvaluator::log_expected_n(const ParamPoint& theta) const {
  return eval(theta, false, *cache_n_);
}

double ExpectedNEvaluator::log_expected_sqrt_n(const ParamPoint& theta) const {
  return eval(theta, true, *cache_sqrt_);
}

double log_reference_sequential(std::span<const RefSeqGroup> groups, const ParamPoint& theta) {
  int total_dim = 0;
  for (const auto& g : groups) total_dim += g.dim;
  if (total_dim != theta.dim()) {
    throw DomainError("log_reference_sequential: group dimensions sum to " +
                      std::to_string(total_dim) + ", parameter dimension is " +
                      std::to_string(theta.dim()));
  }
  double value = 0.0;
  for (const auto& g : groups) {
    value += 0.5 * g.dim * std::log(g.factor(theta)) + 0.5 * g.log_det_block(theta);
  }
  return value;
}

double log_reference_seq_one_at_a_time(const TwoParamExpFamily& model, const ExpectedNEvaluator& en,
                               const ParamPoint& theta) {
  return 0.5 * en.log_expected_n(theta) + log_reference_fixed(model, theta);
}

double log_reference_seq_paired_groups(const TwoParamExpFamily& model, const ExpectedNEvaluator& en,
                               const ParamPoint& theta) {
  return en.log_expected_n(theta) + log_reference_fixed(model, theta);
}

namespace {

std::shared_ptr<const ExpectedNEvaluator> require_rule(PriorKind kind,
                                                       std::optional<StoppingRule>& rule,
                                                       std::int64_t replicates,
                                                       std::uint64_t seed) {
  const bool seq = prior_kind_is_sequential(kind);
  if (seq && !rule) {
    throw DomainError(to_string(kind) + " prior requires a stopping rule");
  }
  if (!seq && rule) {
    throw DomainError(to_string(kind) + " prior is a fixed-sample construction; no rule applies");
  }
  if (!seq) return nullptr;
  return std::make_shared<ExpectedNEvaluator>(std::move(*rule), replicates, seed);
}

}  // namespace

PriorSpec make_prior(PriorKind kind, const TwoParamExpFamily& model,
                     std::optional<StoppingRule> rule, std::int64_t mc_replicates,
                     std::uint64_t mc_seed) {
  auto en = require_rule(kind, rule, mc_replicates, mc_seed);
  PriorSpec spec{kind, en != nullptr, {}, en};
  switch (kind) {
    case PriorKind::JeffreysFixed:
      spec.log_eval = [model](const ParamPoint& t) { return log_jeffreys_fixed(model, t); };
      break;
    case PriorKind::ReferenceFixed:
      spec.log_eval = [model](const ParamPoint& t) { return log_reference_fixed(model, t); };
      break;
    case PriorKind::LargeAJeffreys:
      spec.log_eval = [model](const ParamPoint& t) { return large_a_log_priors(model, t).first; };
      break;
    case PriorKind::LargeAReference:
      spec.log_eval = [model](const ParamPoint& t) { return large_a_log_priors(model, t).second; };
      break;
    case PriorKind::JeffreysSequential:
      // q = 2 for the two-parameter family
      spec.log_eval = [model, en](const ParamPoint& t) {
        return en->log_expected_n(t) + log_jeffreys_fixed(model, t);
      };
      break;
    case PriorKind::ReferenceSequential:
      spec.log_eval = [model, en](const ParamPoint& t) {
        return log_reference_seq_one_at_a_time(model, *en, t);
      };
      break;
    case PriorKind::Matching: {
      const StoppingRule r = en->rule();
      spec.log_eval = [model, r](const ParamPoint& t) { return log_matching_prior(model, r, t); };
      break;
    }
    case PriorKind::ApproxSqrtN:
      spec.log_eval = [en](const ParamPoint& t) { return en->log_expected_sqrt_n(t); };
      break;
  }
  return spec;
}

PriorSpec make_prior_bernoulli(PriorKind kind, std::optional<StoppingRule> rule,
                               std::int64_t mc_replicates, std::uint64_t mc_seed) {
  auto en = require_rule(kind, rule, mc_replicates, mc_seed);
  PriorSpec spec{kind, en != nullptr, {}, en};
  switch (kind) {
    case PriorKind::JeffreysFixed:
    case PriorKind::ReferenceFixed:
    case PriorKind::LargeAJeffreys:
    case PriorKind::LargeAReference:
      // q = 1: reference and Jeffreys coincide
      spec.log_eval = [](const ParamPoint& t) { return bernoulli_log_jeffreys(t.scalar()); };
      break;
    case PriorKind::JeffreysSequential:
    case PriorKind::ReferenceSequential:
      // q = 1: {E N}^{1/2} pi_J
      spec.log_eval = [en](const ParamPoint& t) {
        return 0.5 * en->log_expected_n(t) + bernoulli_log_jeffreys(t.scalar());
      };
      break;
    case PriorKind::Matching: {
      const StoppingRule r = en->rule();
      spec.log_eval = [r](const ParamPoint& t) {
        return 0.5 * std::log(r.tau_limit(t)) + bernoulli_log_jeffreys(t.scalar());
      };
      break;
    }
    case PriorKind::ApproxSqrtN:
      spec.log_eval = [en](const ParamPoint& t) { return en->log_expected_sqrt_n(t); };
      break;
  }
  return spec;
}

PriorSpec make_prior_brownian(PriorKind kind, std::optional<StoppingRule> rule,
                              std::int64_t mc_replicates, std::uint64_t mc_seed) {
  auto en = require_rule(kind, rule, mc_replicates, mc_seed);
  PriorSpec spec{kind, en != nullptr, {}, en};
  switch (kind) {
    case PriorKind::JeffreysFixed:
    case PriorKind::ReferenceFixed:
    case PriorKind::LargeAJeffreys:
    case PriorKind::LargeAReference:
      // unit Fisher information per unit time: constant prior
      spec.log_eval = [](const ParamPoint&) { return 0.0; };
      break;
    case PriorKind::JeffreysSequential:
    case PriorKind::ReferenceSequential:
      spec.log_eval = [en](const ParamPoint& t) { return 0.5 * en->log_expected_n(t); };
      break;
    case PriorKind::ApproxSqrtN:
      spec.log_eval = [en](const ParamPoint& t) { return en->log_expected_sqrt_n(t); };
      break;
    case PriorKind::Matching:
      throw UnsupportedError("matching prior: no tau limit for the Brownian exit rule");
  }
  return spec;
}

double log_prior_in_familiar(const PriorSpec& prior, const TwoParamExpFamily& model, double f1,
                             double f2) {
  const ParamPoint theta = model.familiar().to_theta(f1, f2);
  return prior.log_eval(theta) + model.familiar().log_jacobian(f1, f2);
}

}  // namespace seqprior
