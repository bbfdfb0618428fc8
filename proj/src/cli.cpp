#include "seqprior/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>

#include "seqprior/csv.hpp"
#include "seqprior/errors.hpp"
#include "seqprior/experiments.hpp"
#include "seqprior/exp_family.hpp"
#include "seqprior/posterior.hpp"
#include "seqprior/prior.hpp"
#include "seqprior/sampler.hpp"
#include "seqprior/stopping.hpp"

namespace seqprior {

namespace {

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

std::string render_header(const std::string& subcommand, const std::string& seed_note,
                          const ConfigEcho& config) {
  std::string s;
  s += std::string("# seqprior ") + kVersion + "\n";
  s += "# subcommand: " + subcommand + "\n";
  s += "# seed: " + seed_note + "\n";
  s += "# config-begin\n";
  for (const auto& [k, v] : config) s += "# " + k + "=" + v + "\n";
  s += "# config-end\n";
  return s;
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(spec);
  if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1 ||
      (is >> std::ws, !is.eof())) {
    throw DomainError("grid must be of the form lo:hi:count, got '" + spec + "'");
  }
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < count; ++i) grid[i] = lo + (hi - lo) * i / (count - 1);
  return grid;
}

TwoParamExpFamily model_by_name(const std::string& name) {
  if (name == "normal") return TwoParamExpFamily::normal();
  if (name == "invgauss") return TwoParamExpFamily::inverse_gaussian();
  if (name == "gamma") return TwoParamExpFamily::gamma_family();
  if (name == "invgamma") return TwoParamExpFamily::inverse_gamma();
  throw DomainError("unknown model '" + name + "'");
}

PriorKind prior_by_name(const std::string& name) {
  for (PriorKind k :
       {PriorKind::JeffreysFixed, PriorKind::JeffreysSequential, PriorKind::ReferenceFixed,
        PriorKind::ReferenceSequential, PriorKind::LargeAJeffreys, PriorKind::LargeAReference,
        PriorKind::Matching, PriorKind::ApproxSqrtN}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown prior '" + name + "'");
}

// Rule selection shared by several subcommands.
struct RuleFlags {
  std::string rule = "negbin";
  int r = 2;
  double exit_a = -1.0;
  double exit_b = 1.0;
  double dt = 1e-3;
  double bb_a = 100.0;
  int m0 = 2;
  double w_a = 100.0;
  double b1 = 0.5;
  double b2 = 4.0;
  long long n_fixed = 10;
  long long cap = 10000000;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--rule", rule, "Stopping rule")
        ->check(CLI::IsMember({"negbin", "brownian-exit", "bose-boukai", "woodroofe", "fixed-n"}));
    cmd->add_option("--r", r, "negbin: number of successes");
    cmd->add_option("--a", exit_a, "brownian-exit: lower bound (< 0)");
    cmd->add_option("--b", exit_b, "brownian-exit: upper bound (> 0)");
    cmd->add_option("--dt", dt, "brownian-exit: Euler step");
    cmd->add_option("--bb-a", bb_a, "bose-boukai: boundary parameter a");
    cmd->add_option("--m0", m0, "bose-boukai: initial sample size");
    cmd->add_option("--w-a", w_a, "woodroofe: boundary parameter a");
    cmd->add_option("--b1", b1, "woodroofe: lower band constant");
    cmd->add_option("--b2", b2, "woodroofe: upper band constant");
    cmd->add_option("--n-fixed", n_fixed, "fixed-n: sample size");
    cmd->add_option("--cap", cap, "hard cap on draws within one stopping time");
  }

  StoppingRule build(const TwoParamExpFamily* model) const {
    StoppingRule out = [&] {
      if (rule == "negbin") return StoppingRule::negbin(r);
      if (rule == "brownian-exit") return StoppingRule::brownian_exit(exit_a, exit_b, dt);
      if (rule == "bose-boukai") {
        return StoppingRule::bose_boukai(model ? *model : TwoParamExpFamily::normal(), bb_a, m0);
      }
      if (rule == "woodroofe") return StoppingRule::woodroofe_lrt(w_a, b1, b2);
      if (rule == "fixed-n") return StoppingRule::fixed_n(n_fixed);
      throw DomainError("unknown rule '" + rule + "'");
    }();
    return out.with_cap(cap);
  }

  void echo(ConfigEcho& cfg) const {
    cfg.emplace_back("rule", rule);
    if (rule == "negbin") cfg.emplace_back("r", std::to_string(r));
    if (rule == "brownian-exit") {
      cfg.emplace_back("a", format_g17(exit_a));
      cfg.emplace_back("b", format_g17(exit_b));
      cfg.emplace_back("dt", format_g17(dt));
    }
    if (rule == "bose-boukai") {
      cfg.emplace_back("bb-a", format_g17(bb_a));
      cfg.emplace_back("m0", std::to_string(m0));
    }
    if (rule == "woodroofe") {
      cfg.emplace_back("w-a", format_g17(w_a));
      cfg.emplace_back("b1", format_g17(b1));
      cfg.emplace_back("b2", format_g17(b2));
    }
    if (rule == "fixed-n") cfg.emplace_back("n-fixed", std::to_string(n_fixed));
    cfg.emplace_back("cap", std::to_string(cap));
  }
};

// Parameter-point selection for stop-sim / expected-n.
struct ThetaFlags {
  double p = 0.5;
  double drift = 0.0;
  std::optional<double> theta1, theta2;  // natural coordinates
  std::optional<double> mu, sigma2;      // normal convenience

  void add_options(CLI::App* cmd) {
    cmd->add_option("--p", p, "Bernoulli success probability (negbin rule)");
    cmd->add_option("--theta", drift, "Brownian drift (brownian-exit rule)");
    cmd->add_option("--theta1", theta1, "theta1 (two-parameter rules)");
    cmd->add_option("--theta2", theta2, "theta2 (two-parameter rules)");
    cmd->add_option("--mu", mu, "normal mean (convenience for normal-model rules)");
    cmd->add_option("--sigma2", sigma2, "normal variance (convenience for normal-model rules)");
  }

  ParamPoint resolve(const RuleFlags& rule, const TwoParamExpFamily& model,
                     ConfigEcho& cfg) const {
    if (rule.rule == "negbin" || rule.rule == "fixed-n") {
      cfg.emplace_back("p", format_g17(p));
      return ParamPoint::one(p);
    }
    if (rule.rule == "brownian-exit") {
      cfg.emplace_back("theta", format_g17(drift));
      return ParamPoint::one(drift);
    }
    if (theta1 || theta2) {
      if (!(theta1 && theta2)) {
        throw DomainError("--theta1 and --theta2 must be given together");
      }
      cfg.emplace_back("theta1", format_g17(*theta1));
      cfg.emplace_back("theta2", format_g17(*theta2));
      return ParamPoint::two(*theta1, *theta2);
    }
    if (mu || sigma2) {
      if (!(mu && sigma2)) throw DomainError("--mu and --sigma2 must be given together");
      if (model.instance() != TwoParamExpFamily::Instance::Normal) {
        throw DomainError("--mu/--sigma2 apply to the normal model; use --theta1/--theta2");
      }
      cfg.emplace_back("mu", format_g17(*mu));
      cfg.emplace_back("sigma2", format_g17(*sigma2));
      return model.familiar().to_theta(*mu, *sigma2);
    }
    throw DomainError("two-parameter rules need --theta1/--theta2 or --mu/--sigma2");
  }
};

std::string method_name(ExpectedN::Method m) {
  return m == ExpectedN::Method::ClosedForm ? "closed-form" : "monte-carlo";
}

// Trailing warning comment for Monte Carlo estimates that hit the cap;
// deterministic for a given configuration, so replay still round-trips.
std::string biased_low_note(const PriorSpec& prior) {
  if (prior.en && prior.en->biased_low_seen()) {
    return "# warning: capped stopping-time simulations, E[N] estimates biased low\n";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Subcommand handlers. Each returns the complete output text (header + body).

struct StopSimCmd {
  RuleFlags rule;
  ThetaFlags theta;
  std::string model_name = "normal";
  long long replicates = 1000;
  std::uint64_t seed = 1;

  std::string run() const {
    const TwoParamExpFamily model = model_by_name(model_name);
    ConfigEcho cfg;
    rule.echo(cfg);
    if (rule.rule == "bose-boukai") cfg.emplace_back("model", model_name);
    const ParamPoint point = theta.resolve(rule, model, cfg);
    cfg.emplace_back("replicates", std::to_string(replicates));
    cfg.emplace_back("seed", std::to_string(seed));
    const StoppingRule built = rule.build(&model);

    std::string body = "replicate,value,capped\n";
    for (long long i = 0; i < replicates; ++i) {
      const StopDraw d = built.simulate(point, derive_seed(seed, static_cast<std::uint64_t>(i)));
      body += std::to_string(i) + "," + format_g17(d.value) + "," + (d.capped ? "1" : "0") + "\n";
    }
    return render_header("stop-sim", std::to_string(seed), cfg) + body;
  }
};

struct ExpectedNCmd {
  RuleFlags rule;
  ThetaFlags theta;
  std::string model_name = "normal";
  long long replicates = 100000;
  std::uint64_t seed = 1;
  bool with_sqrt = false;

  std::string run() const {
    const TwoParamExpFamily model = model_by_name(model_name);
    ConfigEcho cfg;
    rule.echo(cfg);
    if (rule.rule == "bose-boukai") cfg.emplace_back("model", model_name);
    const ParamPoint point = theta.resolve(rule, model, cfg);
    cfg.emplace_back("replicates", std::to_string(replicates));
    cfg.emplace_back("seed", std::to_string(seed));
    if (with_sqrt) cfg.emplace_back("sqrt", "true");
    const StoppingRule built = rule.build(&model);
    const McConfig mc{replicates, seed};

    std::string body = "quantity,value,se,method,replicates,biased_low\n";
    auto row = [&](const std::string& name, const ExpectedN& e) {
      body += name + "," + format_g17(e.value) + "," + format_g17(e.se) + "," +
              method_name(e.method) + "," + std::to_string(e.replicates) + "," +
              (e.biased_low ? "1" : "0") + "\n";
    };
    row("expected_n", built.expected_n(point, mc));
    if (with_sqrt) row("expected_sqrt_n", built.expected_sqrt_n(point, mc));
    return render_header("expected-n", std::to_string(seed), cfg) + body;
  }
};

struct PriorEvalCmd {
  std::string model_name = "bernoulli";
  std::string prior_name = "jeffreys-fixed";
  std::string grid_spec = "0.05:0.95:19";
  std::string coord = "";  // two-parameter models: theta1|theta2|familiar1|familiar2
  double fixed_other = 0.0;
  RuleFlags rule;
  bool with_rule = false;
  long long replicates = 100000;
  std::uint64_t seed = 1;

  std::string run() const {
    const PriorKind kind = prior_by_name(prior_name);
    ConfigEcho cfg;
    cfg.emplace_back("model", model_name);
    cfg.emplace_back("prior", prior_name);
    cfg.emplace_back("grid", grid_spec);
    const std::vector<double> grid = parse_grid(grid_spec);

    std::optional<StoppingRule> maybe_rule;
    const bool sequential = prior_kind_is_sequential(kind);
    if (sequential != with_rule) {
      throw DomainError(sequential ? "prior '" + prior_name + "' requires --rule"
                                   : "prior '" + prior_name + "' does not take --rule");
    }

    std::string body;
    if (model_name == "bernoulli") {
      if (with_rule) {
        maybe_rule = rule.build(nullptr);
        rule.echo(cfg);
      }
      cfg.emplace_back("replicates", std::to_string(replicates));
      cfg.emplace_back("seed", std::to_string(seed));
      const PriorSpec prior = make_prior_bernoulli(kind, maybe_rule, replicates, seed);
      body = "p,log_prior\n";
      for (double p : grid) {
        body += format_g17(p) + "," + format_g17(prior.log_eval(ParamPoint::one(p))) + "\n";
      }
      body += biased_low_note(prior);
    } else if (model_name == "brownian") {
      if (with_rule) {
        maybe_rule = rule.build(nullptr);
        rule.echo(cfg);
      }
      cfg.emplace_back("replicates", std::to_string(replicates));
      cfg.emplace_back("seed", std::to_string(seed));
      const PriorSpec prior = make_prior_brownian(kind, maybe_rule, replicates, seed);
      body = "theta,log_prior\n";
      for (double t : grid) {
        body += format_g17(t) + "," + format_g17(prior.log_eval(ParamPoint::one(t))) + "\n";
      }
      body += biased_low_note(prior);
    } else {
      const TwoParamExpFamily model = model_by_name(model_name);
      if (with_rule) {
        maybe_rule = rule.build(&model);
        rule.echo(cfg);
      }
      const std::string c = coord.empty() ? "theta1" : coord;
      cfg.emplace_back("coord", c);
      cfg.emplace_back("fix", format_g17(fixed_other));
      cfg.emplace_back("replicates", std::to_string(replicates));
      cfg.emplace_back("seed", std::to_string(seed));
      const PriorSpec prior = make_prior(kind, model, maybe_rule, replicates, seed);
      body = c + ",log_prior\n";
      for (double v : grid) {
        double log_value = 0.0;
        if (c == "theta1") {
          log_value = prior.log_eval(ParamPoint::two(v, fixed_other));
        } else if (c == "theta2") {
          log_value = prior.log_eval(ParamPoint::two(fixed_other, v));
        } else if (c == "familiar1") {
          log_value = log_prior_in_familiar(prior, model, v, fixed_other);
        } else if (c == "familiar2") {
          log_value = log_prior_in_familiar(prior, model, fixed_other, v);
        } else {
          throw DomainError("unknown coord '" + c + "'");
        }
        body += format_g17(v) + "," + format_g17(log_value) + "\n";
      }
      body += biased_low_note(prior);
    }
    return render_header("prior-eval", std::to_string(seed), cfg) + body;
  }
};

struct SampleCmd {
  std::string algo = "latent";
  std::string rule_name = "negbin";
  int r = 2;
  long long n_obs = 5;
  std::string fixed_prior = "jeffreys-fixed";
  std::string psi = "identity";
  long long iters = 11000;
  long long burn = -1;
  std::uint64_t seed = 1;
  int e_n_replicates = 1000;
  int inner_steps = 50;
  double rw_step = 0.15;
  bool paper_literal = false;
  bool rw_proposal = false;
  long long cap = 10000000;

  std::string run() const {
    if (fixed_prior != "jeffreys-fixed") {
      throw DomainError("sample: the fixed prior pi_F must be 'jeffreys-fixed'");
    }
    ConfigEcho cfg;
    cfg.emplace_back("algo", algo);
    cfg.emplace_back("rule", rule_name);
    cfg.emplace_back("r", std::to_string(r));
    cfg.emplace_back("n", std::to_string(n_obs));
    cfg.emplace_back("fixed-prior", fixed_prior);
    if (algo == "brute") cfg.emplace_back("psi", psi);
    cfg.emplace_back("iters", std::to_string(iters));
    cfg.emplace_back("burn", std::to_string(burn));
    cfg.emplace_back("seed", std::to_string(seed));
    if (algo == "brute") cfg.emplace_back("replicates", std::to_string(e_n_replicates));
    if (rw_proposal) {
      cfg.emplace_back("rw-proposal", "true");
      cfg.emplace_back("inner-steps", std::to_string(inner_steps));
      cfg.emplace_back("rw-step", format_g17(rw_step));
    }
    if (paper_literal) cfg.emplace_back("paper-literal-ratio", "true");
    cfg.emplace_back("cap", std::to_string(cap));

    const StoppingRule rule = StoppingRule::negbin(r).with_cap(cap);
    const PriorSpec prior = make_prior_bernoulli(PriorKind::JeffreysFixed);
    TargetComponents target = negbin_target_components(r, n_obs, prior, rule);
    if (rw_proposal) target.propose_exact = nullptr;

    SamplerConfig config;
    config.iterations = iters;
    config.burn_in = burn;
    config.seed = seed;
    config.e_n_replicates = e_n_replicates;
    config.inner_steps = inner_steps;
    config.rw_step = rw_step;
    config.paper_literal_ratio = paper_literal;
    if (psi == "identity") {
      config.psi = Psi::identity();
    } else if (psi == "sqrt") {
      config.psi = Psi::sqrt();
    } else if (psi.rfind("power:", 0) == 0) {
      config.psi = Psi::power(std::stod(psi.substr(6)));
    } else {
      throw DomainError("unknown psi '" + psi + "'");
    }

    Chain chain;
    if (algo == "brute") {
      chain = brute_force_metropolis(target, config);
    } else if (algo == "latent") {
      chain = latent_variable_metropolis(target, config);
    } else if (algo == "sqrt") {
      chain = modified_sqrt_metropolis(target, config);
    } else {
      throw DomainError("unknown algo '" + algo + "'");
    }

    std::string body = "iteration,p,latent_n,accepted\n";
    for (std::size_t i = 0; i < chain.draws.size(); ++i) {
      body += std::to_string(i) + "," + format_g17(chain.draws[i].scalar()) + ",";
      if (!chain.latent_n.empty()) body += format_g17(chain.latent_n[i]);
      body += ",";
      body += chain.accepted[i] ? "1" : "0";
      body += "\n";
    }
    if (chain.capped_count > 0) {
      body += "# warning: " + std::to_string(chain.capped_count) +
              " capped stopping-time simulations (proposals rejected)\n";
    }
    return render_header("sample", std::to_string(seed), cfg) + body;
  }
};

struct CoverageCmd {
  int r = 2;
  double p = 0.1;
  std::string prior_name = "jeffreys-fixed";
  bool all = false;
  std::string method = "exact";
  long long replicates = 100000;
  std::uint64_t seed = 1;
  std::string format = "csv";
  int threads = 1;

  static std::string coverage_row(const CoverageReport& c) {
    const std::string how =
        c.method == CoverageReport::Method::ExactSeries ? "exact-series" : "monte-carlo";
    return std::to_string(c.r) + "," + format_g17(c.p) + "," + to_string(c.prior) + "," +
           format_g17(c.coverage_lower_5) + "," + format_g17(c.coverage_upper_95) + "," + how +
           "," + std::to_string(c.truncation_k) + "," + format_g17(c.tail_bound) + "," +
           std::to_string(c.replicates) + "," + format_g17(c.se) + "\n";
  }

  std::string run() const {
    ConfigEcho cfg;
    std::vector<std::tuple<int, double, PriorKind>> cells;
    if (all) {
      cfg.emplace_back("all", "true");
      for (int rr : {2, 8, 30}) {
        for (double pp : {0.1, 0.5, 0.9}) {
          for (PriorKind kind : {PriorKind::JeffreysFixed, PriorKind::JeffreysSequential,
                                 PriorKind::ApproxSqrtN}) {
            cells.emplace_back(rr, pp, kind);
          }
        }
      }
    } else {
      cfg.emplace_back("r", std::to_string(r));
      cfg.emplace_back("p", format_g17(p));
      cfg.emplace_back("prior", prior_name);
      cells.emplace_back(r, p, prior_by_name(prior_name));
    }
    cfg.emplace_back("method", method);
    if (method == "mc") {
      cfg.emplace_back("replicates", std::to_string(replicates));
      cfg.emplace_back("seed", std::to_string(seed));
    }
    cfg.emplace_back("format", format);

    auto compute = [&](const std::tuple<int, double, PriorKind>& cell) {
      const auto& [cr, cp, ck] = cell;
      if (method == "exact") return table2_cell(cr, cp, ck);
      if (method == "mc") return monte_carlo_coverage(cr, cp, ck, replicates, seed);
      throw DomainError("unknown coverage method '" + method + "'");
    };

    std::vector<CoverageReport> reports(cells.size());
    if (threads > 1 && cells.size() > 1) {
      std::vector<std::future<CoverageReport>> futures;
      futures.reserve(cells.size());
      for (const auto& cell : cells) {
        futures.push_back(std::async(std::launch::async, compute, cell));
      }
      for (std::size_t i = 0; i < futures.size(); ++i) reports[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < cells.size(); ++i) reports[i] = compute(cells[i]);
    }

    const std::string seed_note = method == "mc" ? std::to_string(seed) : "none";
    if (format == "json") {
      nlohmann::ordered_json j;
      j["tool"] = "seqprior";
      j["version"] = kVersion;
      j["subcommand"] = "coverage";
      j["schema_version"] = 1;
      j["seed"] = seed_note;
      nlohmann::ordered_json jcfg;
      for (const auto& [k, v] : cfg) jcfg[k] = v;
      j["config"] = jcfg;
      const CoverageOptions defaults;
      j["metadata"] = {{"tail_tol", defaults.tail_tol},
                       {"max_k", defaults.max_k},
                       {"quadrature_points", defaults.quadrature_points}};
      nlohmann::ordered_json jcells = nlohmann::ordered_json::array();
      for (const auto& c : reports) {
        nlohmann::ordered_json jc;
        jc["r"] = c.r;
        jc["p"] = c.p;
        jc["prior"] = to_string(c.prior);
        jc["coverage_lower_5"] = c.coverage_lower_5;
        jc["coverage_upper_95"] = c.coverage_upper_95;
        jc["method"] =
            c.method == CoverageReport::Method::ExactSeries ? "exact-series" : "monte-carlo";
        jc["truncation_k"] = c.truncation_k;
        jc["tail_bound"] = c.tail_bound;
        jc["replicates"] = c.replicates;
        jc["se"] = c.se;
        jcells.push_back(jc);
      }
      j["cells"] = jcells;
      return j.dump(2) + "\n";
    }
    if (format != "csv") throw DomainError("unknown format '" + format + "'");

    std::string body =
        "r,p,prior,coverage_05,coverage_95,method,truncation_k,tail_bound,replicates,se\n";
    for (const auto& c : reports) body += coverage_row(c);
    return render_header("coverage", seed_note, cfg) + body;
  }
};

struct FiguresCmd {
  std::string which;  // figure1 | figure2 | brownian
  std::string r_list = "1,9";
  std::string p_grid = "0.05:0.95:91";
  int fig2_r = 2;
  long long fig2_n = 5;
  int points = 1024;
  double a = -1.0;
  double b = 1.0;
  std::string theta_grid = "-5:5:101";

  std::string run() const {
    ConfigEcho cfg;
    std::string body;
    if (which == "figure1") {
      cfg.emplace_back("r-list", r_list);
      cfg.emplace_back("p-grid", p_grid);
      std::vector<int> rs;
      std::istringstream is(r_list);
      std::string tok;
      while (std::getline(is, tok, ',')) rs.push_back(std::stoi(tok));
      const auto rows = figure1_data(rs, parse_grid(p_grid));
      body = "r,p,sqrt_of_expected,expected_of_sqrt\n";
      for (const auto& row : rows) {
        body += std::to_string(row.r) + "," + format_g17(row.p) + "," +
                format_g17(row.sqrt_of_expected) + "," + format_g17(row.expected_of_sqrt) + "\n";
      }
    } else if (which == "figure2") {
      cfg.emplace_back("r", std::to_string(fig2_r));
      cfg.emplace_back("n", std::to_string(fig2_n));
      cfg.emplace_back("points", std::to_string(points));
      const Figure2Data data = figure2_data(fig2_r, fig2_n, points);
      body = "p,post_jeffreys,post_ref_seq,post_approx\n";
      for (std::size_t i = 0; i < data.jeffreys.x().size(); ++i) {
        body += format_g17(data.jeffreys.x()[i]) + "," + format_g17(data.jeffreys.density()[i]) +
                "," + format_g17(data.ref_seq.density()[i]) + "," +
                format_g17(data.approx.density()[i]) + "\n";
      }
    } else if (which == "brownian") {
      cfg.emplace_back("a", format_g17(a));
      cfg.emplace_back("b", format_g17(b));
      cfg.emplace_back("theta-grid", theta_grid);
      const auto rows = brownian_prior_curve(a, b, parse_grid(theta_grid));
      body = "theta,expected_t,sqrt_expected_t\n";
      for (const auto& row : rows) {
        body += format_g17(row.theta) + "," + format_g17(row.expected_t) + "," +
                format_g17(row.sqrt_expected_t) + "\n";
      }
    } else {
      throw DomainError("figures: unknown figure '" + which + "'");
    }
    return render_header("figures " + which, "none", cfg) + body;
  }
};

// ---------------------------------------------------------------------------
// Replay: re-run the configuration embedded in an emitted artifact and check
// that the bytes match.

std::string replay_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("replay: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string original = buf.str();

  std::vector<std::string> args;
  if (!original.empty() && original.front() == '{') {
    const auto j = nlohmann::json::parse(original);
    std::istringstream sub(j.at("subcommand").get<std::string>());
    std::string tok;
    while (sub >> tok) args.push_back(tok);
    for (const auto& [k, v] : j.at("config").items()) {
      if (v.get<std::string>() == "true") {
        args.push_back("--" + k);
      } else {
        args.push_back("--" + k + "=" + v.get<std::string>());
      }
    }
  } else {
    std::istringstream lines(original);
    std::string line;
    std::string subcommand;
    bool in_config = false;
    while (std::getline(lines, line)) {
      if (line.rfind("# subcommand: ", 0) == 0) {
        subcommand = line.substr(14);
      } else if (line == "# config-begin") {
        in_config = true;
      } else if (line == "# config-end") {
        break;
      } else if (in_config && line.rfind("# ", 0) == 0) {
        const std::string kv = line.substr(2);
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw DomainError("replay: malformed config line: " + line);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (value == "true") {
          args.push_back("--" + key);
        } else {
          args.push_back("--" + key + "=" + value);
        }
      }
    }
    if (subcommand.empty()) throw DomainError("replay: no subcommand header in '" + path + "'");
    std::istringstream sub(subcommand);
    std::string tok;
    std::vector<std::string> sub_tokens;
    while (sub >> tok) sub_tokens.push_back(tok);
    args.insert(args.begin(), sub_tokens.begin(), sub_tokens.end());
  }

  std::string regenerated;
  const int status = cli_run(args, &regenerated, nullptr);
  if (status != 0) throw NumericError("replay: embedded configuration failed to run");
  if (regenerated != original) {
    throw NumericError("replay: regenerated output differs from '" + path + "'");
  }
  return "replay OK: " + path + " (" + std::to_string(original.size()) + " bytes)\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Objective Bayesian analysis under sequential experimentation"};
  app.set_version_flag("--version", std::string("seqprior ") + kVersion);
  app.set_config("--config", "", "Read options from a key=value config file (flags override)");

  std::string out_path;
  app.add_option("--out", out_path, "Write the artifact to this file instead of stdout");
  std::string replay_path;
  app.add_option("--replay", replay_path, "Verify a previously emitted artifact byte-for-byte");

  StopSimCmd stop_sim;
  auto* stop_sim_cmd = app.add_subcommand("stop-sim", "Simulate stopping times");
  stop_sim.rule.add_options(stop_sim_cmd);
  stop_sim.theta.add_options(stop_sim_cmd);
  stop_sim_cmd->add_option("--model", stop_sim.model_name, "Model for bose-boukai observations")
      ->check(CLI::IsMember({"normal", "invgauss", "gamma", "invgamma"}));
  stop_sim_cmd->add_option("--replicates", stop_sim.replicates, "Number of stopping times");
  stop_sim_cmd->add_option("--seed", stop_sim.seed, "Master seed");

  ExpectedNCmd expected_n;
  auto* expected_n_cmd = app.add_subcommand("expected-n", "E[N] and E[sqrt N]");
  expected_n.rule.add_options(expected_n_cmd);
  expected_n.theta.add_options(expected_n_cmd);
  expected_n_cmd->add_option("--model", expected_n.model_name, "Model for bose-boukai")
      ->check(CLI::IsMember({"normal", "invgauss", "gamma", "invgamma"}));
  expected_n_cmd->add_option("--replicates", expected_n.replicates, "Monte Carlo replicates");
  expected_n_cmd->add_option("--seed", expected_n.seed, "Master seed");
  expected_n_cmd->add_flag("--sqrt", expected_n.with_sqrt, "Also report E[sqrt N]");

  PriorEvalCmd prior_eval;
  auto* prior_eval_cmd = app.add_subcommand("prior-eval", "Tabulate a log-prior over a grid");
  prior_eval_cmd->add_option("--model", prior_eval.model_name, "Model")
      ->check(CLI::IsMember({"bernoulli", "brownian", "normal", "invgauss", "gamma", "invgamma"}));
  prior_eval_cmd->add_option("--prior", prior_eval.prior_name, "Prior construction");
  prior_eval_cmd->add_option("--grid", prior_eval.grid_spec, "Grid lo:hi:count");
  prior_eval_cmd->add_option("--coord", prior_eval.coord,
                             "Grid coordinate for two-parameter models "
                             "(theta1|theta2|familiar1|familiar2)");
  prior_eval_cmd->add_option("--fix", prior_eval.fixed_other, "Value of the other coordinate");
  prior_eval.rule.add_options(prior_eval_cmd);
  auto* rule_opt = prior_eval_cmd->get_option("--rule");
  prior_eval_cmd->callback([&] { prior_eval.with_rule = rule_opt->count() > 0; });
  prior_eval_cmd->add_option("--replicates", prior_eval.replicates,
                             "Monte Carlo replicates for E[N]-backed priors");
  prior_eval_cmd->add_option("--seed", prior_eval.seed, "Master seed");

  SampleCmd sample;
  auto* sample_cmd = app.add_subcommand("sample", "Run a posterior sampler on negbin data");
  sample_cmd->add_option("--algo", sample.algo, "brute | latent | sqrt")
      ->check(CLI::IsMember({"brute", "latent", "sqrt"}));
  sample_cmd->add_option("--rule", sample.rule_name, "Stopping rule generating the data")
      ->check(CLI::IsMember({"negbin"}));
  sample_cmd->add_option("--r", sample.r, "negbin r");
  sample_cmd->add_option("--n", sample.n_obs, "observed stopping time N");
  sample_cmd->add_option("--fixed-prior", sample.fixed_prior, "pi_F (jeffreys-fixed)");
  sample_cmd->add_option("--psi", sample.psi, "identity | sqrt | power:E (brute force)");
  sample_cmd->add_option("--iters", sample.iters, "Total iterations");
  sample_cmd->add_option("--burn", sample.burn, "Burn-in (default 10% of iterations)");
  sample_cmd->add_option("--seed", sample.seed, "Master seed");
  sample_cmd->add_option("--replicates", sample.e_n_replicates,
                         "E[N] replicates per brute-force step");
  sample_cmd->add_option("--inner-steps", sample.inner_steps, "Random-walk steps per proposal");
  sample_cmd->add_option("--rw-step", sample.rw_step, "Random-walk step size");
  sample_cmd->add_flag("--rw-proposal", sample.rw_proposal,
                       "Use the random-walk fallback even when an exact draw exists");
  sample_cmd->add_flag("--paper-literal-ratio", sample.paper_literal,
                       "Displayed acceptance-ratio orientation (comparison runs)");
  sample_cmd->add_option("--cap", sample.cap, "Stopping-time cap");

  CoverageCmd coverage;
  auto* coverage_cmd = app.add_subcommand("coverage", "Frequentist coverage of credible bounds");
  coverage_cmd->add_option("--r", coverage.r, "negbin r");
  coverage_cmd->add_option("--p", coverage.p, "true success probability");
  coverage_cmd->add_option("--prior", coverage.prior_name,
                           "jeffreys-fixed | jeffreys-seq | approx-sqrt");
  coverage_cmd->add_flag("--all", coverage.all, "Full 27-cell grid");
  coverage_cmd->add_option("--method", coverage.method, "exact | mc")
      ->check(CLI::IsMember({"exact", "mc"}));
  coverage_cmd->add_option("--replicates", coverage.replicates, "Monte Carlo replicates");
  coverage_cmd->add_option("--seed", coverage.seed, "Master seed (mc)");
  coverage_cmd->add_option("--format", coverage.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  coverage_cmd->add_option("--threads", coverage.threads, "Parallelism for --all (default 1)");

  FiguresCmd figures;
  auto* figures_cmd = app.add_subcommand("figures", "Figure and curve data");
  auto* fig1 = figures_cmd->add_subcommand("figure1", "sqrt(E[N/r]) vs E[sqrt(N/r)]");
  fig1->add_option("--r-list", figures.r_list, "Comma-separated r values");
  fig1->add_option("--p-grid", figures.p_grid, "Grid lo:hi:count");
  auto* fig2 = figures_cmd->add_subcommand("figure2", "Posterior densities under three priors");
  fig2->add_option("--r", figures.fig2_r, "negbin r");
  fig2->add_option("--n", figures.fig2_n, "observed stopping time N");
  fig2->add_option("--points", figures.points, "Grid points");
  auto* figb = figures_cmd->add_subcommand("brownian", "Ex 2.2 prior curve sqrt(E T_ab)");
  figb->add_option("--a", figures.a, "Lower bound (< 0)");
  figb->add_option("--b", figures.b, "Upper bound (> 0)");
  figb->add_option("--theta-grid", figures.theta_grid, "Grid lo:hi:count");
  figures_cmd->require_subcommand(0, 1);

  // top-level --out / --config / --replay remain usable after a subcommand
  for (CLI::App* sub : {stop_sim_cmd, expected_n_cmd, prior_eval_cmd, sample_cmd, coverage_cmd,
                        figures_cmd, fig1, fig2, figb}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    std::string artifact;
    if (!replay_path.empty()) {
      err << replay_artifact(replay_path);
      return 0;
    } else if (*stop_sim_cmd) {
      artifact = stop_sim.run();
    } else if (*expected_n_cmd) {
      artifact = expected_n.run();
    } else if (*prior_eval_cmd) {
      artifact = prior_eval.run();
    } else if (*sample_cmd) {
      artifact = sample.run();
    } else if (*coverage_cmd) {
      artifact = coverage.run();
    } else if (*figures_cmd) {
      if (fig1->parsed()) {
        figures.which = "figure1";
      } else if (fig2->parsed()) {
        figures.which = "figure2";
      } else if (figb->parsed()) {
        figures.which = "brownian";
      } else {
        err << "error: figures requires one of figure1 | figure2 | brownian\n";
        return 2;
      }
      artifact = figures.run();
    } else {
      err << app.help();
      return 2;
    }

    if (!out_path.empty()) {
      std::ofstream file(out_path, std::ios::binary);
      if (!file) {
        err << "error: cannot write '" << out_path << "'\n";
        return 3;
      }
      file << artifact;
      err << "wrote " << out_path << " (" << artifact.size() << " bytes)\n";
    } else {
      out << artifact;
    }
    return 0;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

int cli_run(const std::vector<std::string>& args, std::string* out_text, std::string* err_text) {
  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("seqprior");
  for (const auto& a : args) argv_store.push_back(a);
  std::vector<const char*> argv;
  argv.reserve(argv_store.size());
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  std::ostringstream out, err;
  const int status = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return status;
}

}  // namespace seqprior
