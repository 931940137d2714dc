#include "likratio/mh_sampler.hpp"

#include <cmath>
#include <ostream>
#include <utility>

#include "likratio/csv.hpp"
#include "likratio/errors.hpp"
#include "likratio/random.hpp"

namespace likratio {

namespace {

constexpr std::uint64_t kStepTag = 0x57e9;
constexpr std::uint64_t kProposalTag = 0x9a0f;
constexpr std::uint64_t kCurrentTag = 0xc0de;
constexpr std::uint64_t kInitialTag = 0x1a17;

}  // namespace

LikelihoodEvaluator exact_evaluator(Observation obs, InitialCondition ic, double final_time) {
  return [obs = std::move(obs), ic = std::move(ic), final_time](double d, std::uint64_t) {
    const auto model = exact_solution(ic, d, final_time, obs.field.grid());
    return log_likelihood(obs, model, obs.noise);
  };
}

LikelihoodEvaluator reference_evaluator(Observation obs, InitialCondition ic,
                                        ReferenceConfig cfg) {
  return [obs = std::move(obs), ic = std::move(ic), cfg](double d, std::uint64_t) {
    ReferenceConfig c = cfg;
    c.diffusion = d;
    return log_likelihood(obs, fd_solve(ic, c), obs.noise);
  };
}

LikelihoodEvaluator particle_evaluator(Observation obs, InitialCondition ic,
                                       ParticleConfig cfg) {
  return [obs = std::move(obs), ic = std::move(ic), cfg](double d, std::uint64_t seed) {
    ParticleConfig c = cfg;
    c.seed = seed;
    return log_likelihood(obs, forward(d, c, ic).field, obs.noise);
  };
}

void MHConfig::validate() const {
  if (!(prior.lower > 0.0) || !(prior.lower < prior.upper) || !std::isfinite(prior.upper)) {
    throw InvalidArgument("prior must satisfy 0 < lower < upper < inf");
  }
  if (!(proposal_std > 0.0) || !std::isfinite(proposal_std)) {
    throw InvalidArgument("proposal_std must be positive and finite");
  }
  if (chain_length == 0) throw InvalidArgument("chain_length must be positive");
  if (!evaluator) throw InvalidArgument("MH chain needs a likelihood evaluator");
}

StepResult mh_step(const ChainState& state, const MHConfig& cfg) {
  if (!cfg.prior.contains(state.diffusion)) {
    throw InvalidArgument("chain state lies outside the prior support");
  }
  RandomStream rng(derive_seed(cfg.seed, {kStepTag}), state.step);
  const double proposal = state.diffusion + cfg.proposal_std * rng.normal();
  const double u = rng.uniform();

  StepResult out{state, false, std::nullopt};
  out.state.step = state.step + 1;
  if (!cfg.prior.contains(proposal)) return out;

  const LogLikelihood proposed = cfg.evaluator(
      proposal, derive_seed(cfg.seed, {kProposalTag, state.step}));
  const LogLikelihood current =
      cfg.refresh == RefreshMode::refresh_both
          ? cfg.evaluator(state.diffusion, derive_seed(cfg.seed, {kCurrentTag, state.step}))
          : state.log_lik;
  out.sample = log_ratio(proposed, current);
  out.accepted = u < out.sample->truncated;
  if (out.accepted) {
    out.state.diffusion = proposal;
    out.state.log_lik = proposed;
    ++out.state.accept_count;
  } else {
    out.state.log_lik = current;
  }
  return out;
}

ChainState initial_state(const MHConfig& cfg) {
  cfg.validate();
  RandomStream rng(derive_seed(cfg.seed, {kInitialTag}), 0);
  ChainState s;
  s.diffusion = cfg.prior.lower + (cfg.prior.upper - cfg.prior.lower) * rng.uniform();
  s.log_lik = cfg.evaluator(s.diffusion, derive_seed(cfg.seed, {kInitialTag, 1}));
  return s;
}

std::vector<double> ChainResult::samples() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.diffusion);
  return out;
}

ChainResult run_chain(const MHConfig& cfg) {
  ChainState state = initial_state(cfg);
  ChainResult result;
  result.records.reserve(cfg.chain_length);
  result.records.push_back({0, state.diffusion, state.log_lik.value, false});
  for (std::size_t i = 1; i < cfg.chain_length; ++i) {
    StepResult step = mh_step(state, cfg);
    state = std::move(step.state);
    result.records.push_back({state.step, state.diffusion, state.log_lik.value, step.accepted});
  }
  if (cfg.chain_length > 1) {
    result.acceptance_rate = static_cast<double>(state.accept_count) /
                             static_cast<double>(cfg.chain_length - 1);
  }
  return result;
}

void write_chain_csv(std::ostream& out, const ChainResult& chain) {
  out << "step,D,log_lik,accepted\n";
  for (const auto& r : chain.records) {
    out << r.step << ',' << csv::format_real(r.diffusion) << ','
        << csv::format_real(r.log_lik) << ',' << (r.accepted ? 1 : 0) << '\n';
  }
  out << "# acceptance_rate="
      << (chain.acceptance_rate ? csv::format_real(*chain.acceptance_rate) : std::string{})
      << '\n';
}

}  // namespace likratio
