#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "likratio/likelihood.hpp"
#include "likratio/observation.hpp"
#include "likratio/particle_solver.hpp"
#include "likratio/reference_solver.hpp"

namespace likratio {

/// Log-likelihood of the chain's observation at diffusion D. The seed is
/// ignored by deterministic evaluators.
using LikelihoodEvaluator = std::function<LogLikelihood(double diffusion, std::uint64_t seed)>;

/// Closed-form (or spectral) solution at `final_time`.
LikelihoodEvaluator exact_evaluator(Observation obs, InitialCondition ic, double final_time);
/// Crank-Nicolson reference; cfg.diffusion is replaced per call.
LikelihoodEvaluator reference_evaluator(Observation obs, InitialCondition ic,
                                        ReferenceConfig cfg);
/// Particle forward map; cfg.seed is replaced by the per-call seed.
LikelihoodEvaluator particle_evaluator(Observation obs, InitialCondition ic,
                                       ParticleConfig cfg);

struct UniformPrior {
  double lower = 0.01;
  double upper = 1.0;

  bool contains(double d) const noexcept { return d >= lower && d <= upper; }
};

enum class RefreshMode {
  refresh_both,    ///< re-simulate current and proposed states every step
  retain_current,  ///< keep the accepted estimate (pseudo-marginal)
};

struct MHConfig {
  UniformPrior prior{};
  double proposal_std = 0.05;
  std::size_t chain_length = 1000;
  RefreshMode refresh = RefreshMode::refresh_both;
  std::uint64_t seed = 0;
  LikelihoodEvaluator evaluator;

  void validate() const;
};

struct ChainState {
  double diffusion = 0.0;
  LogLikelihood log_lik;
  std::size_t step = 0;
  std::size_t accept_count = 0;
};

struct StepResult {
  ChainState state;
  bool accepted = false;
  /// Absent when the proposal left the prior support.
  std::optional<RatioSample> sample;
};

/// One random-walk transition. Randomness is keyed by (seed, state.step),
/// so a chain is reproducible step by step.
StepResult mh_step(const ChainState& state, const MHConfig& cfg);

/// Starting state: D uniform on the prior support, likelihood evaluated once.
ChainState initial_state(const MHConfig& cfg);

struct ChainRecord {
  std::size_t step = 0;
  double diffusion = 0.0;
  double log_lik = 0.0;
  bool accepted = false;
};

struct ChainResult {
  /// chain_length states; record 0 is the prior draw.
  std::vector<ChainRecord> records;
  /// accepted / transitions; empty for a single-state chain.
  std::optional<double> acceptance_rate;

  std::vector<double> samples() const;
};

ChainResult run_chain(const MHConfig& cfg);

/// `step,D,log_lik,accepted` rows, then `# acceptance_rate=<value>`.
void write_chain_csv(std::ostream& out, const ChainResult& chain);

}  // namespace likratio
