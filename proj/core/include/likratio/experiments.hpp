#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "likratio/grid.hpp"
#include "likratio/likelihood.hpp"
#include "likratio/parallel.hpp"
#include "likratio/reference_solver.hpp"

namespace likratio {

enum class ObservationMode {
  fresh,  ///< new observation noise in every replication
  fixed,  ///< one noise draw reused everywhere; expectation over solver noise only
};

enum class OmissionPolicy {
  paper,      ///< drop samples whose direct likelihoods both underflow
  log_space,  ///< keep every sample; all aggregates are formed in log space
};

enum class SweepKind { likelihoods, ratio, acceptance };

struct SweepConfig {
  PeriodicGrid grid{10.0, 100};
  double final_time = 10.0;
  double d_true = 0.1;
  double d_num = 0.1;
  double d_den = 0.08;
  std::vector<std::size_t> particle_counts{100, 1000, 10000, 100000, 1000000};
  std::vector<double> sigma_eta_list{0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0};
  std::size_t replications = 1000;
  double reference_dt = 0.1;
  double particle_dt = 10.0;
  std::uint64_t seed = 0;
  ObservationMode observation_mode = ObservationMode::fresh;
  OmissionPolicy omission = OmissionPolicy::paper;
  /// Numerator and denominator reuse one forward run (requires d_num == d_den).
  bool shared_forward = false;
  InitialCondition initial = CosineBump{};
  /// threads parallelize over replications; chunk_size is passed to the
  /// particle solver.
  Execution exec{};

  void validate() const;
};

struct ReplicationResult {
  RatioSample sample;
  /// sigma_delta of the denominator's forward run.
  double sigma_delta = 0.0;
};

/// Synthetic data from the finite-difference reference at d_true.
DensityField sweep_reference(const SweepConfig& cfg);

/// The observation used by replication `replication` of cell
/// (sigma_index, count_index); in fixed mode the same noise draw everywhere.
Observation sweep_observation(const SweepConfig& cfg, const DensityField& reference,
                              std::size_t sigma_index, std::size_t count_index,
                              std::size_t replication);

/// One observation and one independent forward run per diffusion value.
/// Seeds derive from (seed, sigma index, count index, replication).
ReplicationResult run_replication(const SweepConfig& cfg, const DensityField& reference,
                                  std::size_t sigma_index, std::size_t count_index,
                                  std::size_t replication);
ReplicationResult run_replication(const SweepConfig& cfg, std::size_t sigma_index,
                                  std::size_t count_index, std::size_t replication);

/// All cfg.replications results for one (sigma, P) cell, in index order.
std::vector<ReplicationResult> run_replications(const SweepConfig& cfg,
                                                const DensityField& reference,
                                                std::size_t sigma_index,
                                                std::size_t count_index);

struct SweepRecord {
  double sigma_eta = 0.0;
  std::size_t particle_count = 0;
  /// Mean sigma_delta over all replications (the abscissa of every figure,
  /// so it is reported even when no sample survives omission).
  double sigma_delta_mean = 0.0;
  /// log of the mean direct likelihood.
  std::optional<double> mean_lik_num_log;
  std::optional<double> mean_lik_den_log;
  /// Mean of ratios; +inf once any kept sample overflowed.
  std::optional<double> mean_ratio;
  std::optional<double> mean_truncated;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  std::size_t n_overflow = 0;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

SweepRecord aggregate(double sigma_eta, std::size_t particle_count,
                      std::span<const ReplicationResult> results, OmissionPolicy policy);

/// Every (sigma_eta, particle_count) pair, sorted by sigma_eta then count.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

/// Long-format CSV, header
/// `sigma_eta,particle_count,sigma_delta_mean,mean_lik_num_log,mean_lik_den_log,mean_ratio,mean_truncated,n_valid,n_invalid,n_overflow`.
void write_csv(std::span<const SweepRecord> records, std::ostream& out);
void write_csv(std::span<const SweepRecord> records, const std::filesystem::path& path);
std::vector<SweepRecord> read_csv(std::istream& in);

/// Per-figure selection: the columns one figure plots, omitted points dropped.
void write_figure_csv(std::span<const SweepRecord> records, SweepKind kind,
                      std::ostream& out);

}  // namespace likratio
