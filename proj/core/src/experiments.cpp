#include "likratio/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <tuple>

#include "likratio/csv.hpp"
#include "likratio/errors.hpp"
#include "likratio/particle_solver.hpp"
#include "likratio/random.hpp"

namespace likratio {

namespace {

constexpr std::uint64_t kObservationTag = 0x0b5e;
constexpr std::uint64_t kNumeratorTag = 0x17e1;
constexpr std::uint64_t kDenominatorTag = 0xde17;

constexpr const char* kHeader =
    "sigma_eta,particle_count,sigma_delta_mean,mean_lik_num_log,mean_lik_den_log,"
    "mean_ratio,mean_truncated,n_valid,n_invalid,n_overflow";

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

double log_mean_exp(const std::vector<double>& logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  if (std::isinf(top)) return top;
  double sum = 0.0;
  for (double v : logs) sum += std::exp(v - top);
  return top + std::log(sum) - std::log(static_cast<double>(logs.size()));
}

std::string optional_field(const std::optional<double>& v) {
  return v ? csv::format_real(*v) : std::string{};
}

std::optional<double> parse_optional(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return csv::parse_real(field);
}

}  // namespace

void SweepConfig::validate() const {
  require_positive(final_time, "final time");
  require_positive(d_true, "d_true");
  require_positive(d_num, "d_num");
  require_positive(d_den, "d_den");
  require_positive(reference_dt, "reference time step");
  require_positive(particle_dt, "particle time step");
  if (particle_counts.empty()) throw InvalidArgument("particle_counts must not be empty");
  if (sigma_eta_list.empty()) throw InvalidArgument("sigma_eta_list must not be empty");
  for (auto p : particle_counts) {
    if (p == 0) throw InvalidArgument("particle counts must be positive");
  }
  for (double s : sigma_eta_list) require_positive(s, "sigma_eta");
  if (replications == 0) throw InvalidArgument("replications must be positive");
  if (exec.chunk_size == 0) throw InvalidArgument("chunk size must be positive");
  if (shared_forward && d_num != d_den) {
    throw InvalidArgument("shared_forward requires d_num == d_den");
  }
  step_count(final_time, reference_dt);
  step_count(final_time, particle_dt);
}

DensityField sweep_reference(const SweepConfig& cfg) {
  return fd_solve(cfg.initial,
                  ReferenceConfig{cfg.d_true, cfg.final_time, cfg.reference_dt, cfg.grid});
}

Observation sweep_observation(const SweepConfig& cfg, const DensityField& reference,
                              std::size_t sigma_index, std::size_t count_index,
                              std::size_t replication) {
  if (sigma_index >= cfg.sigma_eta_list.size() ||
      count_index >= cfg.particle_counts.size()) {
    throw InvalidArgument("sweep index out of range");
  }
  const double sigma_eta = cfg.sigma_eta_list[sigma_index];
  const auto noise = CovarianceSpec::scalar_identity(cfg.grid.cells(), sigma_eta * sigma_eta);
  const std::uint64_t seed =
      cfg.observation_mode == ObservationMode::fixed
          ? derive_seed(cfg.seed, {kObservationTag})
          : derive_seed(cfg.seed, {kObservationTag, sigma_index, count_index, replication});
  return synthesize_observation(reference, noise, seed);
}

ReplicationResult run_replication(const SweepConfig& cfg, const DensityField& reference,
                                  std::size_t sigma_index, std::size_t count_index,
                                  std::size_t replication) {
  const Observation obs =
      sweep_observation(cfg, reference, sigma_index, count_index, replication);
  const CovarianceSpec& noise = obs.noise;

  ParticleConfig pc;
  pc.particles = cfg.particle_counts[count_index];
  pc.final_time = cfg.final_time;
  pc.time_step = cfg.particle_dt;
  pc.grid = cfg.grid;
  pc.exec = Execution{cfg.exec.chunk_size, 1};

  pc.seed = derive_seed(cfg.seed, {kNumeratorTag, sigma_index, count_index, replication});
  const ForwardOutput num = forward(cfg.d_num, pc, cfg.initial);
  const LogLikelihood lik_num = log_likelihood(obs, num.field, noise);
  if (cfg.shared_forward) {
    return ReplicationResult{log_ratio(lik_num, lik_num), num.sigma_delta};
  }

  pc.seed = derive_seed(cfg.seed, {kDenominatorTag, sigma_index, count_index, replication});
  const ForwardOutput den = forward(cfg.d_den, pc, cfg.initial);
  const LogLikelihood lik_den = log_likelihood(obs, den.field, noise);
  return ReplicationResult{log_ratio(lik_num, lik_den), den.sigma_delta};
}

ReplicationResult run_replication(const SweepConfig& cfg, std::size_t sigma_index,
                                  std::size_t count_index, std::size_t replication) {
  cfg.validate();
  return run_replication(cfg, sweep_reference(cfg), sigma_index, count_index, replication);
}

std::vector<ReplicationResult> run_replications(const SweepConfig& cfg,
                                                const DensityField& reference,
                                                std::size_t sigma_index,
                                                std::size_t count_index) {
  std::vector<ReplicationResult> out(cfg.replications);
  parallel_for(cfg.replications, cfg.exec.threads, [&](std::size_t r) {
    out[r] = run_replication(cfg, reference, sigma_index, count_index, r);
  });
  return out;
}

SweepRecord aggregate(double sigma_eta, std::size_t particle_count,
                      std::span<const ReplicationResult> results, OmissionPolicy policy) {
  SweepRecord rec;
  rec.sigma_eta = sigma_eta;
  rec.particle_count = particle_count;
  if (results.empty()) return rec;

  double sigma_sum = 0.0;
  for (const auto& r : results) sigma_sum += r.sigma_delta;
  rec.sigma_delta_mean = sigma_sum / static_cast<double>(results.size());

  std::vector<double> lik_num, lik_den;
  double ratio_sum = 0.0;
  double truncated_sum = 0.0;
  for (const auto& r : results) {
    if (policy == OmissionPolicy::paper && r.sample.invalid_in_paper_convention) {
      ++rec.n_invalid;
      continue;
    }
    ++rec.n_valid;
    lik_num.push_back(r.sample.numerator.value);
    lik_den.push_back(r.sample.denominator.value);
    if (r.sample.overflowed()) ++rec.n_overflow;
    ratio_sum += r.sample.ratio;  // +inf is absorbing
    truncated_sum += r.sample.truncated;
  }
  if (rec.n_valid == 0) return rec;

  const auto n = static_cast<double>(rec.n_valid);
  rec.mean_lik_num_log = log_mean_exp(lik_num);
  rec.mean_lik_den_log = log_mean_exp(lik_den);
  rec.mean_ratio = rec.n_overflow > 0 ? std::numeric_limits<double>::infinity()
                                      : ratio_sum / n;
  rec.mean_truncated = truncated_sum / n;
  return rec;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const DensityField reference = sweep_reference(cfg);
  std::vector<SweepRecord> records;
  for (std::size_t si = 0; si < cfg.sigma_eta_list.size(); ++si) {
    for (std::size_t ci = 0; ci < cfg.particle_counts.size(); ++ci) {
      const auto results = run_replications(cfg, reference, si, ci);
      records.push_back(aggregate(cfg.sigma_eta_list[si], cfg.particle_counts[ci], results,
                                  cfg.omission));
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.sigma_eta, a.particle_count) < std::tie(b.sigma_eta, b.particle_count);
  });
  return records;
}

void write_csv(std::span<const SweepRecord> records, std::ostream& out) {
  std::vector<SweepRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.sigma_eta, a.particle_count) < std::tie(b.sigma_eta, b.particle_count);
  });
  out << kHeader << '\n';
  for (const auto& r : sorted) {
    out << csv::format_real(r.sigma_eta) << ',' << r.particle_count << ','
        << csv::format_real(r.sigma_delta_mean) << ',' << optional_field(r.mean_lik_num_log)
        << ',' << optional_field(r.mean_lik_den_log) << ',' << optional_field(r.mean_ratio)
        << ',' << optional_field(r.mean_truncated) << ',' << r.n_valid << ','
        << r.n_invalid << ',' << r.n_overflow << '\n';
  }
}

void write_csv(std::span<const SweepRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw InvalidArgument("no sweep records to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(records, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<SweepRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw IoError("sweep CSV has an unexpected header");
  }
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 10) throw IoError("sweep CSV row must have 10 fields: " + line);
    SweepRecord r;
    r.sigma_eta = csv::parse_real(f[0]);
    r.particle_count = std::stoull(f[1]);
    r.sigma_delta_mean = csv::parse_real(f[2]);
    r.mean_lik_num_log = parse_optional(f[3]);
    r.mean_lik_den_log = parse_optional(f[4]);
    r.mean_ratio = parse_optional(f[5]);
    r.mean_truncated = parse_optional(f[6]);
    r.n_valid = std::stoull(f[7]);
    r.n_invalid = std::stoull(f[8]);
    r.n_overflow = std::stoull(f[9]);
    out.push_back(r);
  }
  return out;
}

void write_figure_csv(std::span<const SweepRecord> records, SweepKind kind,
                      std::ostream& out) {
  switch (kind) {
    case SweepKind::likelihoods:
      out << "sigma_eta,sigma_delta,mean_lik_num_log,mean_lik_den_log,log_ratio_of_means\n";
      break;
    case SweepKind::ratio:
      out << "sigma_eta,sigma_delta,mean_ratio\n";
      break;
    case SweepKind::acceptance:
      out << "sigma_eta,sigma_delta,mean_truncated\n";
      break;
  }
  for (const auto& r : records) {
    if (r.n_valid == 0) continue;
    out << csv::format_real(r.sigma_eta) << ',' << csv::format_real(r.sigma_delta_mean)
        << ',';
    switch (kind) {
      case SweepKind::likelihoods:
        out << csv::format_real(*r.mean_lik_num_log) << ','
            << csv::format_real(*r.mean_lik_den_log) << ','
            << csv::format_real(*r.mean_lik_num_log - *r.mean_lik_den_log);
        break;
      case SweepKind::ratio:
        out << csv::format_real(*r.mean_ratio);
        break;
      case SweepKind::acceptance:
        out << csv::format_real(*r.mean_truncated);
        break;
    }
    out << '\n';
  }
}

}  // namespace likratio
