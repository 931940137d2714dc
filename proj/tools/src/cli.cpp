#include "likratio_cli/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "likratio/csv.hpp"
#include "likratio/errors.hpp"
#include "likratio/experiments.hpp"
#include "likratio/mh_sampler.hpp"
#include "likratio/moments.hpp"
#include "likratio/particle_solver.hpp"
#include "likratio/random.hpp"
#include "likratio/reference_solver.hpp"

namespace likratio::cli {

namespace {

constexpr std::uint64_t kObservationTag = 0x0b5e;

KeySpec opt(std::string name, std::string def, std::string help) {
  return {std::move(name), std::move(help), std::move(def)};
}
KeySpec req(std::string name, std::string help) {
  return {std::move(name), std::move(help), std::nullopt};
}

Schema join(std::initializer_list<Schema> parts) {
  Schema out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

const Schema kGridKeys{
    opt("length", "10", "domain length L"),
    opt("cells", "100", "number of grid cells N"),
    opt("initial", "cosine", "initial density: 'cosine' or a density CSV path"),
};
const Schema kExecKeys{
    opt("threads", "1", "worker threads (never changes output)"),
    opt("chunk_size", "65536", "work items per random substream"),
};
const Schema kSeedKey{req("seed", "master random seed")};

Schema moment_keys() {
  return {
      req("p", "moment order"),
      opt("n", "1", "observation dimension"),
      req("sigma_eta", "observation noise standard deviation"),
      req("sigma_delta1", "solver noise standard deviation at D1"),
      req("sigma_delta2", "solver noise standard deviation at D2"),
      opt("drho1", "0", "exact-model residual at D1 (every component)"),
      opt("drho2", "0", "exact-model residual at D2 (every component)"),
      opt("mu1", "0", "solver noise mean at D1 (every component)"),
      opt("mu2", "0", "solver noise mean at D2 (every component)"),
  };
}

Schema sweep_keys(const char* d_den) {
  return join({kGridKeys,
               {
                   opt("final_time", "10", "observation time t"),
                   opt("d_true", "0.1", "diffusion used to synthesize data"),
                   opt("d_num", "0.1", "numerator diffusion D1"),
                   opt("d_den", d_den, "denominator diffusion D2"),
                   opt("particle_counts", "100,1000,10000,100000,1000000",
                       "particle counts P"),
                   opt("sigma_eta_list", "0.01,0.025,0.05,0.1,0.25,0.5,1",
                       "observation noise levels"),
                   opt("replications", "1000", "replications R per grid point"),
                   opt("reference_dt", "0.1", "reference solver time step"),
                   opt("particle_dt", "10", "particle solver time step"),
                   opt("observation_mode", "fresh", "fresh | fixed"),
                   opt("omission", "paper", "paper | log_space"),
                   opt("shared_forward", "false", "reuse one forward run for both D"),
                   opt("output", "long", "long | figure"),
               },
               kSeedKey, kExecKeys});
}

const std::vector<Subcommand>& registry() {
  static const std::vector<Subcommand> commands{
      {"solve-ref", "Deterministic reference density at time t",
       join({kGridKeys,
             {opt("diffusion", "0.1", "diffusion coefficient D"),
              opt("final_time", "10", "final time t"),
              opt("time_step", "0.1", "Crank-Nicolson time step"),
              opt("method", "cn", "cn | exact")}})},
      {"solve-mc", "Particle forward map with per-cell variances",
       join({kGridKeys,
             {opt("diffusion", "0.1", "diffusion coefficient D"),
              opt("final_time", "10", "final time t"),
              opt("time_step", "10", "Euler-Maruyama time step"),
              opt("particles", "1000", "particle count P"),
              opt("variance", "plug_in", "plug_in | replicates"),
              opt("variance_replicates", "32", "runs for the replicate estimator")},
             kSeedKey, kExecKeys})},
      {"observe", "Reference density plus Gaussian observation noise",
       join({kGridKeys,
             {opt("diffusion", "0.1", "true diffusion coefficient"),
              opt("final_time", "10", "final time t"),
              opt("time_step", "0.1", "Crank-Nicolson time step"),
              req("sigma_eta", "observation noise standard deviation")},
             kSeedKey})},
      {"moment", "Closed-form moment of the approximate likelihood ratio",
       join({moment_keys(), {opt("format", "csv", "csv | text")}})},
      {"moment-mc", "Monte Carlo estimate of the same moment",
       join({moment_keys(),
             {opt("samples", "1000000", "draws"),
              opt("batches", "0", "if positive, report this many batch means of 'samples'")},
             kSeedKey, kExecKeys})},
      {"sweep-likelihood", "Mean approximate likelihoods over P and sigma_eta",
       sweep_keys("0.08")},
      {"sweep-ratio", "Mean likelihood ratio over P and sigma_eta", sweep_keys("0.1")},
      {"sweep-acceptance", "Mean truncated ratio over P and sigma_eta", sweep_keys("0.1")},
      {"mh", "Random-walk Metropolis-Hastings chain over D",
       join({kGridKeys,
             {opt("final_time", "10", "observation time t"),
              opt("d_true", "0.1", "diffusion used to synthesize data"),
              opt("sigma_eta", "0.05", "observation noise standard deviation"),
              opt("reference_dt", "0.1", "reference solver time step"),
              opt("forward", "particle", "exact | reference | particle"),
              opt("particles", "100", "particle count P"),
              opt("particle_dt", "10", "particle solver time step"),
              opt("prior_lower", "0.01", "uniform prior lower bound"),
              opt("prior_upper", "1", "uniform prior upper bound"),
              opt("proposal_std", "0.05", "random-walk step size"),
              opt("chain_length", "1000", "states in the chain"),
              opt("refresh", "refresh_both", "refresh_both | retain_current")},
             kSeedKey, kExecKeys})},
  };
  return commands;
}

PeriodicGrid grid_of(const Settings& s) { return PeriodicGrid(s.real("length"), s.count("cells")); }

InitialCondition initial_of(const Settings& s) {
  const std::string& spec = s.text("initial");
  if (spec == "cosine") return CosineBump{};
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw IoError("cannot read initial density '" + spec + "'");
  return TabulatedDensity(read_density_csv(in, s.real("length")));
}

Execution exec_of(const Settings& s) {
  const auto threads = s.count("threads");
  return Execution{s.count("chunk_size"), static_cast<unsigned>(std::max<std::size_t>(1, threads))};
}

MomentQuery query_of(const Settings& s) {
  const auto p = s.count("p");
  if (p == 0 || p > 1000000) throw InvalidArgument("p must be a positive integer");
  return scalar_query(s.count("n"), static_cast<unsigned>(p), s.real("sigma_eta"),
                      s.real("sigma_delta1"), s.real("sigma_delta2"), s.real("drho1"),
                      s.real("drho2"), s.real("mu1"), s.real("mu2"));
}

void run_solve_ref(const Settings& s, std::ostream& out) {
  const auto grid = grid_of(s);
  const auto ic = initial_of(s);
  const auto& method = s.choice("method", {"cn", "exact"});
  if (method == "exact") {
    write_density_csv(out, exact_solution(ic, s.real("diffusion"), s.real("final_time"), grid));
  } else {
    write_density_csv(out, fd_solve(ic, ReferenceConfig{s.real("diffusion"), s.real("final_time"),
                                                        s.real("time_step"), grid}));
  }
}

void run_solve_mc(const Settings& s, std::ostream& out) {
  ParticleConfig cfg;
  cfg.grid = grid_of(s);
  cfg.particles = s.count("particles");
  cfg.final_time = s.real("final_time");
  cfg.time_step = s.real("time_step");
  cfg.seed = s.integer("seed");
  cfg.variance = s.choice("variance", {"plug_in", "replicates"}) == "plug_in"
                     ? VarianceEstimator::plug_in
                     : VarianceEstimator::replicates;
  cfg.variance_replicates = s.count("variance_replicates");
  cfg.exec = exec_of(s);
  write_forward_csv(out, forward(s.real("diffusion"), cfg, initial_of(s)), cfg.seed);
}

Observation observation_of(const Settings& s, double diffusion, double dt) {
  const auto grid = grid_of(s);
  const double sigma = s.real("sigma_eta");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma_eta must be positive");
  const auto field =
      fd_solve(initial_of(s), ReferenceConfig{diffusion, s.real("final_time"), dt, grid});
  return synthesize_observation(field, CovarianceSpec::scalar_identity(grid.cells(), sigma * sigma),
                                derive_seed(s.integer("seed"), {kObservationTag}));
}

void run_observe(const Settings& s, std::ostream& out) {
  write_density_csv(out, observation_of(s, s.real("diffusion"), s.real("time_step")).field);
}

void run_moment(const Settings& s, std::ostream& out) {
  const auto q = query_of(s);
  const auto result = ratio_moment(q);
  if (s.choice("format", {"csv", "text"}) == "text") {
    out << "exists=" << (result.exists ? "true" : "false") << '\n'
        << "boundary=" << (result.boundary ? "true" : "false") << '\n'
        << "moment="
        << (result.exists ? csv::format_real(std::exp(result.log_moment)) : std::string("inf"))
        << '\n'
        << "log_moment=" << csv::format_real(result.log_moment) << '\n';
    return;
  }
  write_moment_csv_header(out);
  write_moment_csv_row(out, q.order, result);
}

void run_moment_mc(const Settings& s, std::ostream& out) {
  const auto q = query_of(s);
  const auto samples = s.count("samples");
  const auto batches = s.count("batches");
  const auto seed = s.integer("seed");
  if (batches > 0) {
    const auto means = empirical_batch_means(q, batches, samples, seed, exec_of(s));
    out << "batch,mean\n";
    for (std::size_t b = 0; b < means.size(); ++b) {
      out << b << ',' << csv::format_real(means[b]) << '\n';
    }
    return;
  }
  const auto est = empirical_ratio_moment(q, samples, seed, exec_of(s));
  out << "p,estimate,standard_error,samples\n"
      << q.order << ',' << csv::format_real(est.estimate) << ','
      << csv::format_real(est.standard_error) << ',' << est.samples << '\n';
}

void run_sweep_kind(const Settings& s, std::ostream& out, SweepKind kind) {
  SweepConfig cfg;
  cfg.grid = grid_of(s);
  cfg.final_time = s.real("final_time");
  cfg.d_true = s.real("d_true");
  cfg.d_num = s.real("d_num");
  cfg.d_den = s.real("d_den");
  cfg.particle_counts = s.counts("particle_counts");
  cfg.sigma_eta_list = s.reals("sigma_eta_list");
  cfg.replications = s.count("replications");
  cfg.reference_dt = s.real("reference_dt");
  cfg.particle_dt = s.real("particle_dt");
  cfg.seed = s.integer("seed");
  cfg.observation_mode = s.choice("observation_mode", {"fresh", "fixed"}) == "fresh"
                             ? ObservationMode::fresh
                             : ObservationMode::fixed;
  cfg.omission = s.choice("omission", {"paper", "log_space"}) == "paper"
                     ? OmissionPolicy::paper
                     : OmissionPolicy::log_space;
  cfg.shared_forward = s.flag("shared_forward");
  cfg.initial = initial_of(s);
  cfg.exec = exec_of(s);
  const bool figure = s.choice("output", {"long", "figure"}) == "figure";
  const auto records = run_sweep(cfg);
  if (figure) {
    write_figure_csv(records, kind, out);
  } else {
    write_csv(records, out);
  }
}

void run_mh(const Settings& s, std::ostream& out) {
  MHConfig cfg;
  cfg.prior = UniformPrior{s.real("prior_lower"), s.real("prior_upper")};
  cfg.proposal_std = s.real("proposal_std");
  cfg.chain_length = s.count("chain_length");
  cfg.refresh = s.choice("refresh", {"refresh_both", "retain_current"}) == "refresh_both"
                    ? RefreshMode::refresh_both
                    : RefreshMode::retain_current;
  cfg.seed = s.integer("seed");
  Observation obs = observation_of(s, s.real("d_true"), s.real("reference_dt"));
  const auto& kind = s.choice("forward", {"exact", "reference", "particle"});
  if (kind == "exact") {
    cfg.evaluator = exact_evaluator(std::move(obs), initial_of(s), s.real("final_time"));
  } else if (kind == "reference") {
    const ReferenceConfig rc{0.1, s.real("final_time"), s.real("reference_dt"), grid_of(s)};
    cfg.evaluator = reference_evaluator(std::move(obs), initial_of(s), rc);
  } else {
    ParticleConfig pc;
    pc.grid = grid_of(s);
    pc.particles = s.count("particles");
    pc.final_time = s.real("final_time");
    pc.time_step = s.real("particle_dt");
    pc.exec = exec_of(s);
    pc.steps();
    cfg.evaluator = particle_evaluator(std::move(obs), initial_of(s), pc);
  }
  write_chain_csv(out, run_chain(cfg));
}

using Runner = std::function<void(const Settings&, std::ostream&)>;

Runner runner_for(const std::string& name) {
  if (name == "solve-ref") return run_solve_ref;
  if (name == "solve-mc") return run_solve_mc;
  if (name == "observe") return run_observe;
  if (name == "moment") return run_moment;
  if (name == "moment-mc") return run_moment_mc;
  if (name == "sweep-likelihood") {
    return [](const Settings& s, std::ostream& o) { run_sweep_kind(s, o, SweepKind::likelihoods); };
  }
  if (name == "sweep-ratio") {
    return [](const Settings& s, std::ostream& o) { run_sweep_kind(s, o, SweepKind::ratio); };
  }
  if (name == "sweep-acceptance") {
    return [](const Settings& s, std::ostream& o) { run_sweep_kind(s, o, SweepKind::acceptance); };
  }
  return run_mh;
}

void print_usage(std::ostream& os) {
  os << "usage: likratio <subcommand> [--config <path>] [--out <path>] [--key value]...\n\n"
        "subcommands:\n";
  for (const auto& c : registry()) {
    os << "  " << c.name << std::string(c.name.size() < 18 ? 18 - c.name.size() : 1, ' ')
       << c.summary << '\n';
  }
  os << "\nRun 'likratio <subcommand> --help' for its keys.\n";
}

void print_help(std::ostream& os, const Subcommand& c) {
  os << "usage: likratio " << c.name
     << " [--config <path>] [--out <path>] [--key value]...\n\n"
     << c.summary << "\n\nkeys (config file 'key = value' or --key value):\n";
  for (const auto& k : c.schema) {
    os << "  " << k.name << std::string(k.name.size() < 22 ? 22 - k.name.size() : 1, ' ')
       << k.help;
    if (k.default_value) {
      os << " [default: " << *k.default_value << "]";
    } else {
      os << " [required]";
    }
    os << '\n';
  }
}

}  // namespace

const std::vector<Subcommand>& subcommands() { return registry(); }

int parse_and_dispatch(std::span<const std::string> args, std::ostream& out,
                       std::ostream& err) {
  if (args.empty()) {
    print_usage(err);
    return 2;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    print_usage(out);
    return 0;
  }
  const auto& commands = registry();
  const auto it = std::find_if(commands.begin(), commands.end(),
                               [&](const Subcommand& c) { return c.name == args[0]; });
  if (it == commands.end()) {
    err << "error: unknown subcommand '" << args[0] << "'\n\n";
    print_usage(err);
    return 2;
  }

  try {
    RawValues file_values, overrides;
    std::optional<std::string> out_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a == "--help" || a == "-h") {
        print_help(out, *it);
        return 0;
      }
      if (a.size() < 3 || a.compare(0, 2, "--") != 0) {
        throw ConfigError("unexpected argument '" + a + "'");
      }
      std::string key = a.substr(2);
      std::string value;
      if (const auto eq = key.find('='); eq != std::string::npos) {
        value = key.substr(eq + 1);
        key = key.substr(0, eq);
      } else {
        if (i + 1 >= args.size()) throw ConfigError("flag '--" + key + "' needs a value");
        value = args[++i];
      }
      key = normalize_key(key);
      if (key == "config") {
        for (auto& [k, v] : load_config_file(value)) file_values[k] = v;
      } else if (key == "out") {
        out_path = value;
      } else {
        overrides[key] = value;
      }
    }
    const Settings settings = resolve(it->schema, file_values, overrides);

    std::ostringstream buffer;
    runner_for(it->name)(settings, buffer);
    if (out_path) {
      std::ofstream file(*out_path, std::ios::binary);
      if (!file) throw IoError("cannot open '" + *out_path + "' for writing");
      file << buffer.str();
      file.flush();
      if (!file) throw IoError("failed writing '" + *out_path + "'");
    } else {
      out << buffer.str();
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out,
                       std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_and_dispatch(args, out, err);
}

}  // namespace likratio::cli
