#include "mz/cli.hpp"
#include "mz/parallel.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace mz::cli {

namespace {

namespace fs = std::filesystem;

const std::map<std::string, Subcommand>& subcommands() {
  static const std::map<std::string, Subcommand> table{
      {"ergodicity", Subcommand::ergodicity}, {"truth", Subcommand::truth},
      {"tmodel", Subcommand::tmodel},         {"calibrate", Subcommand::calibrate},
      {"noise-sim", Subcommand::noise_sim},   {"histogram", Subcommand::histogram},
      {"all", Subcommand::all}};
  return table;
}

struct App {
  CLI::App app{"Noise quantification for an underresolved Hamiltonian heat-bath model",
               "mzlab"};
  std::string subcommand;
  std::string config;
  std::string out = "results";
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* samples_opt = nullptr;

  App() {
    std::vector<std::string> names;
    for (const auto& [name, cmd] : subcommands()) names.push_back(name);
    app.add_option("subcommand", subcommand,
                   "ergodicity | truth | tmodel | calibrate | noise-sim | histogram | all")
        ->required()
        ->check(CLI::IsMember(names));
    app.add_option("--config", config, "key = value config file (defaults if omitted)");
    app.add_option("--out", out, "output directory")->capture_default_str();
    seed_opt = app.add_option("--seed", seed, "master seed override");
    samples_opt = app.add_option("--samples", samples, "ensemble size override")
                      ->check(CLI::PositiveNumber);
  }
};

class Files {
 public:
  Files(fs::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {}

  template <class Writer>
  void write(const std::string& name, Writer&& writer) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
    fmt::print(log_, "  wrote {}\n", path.string());
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
  std::ostream& log_;
};

class Summary {
 public:
  void add(const std::string& key, double value) {
    items_.push_back(fmt::format("{}={:.9g}", key, value));
  }
  void add(const std::string& key, std::size_t value) {
    items_.push_back(fmt::format("{}={}", key, value));
  }
  std::string line() const { return fmt::format("{}\n", fmt::join(items_, " ")); }

 private:
  std::vector<std::string> items_;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

NoiseFit read_fit(const Files& files) {
  std::ifstream fit_in(files.path("fit.json"));
  if (!fit_in) throw std::runtime_error("cannot read " + files.path("fit.json").string());
  NoiseFit fit = read_fit_json(fit_in);
  std::ifstream hist_in(files.path("log_a_hist.csv"));
  if (!hist_in) throw std::runtime_error("cannot read " + files.path("log_a_hist.csv").string());
  fit.log_a_hist = read_histogram_csv(hist_in);
  fit.validate();
  return fit;
}

class Runner {
 public:
  Runner(ExperimentConfig cfg, const fs::path& out_dir, std::ostream& log)
      : cfg_(std::move(cfg)), files_(out_dir, log), log_(log) {}

  void calibrate() {
    Stopwatch clock;
    fmt::print(log_, "calibrate: {} invariant-density trajectories\n", cfg_.n_samples);
    const auto cal = calibrate_noise(cfg_);
    files_.write("covariance.csv", [&](std::ostream& o) { write_covariance_csv(o, cal.curve); });
    files_.write("persistence.csv",
                 [&](std::ostream& o) { write_persistence_csv(o, cal.persistence); });
    files_.write("log_a_hist.csv",
                 [&](std::ostream& o) { write_histogram_csv(o, cal.fit.log_a_hist); });
    files_.write("fit.json", [&](std::ostream& o) { write_fit_json(o, cal.fit); });
    fmt::print(log_,
               "calibrate: acceptance rate {:.4f}, {} of {} persistence samples clipped, "
               "tau0 {:.4f}{} ({:.1f}s)\n",
               cal.rejection.acceptance_rate(), cal.n_clipped, cal.persistence.size(),
               cal.fit.tau0, cal.fit.tau0_crossed ? "" : " (no zero crossing)",
               clock.seconds());
    summary_.add("C0", cal.curve.c.front());
    summary_.add("Cstar_end", cal.curve.c_star.back());
    summary_.add("A", cal.a_mean);
    summary_.add("beta0", cal.fit.beta0);
    summary_.add("d", cal.fit.d);
  }

  // Downstream stages always use the fit as persisted on disk, so a
  // standalone noise-sim reproduces what `all` computes.
  const NoiseFit& fit() {
    if (!fit_) {
      if (!fs::exists(files_.path("fit.json")) || !fs::exists(files_.path("log_a_hist.csv"))) {
        fmt::print(log_, "no fit in output directory; calibrating first\n");
        calibrate();
      }
      fit_ = read_fit(files_);
    }
    return *fit_;
  }

  void ergodicity() {
    Stopwatch clock;
    const auto trace = run_ergodicity_trace(cfg_);
    files_.write("ergodicity.csv", [&](std::ostream& o) { write_ergodicity_csv(o, trace); });
    fmt::print(log_, "ergodicity: energy drift {:.3g}, min q^2+p^2 {:.4f} ({:.1f}s)\n",
               trace.max_relative_energy_drift, trace.min_radius_squared(), clock.seconds());
    summary_.add("energy_drift", trace.max_relative_energy_drift);
    summary_.add("min_r2", trace.min_radius_squared());
  }

  const TruthRun& truth() {
    if (!truth_) {
      Stopwatch clock;
      truth_ = run_truth_expectations(cfg_);
      files_.write("truth.csv", [&](std::ostream& o) { write_ensemble_csv(o, truth_->result); });
      fmt::print(log_, "truth: {} trajectories, energy drift {:.3g} ({:.1f}s)\n",
                 truth_->result.n_samples, truth_->max_relative_energy_drift, clock.seconds());
    }
    return *truth_;
  }

  const ReducedTrajectory& tmodel() {
    if (!tmodel_) {
      tmodel_ = run_tmodel(cfg_);
      files_.write("tmodel.csv", [&](std::ostream& o) { write_reduced_csv(o, *tmodel_); });
    }
    return *tmodel_;
  }

  const NoiseRun& noise() {
    if (!noise_) {
      const auto& f = fit();
      Stopwatch clock;
      noise_ = run_noise_model_ensemble(cfg_, f);
      files_.write("noise.csv", [&](std::ostream& o) { write_ensemble_csv(o, noise_->result); });
      fmt::print(log_, "noise-sim: {} paths kept, {} diverged ({:.1f}s)\n",
                 noise_->result.n_samples, noise_->result.n_divergent, clock.seconds());
    }
    return *noise_;
  }

  void noise_sim() {
    const auto& t = truth();
    const auto& tm = tmodel();
    const auto& nz = noise();
    files_.write("expectations.csv", [&](std::ostream& o) {
      write_expectations_csv(o, t.result, tm, nz.result);
    });
    summary_.add("l2_noise", l2_distance(nz.result.mean_q, t.result.mean_q, cfg_.dt_full));
    summary_.add("l2_tmodel", l2_distance(tm.q, t.result.mean_q, cfg_.dt_full));
    summary_.add("n_divergent", nz.result.n_divergent);
  }

  void histogram() {
    const auto& t = truth();
    const auto& nz = noise();
    const auto cmp = histogram_compare(t.q_at_hist, nz.q_at_hist, cfg_.histogram_bins);
    files_.write("q_hist.csv", [&](std::ostream& o) { write_q_hist_csv(o, cmp); });
    summary_.add("ks", cmp.ks_distance);
    summary_.add("ks_baseline", split_half_ks(t.q_at_hist));
  }

  void tmodel_only() {
    const auto& tm = tmodel();
    summary_.add("Q_end", tm.q.back());
    summary_.add("H_hat_end", tm.energy.back());
  }

  void truth_only() {
    const auto& t = truth();
    summary_.add("mean_q_end", t.result.mean_q.back());
    summary_.add("energy_drift", t.max_relative_energy_drift);
  }

  const Summary& summary() const { return summary_; }

 private:
  ExperimentConfig cfg_;
  Files files_;
  std::ostream& log_;
  Summary summary_;
  std::optional<NoiseFit> fit_;
  std::optional<TruthRun> truth_;
  std::optional<ReducedTrajectory> tmodel_;
  std::optional<NoiseRun> noise_;
};

}  // namespace

std::string to_string(Subcommand cmd) {
  for (const auto& [name, value] : subcommands()) {
    if (value == cmd) return name;
  }
  return "?";
}

CliInvocation parse_args(const std::vector<std::string>& args) {
  App a;
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    a.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(a.app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), a.app.help());
  }
  CliInvocation inv;
  inv.subcommand = subcommands().at(a.subcommand);
  if (!a.config.empty()) inv.config_path = a.config;
  inv.out_dir = a.out;
  if (a.seed_opt->count() > 0) inv.seed_override = a.seed;
  if (a.samples_opt->count() > 0) inv.samples_override = a.samples;
  return inv;
}

int run(const CliInvocation& inv, std::ostream& out, std::ostream& log) {
  try {
    ExperimentConfig cfg = inv.config_path ? load_config(*inv.config_path) : ExperimentConfig{};
    if (inv.seed_override) cfg.seed = *inv.seed_override;
    if (inv.samples_override) cfg.n_samples = *inv.samples_override;
    cfg.validate();
    fs::create_directories(inv.out_dir);

    fmt::print(log, "mzlab {}: seed {}, {} samples, {} worker(s), output {}\n",
               to_string(inv.subcommand), cfg.seed, cfg.n_samples, worker_count(),
               inv.out_dir.string());
    Runner runner(cfg, inv.out_dir, log);
    switch (inv.subcommand) {
      case Subcommand::ergodicity: runner.ergodicity(); break;
      case Subcommand::truth: runner.truth_only(); break;
      case Subcommand::tmodel: runner.tmodel_only(); break;
      case Subcommand::calibrate: runner.calibrate(); break;
      case Subcommand::noise_sim: runner.noise_sim(); break;
      case Subcommand::histogram: runner.histogram(); break;
      case Subcommand::all:
        runner.calibrate();
        runner.ergodicity();
        runner.noise_sim();
        runner.histogram();
        break;
    }
    out << runner.summary().line();
    return 0;
  } catch (const std::exception& e) {
    fmt::print(log, "error: {}\n", e.what());
    return 1;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(parse_args(args), std::cout, std::cerr);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << e.usage();
    return UsageError::exit_code;
  }
}

}  // namespace mz::cli
