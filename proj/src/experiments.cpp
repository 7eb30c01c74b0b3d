#include "mz/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "mz/integrators.hpp"
#include "mz/parallel.hpp"

namespace mz {

namespace {

constexpr std::size_t kBlockSize = 64;

void require_positive(const char* name, double value) {
  if (!(value > 0.0)) {
    throw std::invalid_argument(fmt::format("{} must be > 0 (got {})", name, value));
  }
}

std::size_t steps_in(const char* name, double span, double step) {
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument(fmt::format(
        "{} = {} must be a positive integer multiple of {}", name, span, step));
  }
  return static_cast<std::size_t>(rounded);
}

// Running mean and sum of squared deviations, mergeable in a fixed order
// (Chan et al.).
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }

  void merge(const Moments& other) {
    if (other.n == 0.0) return;
    if (n == 0.0) {
      *this = other;
      return;
    }
    const double total = n + other.n;
    const double delta = other.mean - mean;
    mean += delta * other.n / total;
    m2 += other.m2 + delta * delta * n * other.n / total;
    n = total;
  }

  double variance() const { return n > 0.0 ? m2 / n : 0.0; }
};

struct BlockStats {
  std::vector<Moments> q;
  std::vector<Moments> p;
  std::vector<double> q_at_hist;
  double max_drift = 0.0;
  std::size_t divergent = 0;
};

EnsembleResult reduce_blocks(const std::vector<BlockStats>& blocks,
                             const TimeGrid& grid, std::size_t n_times,
                             std::size_t record_stride) {
  std::vector<Moments> q(n_times);
  std::vector<Moments> p(n_times);
  for (const auto& b : blocks) {
    for (std::size_t j = 0; j < n_times; ++j) {
      q[j].merge(b.q[j]);
      p[j].merge(b.p[j]);
    }
  }
  EnsembleResult out;
  out.times.resize(n_times);
  out.mean_q.resize(n_times);
  out.mean_p.resize(n_times);
  out.var_q.resize(n_times);
  for (std::size_t j = 0; j < n_times; ++j) {
    out.times[j] = grid.time(j * record_stride);
    out.mean_q[j] = q[j].mean;
    out.mean_p[j] = p[j].mean;
    out.var_q[j] = q[j].variance();
  }
  return out;
}

double relative_drift(double h, double h0) {
  const double scale = std::abs(h0) > 0.0 ? std::abs(h0) : 1.0;
  return std::abs(h - h0) / scale;
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  require_positive("dt_full", dt_full);
  require_positive("dt_reduced", dt_reduced);
  require_positive("t_end", t_end);
  require_positive("tau_max", tau_max);
  require_positive("persistence_horizon", persistence_horizon);
  require_positive("histogram_time", histogram_time);
  require_positive("ergodicity_horizon", ergodicity_horizon);
  require_positive("divergence_threshold", divergence_threshold);
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (histogram_bins < 1) throw std::invalid_argument("histogram_bins must be >= 1");
  if (histogram_time > t_end) {
    throw std::invalid_argument("histogram_time must not exceed t_end");
  }
  if (!std::isfinite(q0) || !std::isfinite(p0)) {
    throw std::invalid_argument("q0 and p0 must be finite");
  }
  steps_in("t_end", t_end, dt_full);
  steps_in("dt_full", dt_full, dt_reduced);
  steps_in("histogram_time", histogram_time, dt_full);
  steps_in("tau_max", tau_max, dt_full);
  steps_in("persistence_horizon", persistence_horizon, dt_full);
  steps_in("ergodicity_horizon", ergodicity_horizon, dt_full);
}

double ErgodicityTrace::min_radius_squared() const {
  double r2 = INFINITY;
  for (std::size_t j = 0; j < q.size(); ++j) r2 = std::min(r2, q[j] * q[j] + p[j] * p[j]);
  return r2;
}

ErgodicityTrace run_ergodicity_trace(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& params = cfg.params;
  const auto grid = TimeGrid::covering(cfg.ergodicity_horizon, cfg.dt_full);
  RngStream rng(cfg.seed, stream_id(StreamPurpose::ergodicity, 0));
  auto bath = sample_unresolved_conditional(params, cfg.q0, rng);
  const auto y0 = pack(FullState{cfg.q0, cfg.p0, bath.qu, bath.pu});
  const double h0 = energy_full(params, y0);

  ErgodicityTrace trace;
  trace.t.reserve(grid.n_steps + 1);
  trace.q.reserve(grid.n_steps + 1);
  trace.p.reserve(grid.n_steps + 1);
  auto rhs = [&params](double, std::span<const double> y, std::span<double> dy) {
    full_rhs(params, y, dy);
  };
  integrate(rhs, y0, grid, [&](double t, std::span<const double> y) {
    trace.t.push_back(t);
    trace.q.push_back(y[0]);
    trace.p.push_back(y[1]);
    trace.max_relative_energy_drift = std::max(
        trace.max_relative_energy_drift, relative_drift(energy_full(params, y), h0));
  });
  return trace;
}

TruthRun run_truth_expectations(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& params = cfg.params;
  const auto grid = TimeGrid::covering(cfg.t_end, cfg.dt_full);
  const std::size_t n_times = grid.n_steps + 1;
  const std::size_t hist_index = steps_in("histogram_time", cfg.histogram_time, cfg.dt_full);
  const std::size_t n = cfg.n_samples;
  const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<BlockStats> blocks(n_blocks);

  auto rhs = [&params](double, std::span<const double> y, std::span<double> dy) {
    full_rhs(params, y, dy);
  };

  parallel_for_blocks(n, kBlockSize, [&](std::size_t b, std::size_t begin, std::size_t end) {
    auto& stats = blocks[b];
    stats.q.assign(n_times, {});
    stats.p.assign(n_times, {});
    stats.q_at_hist.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(cfg.seed, stream_id(StreamPurpose::truth, i));
      auto bath = sample_unresolved_conditional(params, cfg.q0, rng);
      const auto y0 = pack(FullState{cfg.q0, cfg.p0, std::move(bath.qu), std::move(bath.pu)});
      const double h0 = energy_full(params, y0);
      std::size_t j = 0;
      try {
        integrate(rhs, y0, grid, [&](double, std::span<const double> y) {
          stats.q[j].add(y[0]);
          stats.p[j].add(y[1]);
          if (j == hist_index) stats.q_at_hist.push_back(y[0]);
          stats.max_drift = std::max(stats.max_drift,
                                     relative_drift(energy_full(params, y), h0));
          ++j;
        });
      } catch (const BlowUpError& e) {
        throw BlowUpError(fmt::format("truth trajectory {} (stream {}): {}", i,
                                      rng.stream_id(), e.what()),
                          e.step());
      }
    }
  });

  TruthRun run;
  run.result = reduce_blocks(blocks, grid, n_times, 1);
  run.result.n_samples = n;
  run.result.seed = cfg.seed;
  run.result.label = "truth";
  run.q_at_hist.reserve(n);
  for (const auto& b : blocks) {
    run.q_at_hist.insert(run.q_at_hist.end(), b.q_at_hist.begin(), b.q_at_hist.end());
    run.max_relative_energy_drift = std::max(run.max_relative_energy_drift, b.max_drift);
  }
  return run;
}

ReducedTrajectory run_tmodel(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& params = cfg.params;
  const auto grid = TimeGrid::covering(cfg.t_end, cfg.dt_full);
  auto rhs = [&params](double t, std::span<const double> y, std::span<double> dy) {
    const auto d = tmodel_rhs(params, ReducedState{y[0], y[1]}, t);
    dy[0] = d.q;
    dy[1] = d.p;
  };
  ReducedTrajectory traj;
  const std::vector<double> y0{cfg.q0, cfg.p0};
  integrate(rhs, y0, grid, [&](double t, std::span<const double> y) {
    traj.t.push_back(t);
    traj.q.push_back(y[0]);
    traj.p.push_back(y[1]);
    traj.energy.push_back(energy_reduced(params, ReducedState{y[0], y[1]}));
  });
  return traj;
}

Calibration calibrate_noise(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& params = cfg.params;
  const double record_span = std::max(cfg.tau_max, cfg.persistence_horizon);
  const auto grid = TimeGrid::covering(record_span, cfg.dt_full);
  const std::size_t max_lag = steps_in("tau_max", cfg.tau_max, cfg.dt_full);
  const std::size_t n = cfg.n_samples;
  const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;

  SeriesEnsemble z(n, grid.n_steps + 1);
  std::vector<PersistenceSample> persistence(n);
  std::vector<RejectionStats> rejection(n_blocks);

  auto rhs = [&params](double, std::span<const double> y, std::span<double> dy) {
    full_rhs(params, y, dy);
  };

  parallel_for_blocks(n, kBlockSize, [&](std::size_t b, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(cfg.seed, stream_id(StreamPurpose::calibration, i));
      const auto y0 = pack(sample_invariant_full(params, rng, &rejection[b]));
      auto row = z.series(i);
      std::size_t j = 0;
      try {
        integrate(rhs, y0, grid, [&](double, std::span<const double> y) {
          row[j++] = z_exact(params, y);
        });
      } catch (const BlowUpError& e) {
        throw BlowUpError(fmt::format("calibration trajectory {} (stream {}): {}",
                                      i, rng.stream_id(), e.what()),
                          e.step());
      }
      persistence[i] = persistence_parameter(row, cfg.dt_full, cfg.persistence_horizon, i);
    }
  });

  Calibration cal;
  for (const auto& r : rejection) {
    cal.rejection.proposals += r.proposals;
    cal.rejection.accepted += r.accepted;
  }

  double raw_sum = 0.0;
  std::vector<double> log_a;
  log_a.reserve(n);
  for (const auto& s : persistence) {
    raw_sum += s.raw;
    if (s.clipped()) ++cal.n_clipped;
    if (s.raw > 0.0) log_a.push_back(std::log(s.raw));
  }
  cal.a_mean = raw_sum / static_cast<double>(n);
  cal.persistence = std::move(persistence);

  cal.curve = ensemble_covariance(z, cfg.dt_full, max_lag, cfg.covariance_estimator);
  cal.a_tail = cal.curve.c_star.back();
  cal.curve = decompose(std::move(cal.curve), cal.a_mean);

  const auto zero = first_zero(cal.curve.beta, cfg.dt_full);
  cal.fit = fit_decay(cal.curve.beta, cfg.dt_full, zero.tau0);
  cal.fit.tau0_crossed = zero.crossed;
  if (log_a.empty()) {
    throw std::runtime_error("no positive persistence samples; cannot build log-a histogram");
  }
  cal.fit.log_a_hist = EmpiricalHistogram::build(log_a, cfg.histogram_bins);
  cal.fit.a_zero_fraction =
      static_cast<double>(n - log_a.size()) / static_cast<double>(n);
  return cal;
}

NoiseRun run_noise_model_ensemble(const ExperimentConfig& cfg, const NoiseFit& fit) {
  cfg.validate();
  if (!(fit.d > 0.0 && fit.d < 1.0) || !(fit.fit_step > 0.0) || !(fit.beta0 >= 0.0)) {
    throw std::invalid_argument("noise fit is not usable (need 0 < d < 1, fit_step > 0, beta0 >= 0)");
  }
  const auto& params = cfg.params;
  const auto grid = TimeGrid::covering(cfg.t_end, cfg.dt_reduced);
  const std::size_t stride = steps_in("dt_full", cfg.dt_full, cfg.dt_reduced);
  const std::size_t n_times = grid.n_steps / stride + 1;
  const std::size_t hist_record = steps_in("histogram_time", cfg.histogram_time, cfg.dt_full);
  const std::size_t n = cfg.n_samples;
  const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<BlockStats> blocks(n_blocks);
  const double limit = cfg.divergence_threshold;

  parallel_for_blocks(n, kBlockSize, [&](std::size_t b, std::size_t begin, std::size_t end) {
    auto& stats = blocks[b];
    stats.q.assign(n_times, {});
    stats.p.assign(n_times, {});
    std::vector<double> path_q(n_times);
    std::vector<double> path_p(n_times);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream control(cfg.seed, stream_id(StreamPurpose::noise_model, i));
      const double a = draw_persistence(fit, cfg.a_sampler, control);
      const double flip = control.uniform();
      const double sign = cfg.random_sign_sqrt_a && flip < 0.5 ? -1.0 : 1.0;
      Ar1PersistentNoise gen(fit, cfg.dt_reduced, a,
                             RngStream(cfg.seed, stream_id(StreamPurpose::noise_series, i)),
                             sign);

      ReducedState s{cfg.q0, cfg.p0};
      path_q[0] = s.q;
      path_p[0] = s.p;
      double z_now = gen.next_z();
      bool diverged = false;
      for (std::size_t j = 0; j < grid.n_steps; ++j) {
        const double z_next = gen.next_z();
        try {
          s = kp_step(params, s, grid.time(j), cfg.dt_reduced, z_now, z_next,
                      cfg.noise_multiplier);
        } catch (const BlowUpError&) {
          diverged = true;
          break;
        }
        if (!(std::abs(s.q) <= limit && std::abs(s.p) <= limit)) {
          diverged = true;
          break;
        }
        z_now = z_next;
        if ((j + 1) % stride == 0) {
          path_q[(j + 1) / stride] = s.q;
          path_p[(j + 1) / stride] = s.p;
        }
      }
      if (diverged) {
        ++stats.divergent;
        continue;
      }
      for (std::size_t r = 0; r < n_times; ++r) {
        stats.q[r].add(path_q[r]);
        stats.p[r].add(path_p[r]);
      }
      stats.q_at_hist.push_back(path_q[hist_record]);
    }
  });

  NoiseRun run;
  run.result = reduce_blocks(blocks, grid, n_times, stride);
  run.result.seed = cfg.seed;
  run.result.label = "noise-model";
  for (const auto& b : blocks) {
    run.result.n_divergent += b.divergent;
    run.q_at_hist.insert(run.q_at_hist.end(), b.q_at_hist.begin(), b.q_at_hist.end());
  }
  run.result.n_samples = n - run.result.n_divergent;
  if (run.result.n_samples == 0) {
    throw BlowUpError("every noise-model path diverged", 0);
  }
  return run;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / nx -
                                   static_cast<double>(j) / ny));
  }
  return best;
}

HistogramComparison histogram_compare(std::span<const double> truth,
                                      std::span<const double> model,
                                      std::size_t bins) {
  if (truth.empty() || model.empty()) {
    throw std::invalid_argument("histogram_compare needs two non-empty samples");
  }
  // Range from the pooled 0.1% and 99.9% quantiles: a handful of nearly
  // divergent model paths would otherwise squeeze everything into one bin.
  std::vector<double> pooled(truth.begin(), truth.end());
  pooled.insert(pooled.end(), model.begin(), model.end());
  std::sort(pooled.begin(), pooled.end());
  const double last = static_cast<double>(pooled.size() - 1);
  const double lo = pooled[static_cast<std::size_t>(std::floor(0.001 * last))];
  const double hi = pooled[static_cast<std::size_t>(std::ceil(0.999 * last))];
  HistogramComparison cmp;
  cmp.truth = EmpiricalHistogram::build(truth, bins, lo, hi);
  cmp.model = EmpiricalHistogram::build(model, bins, lo, hi);
  cmp.ks_distance = ks_statistic(truth, model);
  return cmp;
}

double split_half_ks(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("split-half KS needs >= 2 samples");
  const std::size_t half = samples.size() / 2;
  return ks_statistic(samples.first(half), samples.subspan(half));
}

double l2_distance(std::span<const double> a, std::span<const double> b, double dt) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("l2_distance needs equal-length, non-empty curves");
  }
  double sum = 0.0;
  for (std::size_t j = 1; j < a.size(); ++j) {
    const double d0 = a[j - 1] - b[j - 1];
    const double d1 = a[j] - b[j];
    sum += 0.5 * dt * (d0 * d0 + d1 * d1);
  }
  return std::sqrt(sum);
}

void write_ergodicity_csv(std::ostream& out, const ErgodicityTrace& trace) {
  out << "t,q,p\n";
  for (std::size_t j = 0; j < trace.t.size(); ++j) {
    fmt::print(out, "{:.9g},{:.9g},{:.9g}\n", trace.t[j], trace.q[j], trace.p[j]);
  }
}

void write_ensemble_csv(std::ostream& out, const EnsembleResult& result) {
  out << "t,mean_q,mean_p,var_q\n";
  for (std::size_t j = 0; j < result.times.size(); ++j) {
    fmt::print(out, "{:.9g},{:.9g},{:.9g},{:.9g}\n", result.times[j],
               result.mean_q[j], result.mean_p[j], result.var_q[j]);
  }
}

void write_reduced_csv(std::ostream& out, const ReducedTrajectory& traj) {
  out << "t,Q,P,H_hat\n";
  for (std::size_t j = 0; j < traj.t.size(); ++j) {
    fmt::print(out, "{:.9g},{:.9g},{:.9g},{:.9g}\n", traj.t[j], traj.q[j],
               traj.p[j], traj.energy[j]);
  }
}

void write_expectations_csv(std::ostream& out, const EnsembleResult& truth,
                            const ReducedTrajectory& tmodel,
                            const EnsembleResult& noise) {
  const std::size_t n = truth.times.size();
  if (tmodel.t.size() != n || noise.times.size() != n) {
    throw std::invalid_argument("expectation curves are on different grids");
  }
  out << "t,mean_q_truth,mean_p_truth,mean_q_tmodel,mean_q_noise\n";
  for (std::size_t j = 0; j < n; ++j) {
    fmt::print(out, "{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", truth.times[j],
               truth.mean_q[j], truth.mean_p[j], tmodel.q[j], noise.mean_q[j]);
  }
}

void write_q_hist_csv(std::ostream& out, const HistogramComparison& cmp) {
  out << "bin_left,bin_right,count_truth,count_model\n";
  for (std::size_t i = 0; i < cmp.truth.bins(); ++i) {
    fmt::print(out, "{:.9g},{:.9g},{},{}\n", cmp.truth.bin_edges[i],
               cmp.truth.bin_edges[i + 1], cmp.truth.counts[i], cmp.model.counts[i]);
  }
}

}  // namespace mz
