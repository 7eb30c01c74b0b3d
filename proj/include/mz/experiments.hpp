#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mz/model.hpp"
#include "mz/noise_analysis.hpp"
#include "mz/noise_generator.hpp"
#include "mz/sampling.hpp"

namespace mz {

struct ExperimentConfig {
  ModelParams params = ModelParams::standard();
  double q0 = 1.0;
  double p0 = 0.0;
  double dt_full = 0.05;
  double dt_reduced = 0.01;
  double t_end = 20.0;
  std::size_t n_samples = 20000;
  std::uint64_t seed = 1;
  double tau_max = 20.0;
  double persistence_horizon = 20.0;
  NoiseMultiplier noise_multiplier = NoiseMultiplier::q;
  double histogram_time = 20.0;
  std::size_t histogram_bins = 60;

  double ergodicity_horizon = 500.0;
  bool random_sign_sqrt_a = false;
  PersistenceSampler a_sampler = PersistenceSampler::histogram;
  CovarianceEstimator covariance_estimator = CovarianceEstimator::ensemble;
  /// A noise-model path is declared divergent once |q| or |p| exceeds this.
  double divergence_threshold = 1e3;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Per-time ensemble statistics on a uniform grid.
struct EnsembleResult {
  std::vector<double> times;
  std::vector<double> mean_q;
  std::vector<double> mean_p;
  std::vector<double> var_q;
  std::size_t n_samples = 0;
  /// Paths dropped from the statistics because they diverged.
  std::size_t n_divergent = 0;
  std::uint64_t seed = 0;
  std::string label;
};

struct ErgodicityTrace {
  std::vector<double> t;
  std::vector<double> q;
  std::vector<double> p;
  double max_relative_energy_drift = 0.0;

  /// min over the trace of q^2 + p^2.
  double min_radius_squared() const;
};

/// One full trajectory from (q0, p0) with a conditionally sampled bath,
/// integrated over ergodicity_horizon with dt_full.
ErgodicityTrace run_ergodicity_trace(const ExperimentConfig& cfg);

struct TruthRun {
  EnsembleResult result;
  /// q(histogram_time) for every trajectory, in trajectory order.
  std::vector<double> q_at_hist;
  /// Largest |H(t) - H(0)| / |H(0)| over all trajectories and times.
  double max_relative_energy_drift = 0.0;
};

/// Conditional expectations E[q(t) | q0, p0], E[p(t) | q0, p0] from
/// n_samples full-system trajectories with baths drawn from e^{-H}
/// conditioned on q0.
TruthRun run_truth_expectations(const ExperimentConfig& cfg);

struct ReducedTrajectory {
  std::vector<double> t;
  std::vector<double> q;
  std::vector<double> p;
  /// Reduced energy H_hat along the trajectory.
  std::vector<double> energy;
};

/// t-model from (q0, p0), RK4 with dt_full up to t_end.
ReducedTrajectory run_tmodel(const ExperimentConfig& cfg);

struct Calibration {
  CovarianceCurve curve;
  NoiseFit fit;
  std::vector<PersistenceSample> persistence;
  std::size_t n_clipped = 0;
  /// Mean of the raw persistence samples; this is A.
  double a_mean = 0.0;
  /// C*(tau_max), the cross-check estimate of A.
  double a_tail = 0.0;
  RejectionStats rejection;
};

/// Samples n_samples states from e^{-H}/Z, records z(t) along each full
/// trajectory, and runs the covariance / persistence / decomposition / fit
/// pipeline.
Calibration calibrate_noise(const ExperimentConfig& cfg);

struct NoiseRun {
  /// Statistics on the dt_full grid over the non-divergent paths.
  EnsembleResult result;
  /// q(histogram_time) for every non-divergent path, in path order.
  std::vector<double> q_at_hist;
};

/// Solves d(q,p)/dt = R_bar(q,p) + (0, multiplier * z_model) from (q0, p0)
/// with the Klauder-Petersen scheme at dt_reduced, one noise path per sample.
NoiseRun run_noise_model_ensemble(const ExperimentConfig& cfg, const NoiseFit& fit);

struct HistogramComparison {
  EmpiricalHistogram truth;
  EmpiricalHistogram model;
  double ks_distance = 0.0;
};

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Histograms of both samples on a common range (pooled 0.1% to 99.9%
/// quantiles; values outside are not binned), plus the KS distance over all
/// values.
HistogramComparison histogram_compare(std::span<const double> truth,
                                      std::span<const double> model,
                                      std::size_t bins);

/// KS distance between the first and second halves of a sample.
double split_half_ks(std::span<const double> samples);

/// sqrt of the trapezoidal integral of (a - b)^2 on a uniform grid.
double l2_distance(std::span<const double> a, std::span<const double> b,
                   double dt);

// CSV writers; every float is printed with 9 significant digits.
void write_ergodicity_csv(std::ostream& out, const ErgodicityTrace& trace);
void write_ensemble_csv(std::ostream& out, const EnsembleResult& result);
void write_reduced_csv(std::ostream& out, const ReducedTrajectory& traj);
/// `t,mean_q_truth,mean_p_truth,mean_q_tmodel,mean_q_noise`.
void write_expectations_csv(std::ostream& out, const EnsembleResult& truth,
                            const ReducedTrajectory& tmodel,
                            const EnsembleResult& noise);
/// `bin_left,bin_right,count_truth,count_model`.
void write_q_hist_csv(std::ostream& out, const HistogramComparison& cmp);

}  // namespace mz
