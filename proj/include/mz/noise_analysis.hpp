#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mz/sampling.hpp"

namespace mz {

/// Ensemble of equally spaced scalar series stored row-major
/// (series index major, time index minor).
class SeriesEnsemble {
 public:
  SeriesEnsemble() = default;
  SeriesEnsemble(std::size_t n_series, std::size_t length)
      : n_series_(n_series), length_(length), data_(n_series * length) {}

  std::size_t n_series() const { return n_series_; }
  std::size_t length() const { return length_; }

  std::span<double> series(std::size_t i) {
    return {data_.data() + i * length_, length_};
  }
  std::span<const double> series(std::size_t i) const {
    return {data_.data() + i * length_, length_};
  }

 private:
  std::size_t n_series_ = 0;
  std::size_t length_ = 0;
  std::vector<double> data_;
};

/// C(l k), its running time average C*(l k), and the split C = beta + A.
struct CovarianceCurve {
  double lag_step = 0.0;
  std::vector<double> c;
  std::vector<double> c_star;
  double a_const = 0.0;
  std::vector<double> beta;
  std::size_t n_samples = 0;

  std::size_t max_lag() const { return c.empty() ? 0 : c.size() - 1; }
  double tau(std::size_t lag) const {
    return lag_step * static_cast<double>(lag);
  }
};

enum class CovarianceEstimator {
  /// E[z(0) z(l k)] over the ensemble, time origin fixed at 0.
  ensemble,
  /// Average of z(j k) z((j + l) k) over every admissible origin j and every
  /// series. Diagnostic only.
  time_average,
};

/// Covariance estimate with C* filled in; beta is C and A is 0 until
/// decompose() is applied.
CovarianceCurve ensemble_covariance(
    const SeriesEnsemble& z, double lag_step, std::size_t max_lag,
    CovarianceEstimator estimator = CovarianceEstimator::ensemble);

/// tau^{-1} times the trapezoidal integral of c over [0, tau]; the value at
/// tau = 0 is c[0].
std::vector<double> integrated_covariance(std::span<const double> c,
                                          double lag_step);

struct PersistenceSample {
  /// The raw time average; negative values occur for finite horizons.
  double raw = 0.0;
  /// max(raw, 0). This is what enters sqrt(a).
  double a = 0.0;
  std::size_t trajectory_id = 0;

  bool clipped() const { return raw < 0.0; }
};

/// horizon^{-1} * trapezoidal integral of z(0) z(s) over [0, horizon].
PersistenceSample persistence_parameter(std::span<const double> z,
                                        double lag_step, double horizon,
                                        std::size_t trajectory_id = 0);

/// beta = c - A.
CovarianceCurve decompose(CovarianceCurve curve, double A);

struct FirstZero {
  double tau0 = 0.0;
  /// False when beta never changes sign; tau0 is then the last grid point.
  bool crossed = true;
};

FirstZero first_zero(std::span<const double> beta, double lag_step);

struct NoiseFit {
  double beta0 = 0.0;
  double d = 0.0;
  double fit_step = 0.0;
  double tau0 = 0.0;
  bool tau0_crossed = true;
  /// Histogram of log a over the strictly positive persistence samples.
  EmpiricalHistogram log_a_hist;
  /// Share of persistence samples that were clipped to a = 0. These cannot
  /// be represented in a log histogram and are drawn as a = 0 directly.
  double a_zero_fraction = 0.0;

  void validate() const;
};

/// beta0 = beta[0]; d minimises sum_{l k <= tau0} (beta[l] - beta0 d^l)^2
/// over (0, 1) by golden-section search to |delta d| < 1e-6.
NoiseFit fit_decay(std::span<const double> beta, double lag_step, double tau0);

/// d^(k_new / k_old): the decay factor for a different sampling step.
double rescale_decay(double d, double k_old, double k_new);

/// Header `tau,C,Cstar,beta`, one row per lag.
void write_covariance_csv(std::ostream& out, const CovarianceCurve& curve);

/// Header `trajectory_id,a,log_a`; a is the raw value, log_a is `nan` for
/// non-positive a.
void write_persistence_csv(std::ostream& out,
                           std::span<const PersistenceSample> samples);

/// Flat JSON object with keys beta0, d, fit_step, tau0, tau0_crossed,
/// a_zero_fraction. The histogram is stored separately.
void write_fit_json(std::ostream& out, const NoiseFit& fit);
NoiseFit read_fit_json(std::istream& in);

}  // namespace mz
