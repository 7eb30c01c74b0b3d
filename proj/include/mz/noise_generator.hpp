#pragma once

#include <iosfwd>
#include <span>

#include "mz/noise_analysis.hpp"
#include "mz/rng.hpp"

namespace mz {

/// Model noise z(jk) = b(jk) + sqrt(a) where b is the stationary AR(1) series
///   b((j+1)k) = d b(jk) + xi,   xi ~ N(0, beta0 (1 - d^2)),
/// started from its stationary law N(0, beta0), and a is one persistence draw
/// held fixed for the whole path. The autocovariance of z is
/// beta0 d^|l| + E[a].
class Ar1PersistentNoise {
 public:
  /// `sign` multiplies sqrt(a) and must be +1 or -1.
  Ar1PersistentNoise(const NoiseFit& fit, double k_sim, double a, RngStream rng,
                     double sign = 1.0);

  /// Returns the current z and advances the series by one step.
  double next_z();

  double beta0() const { return beta0_; }
  double d() const { return d_; }
  double step() const { return step_; }
  double a() const { return a_; }
  double offset() const { return offset_; }
  double b() const { return b_; }

 private:
  double beta0_;
  double d_;
  double step_;
  double a_;
  double offset_;
  double innovation_sd_;
  double b_;
  RngStream rng_;
};

enum class PersistenceSampler {
  /// Zero with probability a_zero_fraction, else exp of a histogram draw.
  histogram,
  /// exp(N(mu, sigma^2)) with mu, sigma the mean/sd of the log histogram.
  lognormal,
};

PersistenceSampler parse_persistence_sampler(const std::string& text);
std::string to_string(PersistenceSampler sampler);

/// Draws one persistence parameter a >= 0 from a calibrated fit.
double draw_persistence(const NoiseFit& fit, PersistenceSampler sampler,
                        RngStream& rng);

/// Debug dump: header `t,z`, n_steps + 1 rows.
void write_noise_path_csv(std::ostream& out, Ar1PersistentNoise gen,
                          std::size_t n_steps);

}  // namespace mz
