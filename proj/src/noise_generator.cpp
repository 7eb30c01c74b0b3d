#include "mz/noise_generator.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace mz {

Ar1PersistentNoise::Ar1PersistentNoise(const NoiseFit& fit, double k_sim,
                                       double a, RngStream rng, double sign)
    : beta0_(fit.beta0),
      d_(0.0),
      step_(k_sim),
      a_(a),
      offset_(0.0),
      innovation_sd_(0.0),
      b_(0.0),
      rng_(std::move(rng)) {
  if (!(k_sim > 0.0)) throw std::invalid_argument("noise step must be > 0");
  if (!(a >= 0.0)) throw std::invalid_argument("persistence parameter must be >= 0");
  if (sign != 1.0 && sign != -1.0) throw std::invalid_argument("sign must be +-1");
  // beta0 = 0 is the noiseless limit (b identically 0) and is allowed here.
  if (!(fit.beta0 >= 0.0)) throw std::invalid_argument("beta0 must be >= 0");
  d_ = k_sim == fit.fit_step ? fit.d : rescale_decay(fit.d, fit.fit_step, k_sim);
  const double innovation_var = beta0_ * (1.0 - d_ * d_);
  if (!(d_ > 0.0 && d_ < 1.0) || !(innovation_var >= 0.0)) {
    throw std::invalid_argument("AR(1) decay must lie in (0, 1)");
  }
  innovation_sd_ = std::sqrt(innovation_var);
  offset_ = sign * std::sqrt(a_);
  b_ = std::sqrt(beta0_) * rng_.normal();
}

double Ar1PersistentNoise::next_z() {
  const double z = b_ + offset_;
  b_ = d_ * b_ + innovation_sd_ * rng_.normal();
  return z;
}

PersistenceSampler parse_persistence_sampler(const std::string& text) {
  if (text == "histogram") return PersistenceSampler::histogram;
  if (text == "lognormal") return PersistenceSampler::lognormal;
  throw std::invalid_argument("a_sampler must be 'histogram' or 'lognormal', got '" +
                              text + "'");
}

std::string to_string(PersistenceSampler sampler) {
  return sampler == PersistenceSampler::histogram ? "histogram" : "lognormal";
}

namespace {

struct LogMoments {
  double mean;
  double sd;
};

// Moments of the binned log a, with each bin represented by its midpoint.
LogMoments log_moments(const EmpiricalHistogram& h) {
  const double total = static_cast<double>(h.total());
  double mean = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double mid = 0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]);
    mean += mid * static_cast<double>(h.counts[i]);
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double mid = 0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]);
    var += (mid - mean) * (mid - mean) * static_cast<double>(h.counts[i]);
  }
  var /= total;
  return {mean, std::sqrt(var)};
}

}  // namespace

double draw_persistence(const NoiseFit& fit, PersistenceSampler sampler,
                        RngStream& rng) {
  // A fit whose samples were all clipped has an empty histogram; the zero
  // test comes first so that case never touches it.
  if (rng.uniform() < fit.a_zero_fraction) return 0.0;
  double log_a = 0.0;
  if (sampler == PersistenceSampler::histogram) {
    log_a = sample_histogram(fit.log_a_hist, rng);
  } else {
    fit.log_a_hist.validate();
    const auto moments = log_moments(fit.log_a_hist);
    log_a = moments.mean + moments.sd * rng.normal();
  }
  return std::exp(log_a);
}

void write_noise_path_csv(std::ostream& out, Ar1PersistentNoise gen,
                          std::size_t n_steps) {
  out << "t,z\n";
  for (std::size_t j = 0; j <= n_steps; ++j) {
    fmt::print(out, "{:.9g},{:.9g}\n", gen.step() * static_cast<double>(j),
               gen.next_z());
  }
}

}  // namespace mz
