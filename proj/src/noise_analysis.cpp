#include "mz/noise_analysis.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/core.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

namespace mz {

CovarianceCurve ensemble_covariance(const SeriesEnsemble& z, double lag_step,
                                    std::size_t max_lag,
                                    CovarianceEstimator estimator) {
  if (z.n_series() == 0) throw std::invalid_argument("empty ensemble");
  if (z.length() < max_lag + 1) {
    throw std::invalid_argument(fmt::format(
        "series of length {} cannot supply lag {}", z.length(), max_lag));
  }
  if (!(lag_step > 0.0)) throw std::invalid_argument("lag step must be > 0");

  CovarianceCurve curve;
  curve.lag_step = lag_step;
  curve.n_samples = z.n_series();
  curve.c.assign(max_lag + 1, 0.0);

  if (estimator == CovarianceEstimator::ensemble) {
    // Summed in series order so the result does not depend on scheduling.
    for (std::size_t i = 0; i < z.n_series(); ++i) {
      const auto s = z.series(i);
      const double z0 = s[0];
      for (std::size_t lag = 0; lag <= max_lag; ++lag) curve.c[lag] += z0 * s[lag];
    }
    const double n = static_cast<double>(z.n_series());
    for (double& v : curve.c) v /= n;
  } else {
    const std::size_t len = z.length();
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
      double sum = 0.0;
      for (std::size_t i = 0; i < z.n_series(); ++i) {
        const auto s = z.series(i);
        for (std::size_t j = 0; j + lag < len; ++j) sum += s[j] * s[j + lag];
      }
      curve.c[lag] = sum / static_cast<double>(z.n_series() * (len - lag));
    }
  }

  curve.c_star = integrated_covariance(curve.c, lag_step);
  curve.beta = curve.c;
  curve.a_const = 0.0;
  return curve;
}

std::vector<double> integrated_covariance(std::span<const double> c,
                                          double lag_step) {
  if (c.empty()) throw std::invalid_argument("empty covariance");
  std::vector<double> out(c.size());
  out[0] = c[0];
  double integral = 0.0;
  for (std::size_t l = 1; l < c.size(); ++l) {
    integral += 0.5 * lag_step * (c[l - 1] + c[l]);
    out[l] = integral / (lag_step * static_cast<double>(l));
  }
  return out;
}

PersistenceSample persistence_parameter(std::span<const double> z,
                                        double lag_step, double horizon,
                                        std::size_t trajectory_id) {
  if (!(lag_step > 0.0)) throw std::invalid_argument("lag step must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  const double steps = horizon / lag_step;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (std::abs(steps - static_cast<double>(n)) > 1e-9 * steps) {
    throw std::invalid_argument("horizon must be a multiple of the lag step");
  }
  if (z.size() < n + 1) {
    throw std::invalid_argument(fmt::format(
        "horizon {} exceeds trajectory span {}", horizon,
        lag_step * static_cast<double>(z.empty() ? 0 : z.size() - 1)));
  }
  double integral = 0.0;
  for (std::size_t j = 1; j <= n; ++j) integral += 0.5 * (z[j - 1] + z[j]);
  integral *= lag_step;

  PersistenceSample sample;
  sample.raw = z[0] * integral / horizon;
  sample.a = std::max(sample.raw, 0.0);
  sample.trajectory_id = trajectory_id;
  return sample;
}

CovarianceCurve decompose(CovarianceCurve curve, double A) {
  if (!std::isfinite(A)) throw std::invalid_argument("A must be finite");
  curve.a_const = A;
  curve.beta.resize(curve.c.size());
  for (std::size_t l = 0; l < curve.c.size(); ++l) curve.beta[l] = curve.c[l] - A;
  return curve;
}

FirstZero first_zero(std::span<const double> beta, double lag_step) {
  if (beta.empty() || !(beta[0] > 0.0)) {
    throw std::invalid_argument("first_zero requires beta[0] > 0");
  }
  for (std::size_t l = 1; l < beta.size(); ++l) {
    if (beta[l] <= 0.0) {
      const double prev = beta[l - 1];
      const double frac = prev / (prev - beta[l]);
      return {lag_step * (static_cast<double>(l - 1) + frac), true};
    }
  }
  return {lag_step * static_cast<double>(beta.size() - 1), false};
}

void NoiseFit::validate() const {
  if (!(beta0 > 0.0)) throw std::invalid_argument("noise fit: beta0 must be > 0");
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("noise fit: d must lie in (0, 1)");
  if (!(fit_step > 0.0)) throw std::invalid_argument("noise fit: fit_step must be > 0");
  if (!(tau0 > 0.0)) throw std::invalid_argument("noise fit: tau0 must be > 0");
  if (!(a_zero_fraction >= 0.0 && a_zero_fraction <= 1.0)) {
    throw std::invalid_argument("noise fit: a_zero_fraction must lie in [0, 1]");
  }
}

NoiseFit fit_decay(std::span<const double> beta, double lag_step, double tau0) {
  if (beta.empty() || !(beta[0] > 0.0)) {
    throw std::invalid_argument("fit_decay requires beta[0] > 0");
  }
  if (!(lag_step > 0.0)) throw std::invalid_argument("lag step must be > 0");
  // Lags with l k <= tau0, tolerant of tau0 landing on a grid point.
  const auto last = std::min<std::size_t>(
      beta.size() - 1,
      static_cast<std::size_t>(std::floor(tau0 / lag_step + 1e-9)));
  if (last + 1 < 3) {
    throw std::invalid_argument(fmt::format(
        "fit_decay needs at least 3 lags in [0, tau0]; tau0 = {} gives {}",
        tau0, last + 1));
  }

  const double beta0 = beta[0];
  auto residual = [&](double d) {
    double sum = 0.0;
    double model = 1.0;
    for (std::size_t l = 0; l <= last; ++l) {
      const double r = beta[l] - beta0 * model;
      sum += r * r;
      model *= d;
    }
    return sum;
  };

  // Golden-section search on (0, 1).
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = 1.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = residual(x1);
  double f2 = residual(x2);
  while (hi - lo > 1e-7) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = residual(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = residual(x2);
    }
  }

  NoiseFit fit;
  fit.beta0 = beta0;
  fit.d = 0.5 * (lo + hi);
  fit.fit_step = lag_step;
  fit.tau0 = tau0;
  return fit;
}

double rescale_decay(double d, double k_old, double k_new) {
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("d must lie in (0, 1)");
  if (!(k_old > 0.0) || !(k_new > 0.0)) {
    throw std::invalid_argument("steps must be > 0");
  }
  return std::pow(d, k_new / k_old);
}

void write_covariance_csv(std::ostream& out, const CovarianceCurve& curve) {
  out << "tau,C,Cstar,beta\n";
  for (std::size_t l = 0; l < curve.c.size(); ++l) {
    fmt::print(out, "{:.9g},{:.9g},{:.9g},{:.9g}\n", curve.tau(l), curve.c[l],
               curve.c_star[l], curve.beta[l]);
  }
}

void write_persistence_csv(std::ostream& out,
                           std::span<const PersistenceSample> samples) {
  out << "trajectory_id,a,log_a\n";
  for (const auto& s : samples) {
    if (s.raw > 0.0) {
      fmt::print(out, "{},{:.9g},{:.9g}\n", s.trajectory_id, s.raw, std::log(s.raw));
    } else {
      fmt::print(out, "{},{:.9g},nan\n", s.trajectory_id, s.raw);
    }
  }
}

void write_fit_json(std::ostream& out, const NoiseFit& fit) {
  // Written by hand to keep the 9-significant-digit convention of the CSVs.
  fmt::print(out,
             "{{\n  \"beta0\": {:.9g},\n  \"d\": {:.9g},\n  \"fit_step\": {:.9g},\n"
             "  \"tau0\": {:.9g},\n  \"tau0_crossed\": {},\n"
             "  \"a_zero_fraction\": {:.9g}\n}}\n",
             fit.beta0, fit.d, fit.fit_step, fit.tau0,
             fit.tau0_crossed ? "true" : "false", fit.a_zero_fraction);
}

NoiseFit read_fit_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("fit file: ") + e.what());
  }
  NoiseFit fit;
  try {
    fit.beta0 = j.at("beta0").get<double>();
    fit.d = j.at("d").get<double>();
    fit.fit_step = j.at("fit_step").get<double>();
    fit.tau0 = j.at("tau0").get<double>();
    fit.tau0_crossed = j.value("tau0_crossed", true);
    fit.a_zero_fraction = j.value("a_zero_fraction", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("fit file: ") + e.what());
  }
  return fit;
}

}  // namespace mz
