#include "mz/model.hpp"

#include <cmath>

#include <fmt/core.h>

namespace mz {

namespace {

void require_unit_temperature(const ModelParams& params) {
  if (params.temperature != 1.0) {
    throw std::invalid_argument(fmt::format(
        "reduced-model closed forms assume temperature = 1 (got {})",
        params.temperature));
  }
}

void check_flat(const ModelParams& params, std::span<const double> y) {
  if (y.size() != full_dimension(params)) {
    throw DimensionMismatch(fmt::format(
        "state has {} components, model with m = {} needs {}", y.size(),
        params.m, full_dimension(params)));
  }
}

void check_state(const ModelParams& params, const FullState& s) {
  const auto m = static_cast<std::size_t>(params.m);
  if (s.qu.size() != m || s.pu.size() != m) {
    throw DimensionMismatch(fmt::format(
        "bath state has sizes ({}, {}), model has m = {}", s.qu.size(),
        s.pu.size(), params.m));
  }
}

double bath_q_squared(const ModelParams& params, std::span<const double> y) {
  double sum = 0.0;
  for (int i = 0; i < params.m; ++i) {
    const double qi = y[2 + i];
    sum += qi * qi;
  }
  return sum;
}

}  // namespace

ModelParams ModelParams::with_bath_size(int m) {
  ModelParams params;
  params.m = m;
  if (m > 0) {
    params.alpha = 1.0 / m;
    params.epsilon = 1.0 / m;
  }
  params.g.clear();
  if (m == 2) params.g = {std::sqrt(5.0) / 2.0, std::sqrt(3.0) / 2.0};
  params.temperature = 1.0;
  return params;
}

void ModelParams::validate() const {
  if (m < 0) throw std::invalid_argument("m must be non-negative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(temperature > 0.0))
    throw std::invalid_argument("temperature must be > 0");
  if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
  if (g.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument(
        fmt::format("g has {} entries but m = {}", g.size(), m));
  }
  for (double gi : g) {
    if (!(gi > 0.0)) throw std::invalid_argument("all g_i must be > 0");
  }
}

NoiseMultiplier parse_noise_multiplier(const std::string& text) {
  if (text == "q") return NoiseMultiplier::q;
  if (text == "p") return NoiseMultiplier::p;
  throw std::invalid_argument("noise_multiplier must be 'q' or 'p', got '" +
                              text + "'");
}

std::string to_string(NoiseMultiplier mult) {
  return mult == NoiseMultiplier::q ? "q" : "p";
}

FullState FullState::zeros(int m) {
  FullState s;
  s.qu.assign(static_cast<std::size_t>(m), 0.0);
  s.pu.assign(static_cast<std::size_t>(m), 0.0);
  return s;
}

std::size_t full_dimension(const ModelParams& params) {
  return 2 * static_cast<std::size_t>(params.m) + 2;
}

void full_rhs(const ModelParams& params, std::span<const double> y,
              std::span<double> dydt) {
  check_flat(params, y);
  if (dydt.size() != y.size()) throw DimensionMismatch("derivative size");
  const int m = params.m;
  const double q = y[0];
  const double p = y[1];
  dydt[0] = p;
  dydt[1] = -q * (1.0 + params.alpha * bath_q_squared(params, y));
  const double bath_stiffness =
      (1.0 + params.epsilon * params.alpha * q * q) / params.epsilon;
  for (int i = 0; i < m; ++i) {
    dydt[2 + i] = y[2 + m + i] / params.g[i];
    dydt[2 + m + i] = -y[2 + i] * bath_stiffness;
  }
}

FullState full_rhs(const ModelParams& params, const FullState& s) {
  check_state(params, s);
  const auto y = pack(s);
  std::vector<double> dy(y.size());
  full_rhs(params, y, dy);
  return unpack(dy);
}

double energy_full(const ModelParams& params, std::span<const double> y) {
  check_flat(params, y);
  const int m = params.m;
  const double q = y[0];
  const double p = y[1];
  double kinetic = 0.0;
  for (int i = 0; i < m; ++i) kinetic += y[2 + m + i] * y[2 + m + i] / params.g[i];
  const double bath_q2 = bath_q_squared(params, y);
  return 0.5 * (p * p + q * q + kinetic + bath_q2 / params.epsilon +
                params.alpha * q * q * bath_q2);
}

double energy_full(const ModelParams& params, const FullState& s) {
  check_state(params, s);
  return energy_full(params, pack(s));
}

std::vector<double> pack(const FullState& s) {
  std::vector<double> y;
  y.reserve(2 + s.qu.size() + s.pu.size());
  y.push_back(s.q);
  y.push_back(s.p);
  y.insert(y.end(), s.qu.begin(), s.qu.end());
  y.insert(y.end(), s.pu.begin(), s.pu.end());
  return y;
}

FullState unpack(std::span<const double> y) {
  if (y.size() < 2 || y.size() % 2 != 0) {
    throw DimensionMismatch("flat state must have even length >= 2");
  }
  const std::size_t m = (y.size() - 2) / 2;
  FullState s;
  s.q = y[0];
  s.p = y[1];
  s.qu.assign(y.begin() + 2, y.begin() + 2 + m);
  s.pu.assign(y.begin() + 2 + m, y.end());
  return s;
}

double mean_force(const ModelParams& params, double q) {
  require_unit_temperature(params);
  const double ae = params.alpha * params.epsilon;
  return q * (1.0 + params.m * ae / (1.0 + ae * q * q));
}

ReducedState reduced_rhs(const ModelParams& params, const ReducedState& s) {
  return {s.p, -mean_force(params, s.q)};
}

double energy_reduced(const ModelParams& params, const ReducedState& s) {
  require_unit_temperature(params);
  const double ae = params.alpha * params.epsilon;
  return 0.5 * (s.p * s.p + s.q * s.q + params.m * std::log1p(ae * s.q * s.q));
}

ReducedState tmodel_rhs(const ModelParams& params, const ReducedState& s,
                        double t) {
  const double ae = params.alpha * params.epsilon;
  const double denom = 1.0 + ae * s.q * s.q;
  const double memory =
      2.0 * params.m * ae * ae * s.q * s.q * s.p * t / (denom * denom);
  return {s.p, -mean_force(params, s.q) - memory};
}

double z_exact(const ModelParams& params, std::span<const double> y) {
  check_flat(params, y);
  const double q = y[0];
  const double ae = params.alpha * params.epsilon;
  return params.m * ae / (1.0 + ae * q * q) -
         params.alpha * bath_q_squared(params, y);
}

double z_exact(const ModelParams& params, const FullState& s) {
  check_state(params, s);
  return z_exact(params, pack(s));
}

double noise_exact(const ModelParams& params, std::span<const double> y) {
  const double z = z_exact(params, y);
  return y[0] * z;
}

double noise_exact(const ModelParams& params, const FullState& s) {
  check_state(params, s);
  return s.q * z_exact(params, s);
}

}  // namespace mz
