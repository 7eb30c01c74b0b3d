#include "mz/integrators.hpp"

#include <algorithm>

#include <fmt/core.h>

namespace mz {

TimeGrid TimeGrid::covering(double duration, double dt, double t0) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be > 0");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
  const double ratio = duration / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument(fmt::format(
        "duration {} is not an integer multiple of step {}", duration, dt));
  }
  return TimeGrid{t0, dt, static_cast<std::size_t>(rounded)};
}

void TimeGrid::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be > 0");
  if (n_steps < 1) throw std::invalid_argument("time grid needs at least one step");
}

Rk4::Rk4(std::size_t dimension)
    : k1_(dimension), k2_(dimension), k3_(dimension), k4_(dimension),
      tmp_(dimension) {}

bool all_finite(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> rk4_step(const VectorField& rhs, double t,
                             std::span<const double> y, double dt) {
  std::vector<double> out(y.begin(), y.end());
  Rk4 stepper(out.size());
  stepper.step(rhs, t, std::span<double>(out), dt);
  if (!all_finite(out)) throw BlowUpError("rk4 step produced a non-finite state", 0);
  return out;
}

double forcing_value(const ReducedState& s, double z, NoiseMultiplier mult) {
  return (mult == NoiseMultiplier::q ? s.q : s.p) * z;
}

namespace {

ReducedState check_finite(const ReducedState& s) {
  if (!std::isfinite(s.q) || !std::isfinite(s.p)) {
    throw BlowUpError("Klauder-Petersen step produced a non-finite state", 0);
  }
  return s;
}

}  // namespace

ReducedState kp_step(const std::function<ReducedState(const ReducedState&)>& drift,
                     const ReducedState& s, double dt, double z_now,
                     double z_next, NoiseMultiplier mult) {
  if (!(dt > 0.0)) throw std::invalid_argument("kp_step: dt must be > 0");
  const ReducedState f0 = drift(s);
  const double dq0 = f0.q;
  const double dp0 = f0.p + forcing_value(s, z_now, mult);
  const ReducedState predicted{s.q + dt * dq0, s.p + dt * dp0};
  const ReducedState f1 = drift(predicted);
  const double dq1 = f1.q;
  const double dp1 = f1.p + forcing_value(predicted, z_next, mult);
  const double half = 0.5 * dt;
  return check_finite({s.q + half * (dq0 + dq1), s.p + half * (dp0 + dp1)});
}

ReducedState kp_step(const ModelParams& params, const ReducedState& s,
                     double /*t*/, double dt, double z_now, double z_next,
                     NoiseMultiplier mult) {
  // The reduced drift is autonomous; t is part of the signature so that the
  // noise time grid can be threaded through callers uniformly.
  return kp_step([&params](const ReducedState& x) { return reduced_rhs(params, x); },
                 s, dt, z_now, z_next, mult);
}

}  // namespace mz
