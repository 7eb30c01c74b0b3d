#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mz/model.hpp"

namespace mz {

struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.05;
  std::size_t n_steps = 1;

  /// Grid covering [t0, t0 + duration] with step dt; duration must be an
  /// integer multiple of dt up to rounding.
  static TimeGrid covering(double duration, double dt, double t0 = 0.0);

  double time(std::size_t step) const {
    return t0 + dt * static_cast<double>(step);
  }
  double t_end() const { return time(n_steps); }
  void validate() const;
};

/// Raised when a state stops being finite. Carries the step index at which
/// that was detected.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

using VectorField =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Classical fourth-order Runge-Kutta with a reusable workspace.
class Rk4 {
 public:
  explicit Rk4(std::size_t dimension);

  std::size_t dimension() const { return k1_.size(); }

  /// Advances y in place from t to t + dt.
  template <class Rhs>
  void step(Rhs&& rhs, double t, std::span<double> y, double dt) {
    if (y.size() != dimension()) throw std::invalid_argument("rk4: dimension");
    const std::size_t n = y.size();
    const double half = 0.5 * dt;
    rhs(t, std::span<const double>(y), std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + half * k1_[i];
    rhs(t + half, std::span<const double>(tmp_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + half * k2_[i];
    rhs(t + half, std::span<const double>(tmp_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
    rhs(t + dt, std::span<const double>(tmp_), std::span<double>(k4_));
    const double sixth = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// One RK4 step; returns the new state. Throws BlowUpError (step 0) if the
/// result is not finite.
std::vector<double> rk4_step(const VectorField& rhs, double t,
                             std::span<const double> y, double dt);

bool all_finite(std::span<const double> y);

/// Applies RK4 over the grid. The observer sees (t_j, y_j) for every
/// j = 0..n_steps, including the initial state. Returns the final state.
template <class Rhs, class Observer>
std::vector<double> integrate(Rhs&& rhs, std::span<const double> y0,
                              const TimeGrid& grid, Observer&& observer) {
  grid.validate();
  std::vector<double> y(y0.begin(), y0.end());
  Rk4 stepper(y.size());
  observer(grid.time(0), std::span<const double>(y));
  for (std::size_t j = 0; j < grid.n_steps; ++j) {
    stepper.step(rhs, grid.time(j), std::span<double>(y), grid.dt);
    if (!all_finite(y)) {
      throw BlowUpError("non-finite state after step " + std::to_string(j + 1),
                        j + 1);
    }
    observer(grid.time(j + 1), std::span<const double>(y));
  }
  return y;
}

template <class Rhs>
std::vector<double> integrate(Rhs&& rhs, std::span<const double> y0,
                              const TimeGrid& grid) {
  return integrate(std::forward<Rhs>(rhs), y0, grid,
                   [](double, std::span<const double>) {});
}

/// Forcing (0, multiplier * z) added to the reduced drift.
double forcing_value(const ReducedState& s, double z, NoiseMultiplier mult);

/// Klauder-Petersen predictor-corrector step for
///   d(q,p)/dt = R_bar(q,p) + (0, multiplier * z(t)),
/// with z known at both ends of the step:
///   predictor  s* = s + dt [R_bar(s) + N(s, z_now)]
///   corrector  s+ = s + dt/2 [R_bar(s) + N(s, z_now) + R_bar(s*) + N(s*, z_next)].
ReducedState kp_step(const ModelParams& params, const ReducedState& s, double t,
                     double dt, double z_now, double z_next,
                     NoiseMultiplier mult = NoiseMultiplier::q);

/// Same scheme with an arbitrary drift; used to exercise the update
/// algebra independently of the model.
ReducedState kp_step(const std::function<ReducedState(const ReducedState&)>& drift,
                     const ReducedState& s, double dt, double z_now,
                     double z_next, NoiseMultiplier mult = NoiseMultiplier::q);

}  // namespace mz
