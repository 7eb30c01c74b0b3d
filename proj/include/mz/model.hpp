#pragma once

// Tagged-particle heat-bath model: one resolved oscillator (q, p) coupled
// quadratically to m unresolved oscillators (q_i, p_i).
//
//   H = 1/2 (p^2 + q^2 + sum p_i^2/g_i + (sum q_i^2)/eps + alpha q^2 sum q_i^2)
//
// All functions here are pure and thread-safe.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mz {

struct ModelParams {
  int m = 2;
  double alpha = 0.5;
  double epsilon = 0.5;
  std::vector<double> g;
  double temperature = 1.0;

  /// alpha = epsilon = 1/m, T = 1. For m = 2 the bath masses default to
  /// (sqrt(5)/2, sqrt(3)/2); otherwise g is left empty and must be filled.
  static ModelParams with_bath_size(int m);

  /// The two-particle bath used throughout the experiments.
  static ModelParams standard() { return with_bath_size(2); }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

struct FullState {
  double q = 0.0;
  double p = 0.0;
  std::vector<double> qu;
  std::vector<double> pu;

  static FullState zeros(int m);

  std::size_t bath_size() const { return qu.size(); }
};

struct ReducedState {
  double q = 0.0;
  double p = 0.0;

  friend bool operator==(const ReducedState&, const ReducedState&) = default;
};

/// Selects which resolved variable multiplies z in the forcing term
/// (0, multiplier * z) of the reduced equation.
enum class NoiseMultiplier { q, p };

NoiseMultiplier parse_noise_multiplier(const std::string& text);
std::string to_string(NoiseMultiplier mult);

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Full system.  The flat layout used by the integrators is
// [q, p, q_1..q_m, p_1..p_m], length 2m + 2.

std::size_t full_dimension(const ModelParams& params);

void full_rhs(const ModelParams& params, std::span<const double> y,
              std::span<double> dydt);
FullState full_rhs(const ModelParams& params, const FullState& s);

double energy_full(const ModelParams& params, std::span<const double> y);
double energy_full(const ModelParams& params, const FullState& s);

std::vector<double> pack(const FullState& s);
FullState unpack(std::span<const double> y);

// ---------------------------------------------------------------------------
// Reduced (conditional-mean) system and the t-model. These closed forms hold
// for T = 1 only; calling them with any other temperature throws.

/// E[q (1 + alpha sum q_i^2) | q, p] = q (1 + m alpha eps / (1 + alpha eps q^2)).
double mean_force(const ModelParams& params, double q);

ReducedState reduced_rhs(const ModelParams& params, const ReducedState& s);

/// H_hat = 1/2 (p^2 + q^2 + m log(1 + alpha eps q^2)).
double energy_reduced(const ModelParams& params, const ReducedState& s);

/// Reduced drift plus the t-model memory term, which is linear in t.
ReducedState tmodel_rhs(const ModelParams& params, const ReducedState& s,
                        double t);

// ---------------------------------------------------------------------------
// Noise. n is the full dp/dt minus the reduced one, n = q z with
//   z = m alpha eps / (1 + alpha eps q^2) - alpha sum q_i^2.
// z is evaluated from this closed form, never as n / q.

double z_exact(const ModelParams& params, std::span<const double> y);
double z_exact(const ModelParams& params, const FullState& s);

double noise_exact(const ModelParams& params, std::span<const double> y);
double noise_exact(const ModelParams& params, const FullState& s);

}  // namespace mz
