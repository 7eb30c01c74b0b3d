#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mz/model.hpp"
#include "mz/rng.hpp"

namespace mz {

/// Histogram with explicit bin edges (B + 1 strictly increasing edges and B
/// counts).
struct EmpiricalHistogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;

  std::size_t bins() const { return counts.size(); }
  std::uint64_t total() const;

  /// Throws std::invalid_argument if edges/counts are inconsistent.
  void validate() const;

  /// Equal-width bins over [lo, hi]; values outside the range are dropped,
  /// the right edge is inclusive.
  static EmpiricalHistogram build(std::span<const double> values,
                                  std::size_t bins, double lo, double hi);
  /// Equal-width bins over the range of the finite values.
  static EmpiricalHistogram build(std::span<const double> values,
                                  std::size_t bins);
};

/// CSV with header `bin_left,bin_right,count`, one row per bin.
void write_histogram_csv(std::ostream& out, const EmpiricalHistogram& h);
EmpiricalHistogram read_histogram_csv(std::istream& in);

struct BathSample {
  std::vector<double> qu;
  std::vector<double> pu;
};

/// Draws the bath from e^{-H/T} at fixed tagged position q. H is quadratic in
/// the bath variables, so the conditional law is an independent product of
///   q_i ~ N(0, T eps / (1 + alpha eps q^2)),   p_i ~ N(0, T g_i).
BathSample sample_unresolved_conditional(const ModelParams& params, double q,
                                         RngStream& rng);

/// Acceptance bookkeeping for the tagged-position rejection sampler.
struct RejectionStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0
                          : static_cast<double>(accepted) /
                                static_cast<double>(proposals);
  }
};

/// Marginal density of q under e^{-H/T}, up to normalisation:
///   exp(-q^2 / 2T) (1 + alpha eps q^2)^{-m/2}.
double tagged_marginal_density(const ModelParams& params, double q);

/// Draws a full phase-space point from e^{-H/T}/Z. p is Gaussian; q is drawn
/// by rejection from a N(0, T) envelope with acceptance probability
/// (1 + alpha eps q^2)^{-m/2}; the bath is then drawn conditionally on q.
/// The envelope constant is 1, so the sampler is exact.
FullState sample_invariant_full(const ModelParams& params, RngStream& rng,
                                RejectionStats* stats = nullptr);

/// Picks a bin with probability proportional to its count, then a uniform
/// point inside it.
double sample_histogram(const EmpiricalHistogram& h, RngStream& rng);

}  // namespace mz
