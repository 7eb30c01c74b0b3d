#pragma once

#include <cstdint>
#include <random>

namespace mz {

/// Reproducible random stream keyed by (master_seed, stream_id).
///
/// The engine state is derived from both keys through std::seed_seq, so two
/// streams with equal keys replay the same sequence and streams that differ
/// only in stream_id are decorrelated. Ensembles use the trajectory index as
/// stream_id, which makes results independent of how work is scheduled.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double normal() { return normal_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Stream ids are partitioned by purpose so that, e.g., the bath draws of
/// trajectory 5 in the truth ensemble never coincide with the noise draws of
/// path 5 in the noise-model ensemble.
enum class StreamPurpose : std::uint64_t {
  ergodicity = 1,
  truth = 2,
  calibration = 3,
  noise_model = 4,
  noise_series = 5,
  test = 15,
};

inline std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index) {
  return (static_cast<std::uint64_t>(purpose) << 56) | index;
}

}  // namespace mz
