#include "mz/rng.hpp"

namespace mz {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master_seed,
                              std::uint64_t stream_id) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(master_seed),
      static_cast<std::uint32_t>(master_seed >> 32),
      static_cast<std::uint32_t>(stream_id),
      static_cast<std::uint32_t>(stream_id >> 32),
  };
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      engine_(seeded_engine(master_seed, stream_id)) {}

}  // namespace mz
