#include "mz/parallel.hpp"

#include <cstdlib>
#include <string>

namespace mz {

std::size_t worker_count() {
  if (const char* env = std::getenv("MZ_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long long n = std::stoll(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace mz
