#include "mz/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace mz {

std::uint64_t EmpiricalHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void EmpiricalHistogram::validate() const {
  if (counts.empty()) throw std::invalid_argument("histogram has no bins");
  if (bin_edges.size() != counts.size() + 1) {
    throw std::invalid_argument("histogram needs bins + 1 edges");
  }
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw std::invalid_argument("histogram edges must be strictly increasing");
    }
  }
}

EmpiricalHistogram EmpiricalHistogram::build(std::span<const double> values,
                                             std::size_t bins, double lo,
                                             double hi) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  if (!(hi > lo)) {
    // Degenerate range (e.g. all values equal): widen symmetrically.
    const double pad = std::max(1e-12, std::abs(lo) * 1e-9);
    lo -= pad;
    hi += pad;
  }
  EmpiricalHistogram h;
  h.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges[i] = lo + width * static_cast<double>(i);
  }
  h.bin_edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v) || v < lo || v > hi) continue;
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  return h;
}

EmpiricalHistogram EmpiricalHistogram::build(std::span<const double> values,
                                             std::size_t bins) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) throw std::invalid_argument("no finite values to bin");
  return build(values, bins, lo, hi);
}

void write_histogram_csv(std::ostream& out, const EmpiricalHistogram& h) {
  h.validate();
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    fmt::print(out, "{:.9g},{:.9g},{}\n", h.bin_edges[i], h.bin_edges[i + 1],
               h.counts[i]);
  }
}

EmpiricalHistogram read_histogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "bin_left,bin_right,count") {
    throw std::runtime_error("histogram CSV: missing header");
  }
  EmpiricalHistogram h;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    double left = 0.0;
    double right = 0.0;
    std::uint64_t count = 0;
    char c1 = 0;
    char c2 = 0;
    if (!(fields >> left >> c1 >> right >> c2 >> count) || c1 != ',' ||
        c2 != ',') {
      throw std::runtime_error(fmt::format("histogram CSV: bad row {}", row));
    }
    if (h.bin_edges.empty()) {
      h.bin_edges.push_back(left);
    } else if (left != h.bin_edges.back()) {
      throw std::runtime_error(
          fmt::format("histogram CSV: row {} is not contiguous", row));
    }
    h.bin_edges.push_back(right);
    h.counts.push_back(count);
  }
  h.validate();
  return h;
}

BathSample sample_unresolved_conditional(const ModelParams& params, double q,
                                         RngStream& rng) {
  const double T = params.temperature;
  const double q_sd = std::sqrt(
      T * params.epsilon / (1.0 + params.alpha * params.epsilon * q * q));
  BathSample bath;
  const auto m = static_cast<std::size_t>(params.m);
  bath.qu.resize(m);
  bath.pu.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    bath.qu[i] = q_sd * rng.normal();
    bath.pu[i] = std::sqrt(T * params.g[i]) * rng.normal();
  }
  return bath;
}

double tagged_marginal_density(const ModelParams& params, double q) {
  const double ae = params.alpha * params.epsilon;
  return std::exp(-0.5 * q * q / params.temperature) *
         std::pow(1.0 + ae * q * q, -0.5 * params.m);
}

FullState sample_invariant_full(const ModelParams& params, RngStream& rng,
                                RejectionStats* stats) {
  const double T = params.temperature;
  const double sd = std::sqrt(T);
  const double ae = params.alpha * params.epsilon;
  const double half_m = 0.5 * params.m;

  FullState s;
  for (;;) {
    const double candidate = sd * rng.normal();
    const double u = rng.uniform();
    if (stats != nullptr) ++stats->proposals;
    if (u < std::pow(1.0 + ae * candidate * candidate, -half_m)) {
      s.q = candidate;
      if (stats != nullptr) ++stats->accepted;
      break;
    }
  }
  s.p = sd * rng.normal();
  auto bath = sample_unresolved_conditional(params, s.q, rng);
  s.qu = std::move(bath.qu);
  s.pu = std::move(bath.pu);
  return s;
}

double sample_histogram(const EmpiricalHistogram& h, RngStream& rng) {
  h.validate();
  const std::uint64_t total = h.total();
  if (total == 0) throw std::invalid_argument("cannot sample an empty histogram");
  // Bin index by inverse CDF on the integer counts.
  const double target = rng.uniform() * static_cast<double>(total);
  std::uint64_t cumulative = 0;
  std::size_t bin = h.bins() - 1;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    cumulative += h.counts[i];
    if (h.counts[i] > 0 && target < static_cast<double>(cumulative)) {
      bin = i;
      break;
    }
  }
  while (h.counts[bin] == 0) --bin;  // only reachable through rounding at the top
  const double left = h.bin_edges[bin];
  const double right = h.bin_edges[bin + 1];
  return left + (right - left) * rng.uniform();
}

}  // namespace mz
