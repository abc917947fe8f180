#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rotplace/rng.hpp"

namespace rotplace {

enum class ExecPolicy { serial, parallel };

// Monte Carlo execution: `streams` independent substreams derived from (seed, tag,
// stream index). Results are merged in ascending stream order, so serial and
// parallel runs produce bit-identical output for a fixed (seed, streams).
struct McConfig {
  std::uint64_t seed = 0;
  int streams = 4;
  ExecPolicy policy = ExecPolicy::parallel;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

namespace detail {
inline std::vector<std::uint64_t> chunk_sizes(std::uint64_t total, int streams) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(streams));
  std::uint64_t base = total / static_cast<std::uint64_t>(streams);
  std::uint64_t rem = total % static_cast<std::uint64_t>(streams);
  for (int s = 0; s < streams; ++s) out[static_cast<std::size_t>(s)] = base + (static_cast<std::uint64_t>(s) < rem ? 1 : 0);
  return out;
}
}  // namespace detail

// body(rng, sample_count, acc) fills one stream's accumulator; Acc::merge combines
// them in stream order.
template <class Acc, class Body>
Acc run_streams(const McConfig& cfg, StreamTag tag, std::uint64_t total_samples, Body&& body) {
  int streams = cfg.streams > 0 ? cfg.streams : 1;
  auto chunks = detail::chunk_sizes(total_samples, streams);
  std::vector<Acc> parts(static_cast<std::size_t>(streams));
  if (cfg.policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < streams; ++s) {
      StreamRng rng(cfg.seed, tag, static_cast<std::uint64_t>(s));
      body(rng, chunks[static_cast<std::size_t>(s)], parts[static_cast<std::size_t>(s)]);
    }
  } else {
    for (int s = 0; s < streams; ++s) {
      StreamRng rng(cfg.seed, tag, static_cast<std::uint64_t>(s));
      body(rng, chunks[static_cast<std::size_t>(s)], parts[static_cast<std::size_t>(s)]);
    }
  }
  Acc total;
  for (int s = 0; s < streams; ++s) total.merge(parts[static_cast<std::size_t>(s)]);
  return total;
}

struct CountAcc {
  std::uint64_t hits = 0;
  std::uint64_t n = 0;
  void add(bool hit) {
    hits += hit ? 1 : 0;
    ++n;
  }
  void merge(const CountAcc& o) {
    hits += o.hits;
    n += o.n;
  }
  Estimate estimate() const {
    Estimate e;
    e.samples = n;
    if (n == 0) return e;
    double p = static_cast<double>(hits) / static_cast<double>(n);
    e.value = p;
    e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return e;
  }
};

struct MomentAcc {
  double sum = 0.0;
  double sumsq = 0.0;
  std::uint64_t n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  void merge(const MomentAcc& o) {
    sum += o.sum;
    sumsq += o.sumsq;
    n += o.n;
  }
  Estimate estimate() const {
    Estimate e;
    e.samples = n;
    if (n == 0) return e;
    double mean = sum / static_cast<double>(n);
    e.value = mean;
    if (n > 1) {
      double var = (sumsq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
      var = var > 0 ? var : 0.0;
      e.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return e;
  }
};

}  // namespace rotplace
