#pragma once

#include <cstdint>
#include <random>

namespace rotplace {

// splitmix64 finalizer; used only to derive per-stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Operation tags keep independent estimators decorrelated under a shared user seed.
enum class StreamTag : std::uint64_t {
  sphere_area = 1,
  haar = 2,
  expected_count = 3,
  good_measure = 4,
  placement = 5,
  refine = 6,
  invariance = 7,
  cover_check = 8,
  distortion = 9,
  disjointify = 10,
  transport_pack = 11,
  transport_place = 12,
  transport_cover = 13,
  transport_area = 14,
  validate_containment = 15,
  validate_coverage = 16,
  adversarial = 17,
  region_gen = 18,
};

inline std::uint64_t stream_seed(std::uint64_t seed, StreamTag tag, std::uint64_t stream_index) {
  std::uint64_t s = mix64(seed ^ mix64(static_cast<std::uint64_t>(tag)));
  return mix64(s ^ mix64(stream_index + 0x51ed270b0a1ull));
}

// Deterministic stream: mt19937_64 plus hand-rolled uniform doubles, because the
// standard distributions are implementation-defined.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, StreamTag tag, std::uint64_t stream_index)
      : gen_(stream_seed(seed, tag, stream_index)) {}
  explicit StreamRng(std::uint64_t raw_seed) : gen_(raw_seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double next_double() {  // uniform in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double next_in(double a, double b) { return a + (b - a) * next_double(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rotplace
