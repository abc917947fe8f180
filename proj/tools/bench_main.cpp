// Times the Monte Carlo kernels under the serial and OpenMP execution
// policies and verifies the merged results are bit-identical.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "rotplace/placement.hpp"
#include "rotplace/pointset.hpp"
#include "rotplace/region.hpp"
#include "rotplace/sampling.hpp"

using namespace rotplace;

namespace {

template <typename F>
double time_s(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

int report(const char* name, const Estimate& s, double ts, const Estimate& p, double tp) {
  bool same = bits_equal(s.value, p.value) && bits_equal(s.std_error, p.std_error) &&
              s.samples == p.samples;
  std::printf("%-16s serial %8.3f s   parallel %8.3f s   speedup %.2fx   identical %s\n", name,
              ts, tp, ts / tp, same ? "yes" : "NO");
  if (!same)
    std::printf("  serial %.17g +- %.17g, parallel %.17g +- %.17g\n", s.value, s.std_error,
                p.value, p.std_error);
  return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t samples = 4000000;
  if (argc > 1) samples = std::strtoull(argv[1], nullptr, 10);

  Region region = Region::complement(Region::cap(UnitVector(Vec3{0, 0, 1}), 0.927295218, Boundary::closed));
  PointSet tetra = preset_pointset("tetrahedron");
  PlacementProblem prob{region, tetra, region.exact_area()};

  McConfig serial{1, 4, ExecPolicy::serial};
  McConfig parallel{1, 4, ExecPolicy::parallel};

  int bad = 0;

  Estimate as, ap;
  double ts = time_s([&] { as = estimate_region_area(region, samples, serial); });
  double tp = time_s([&] { ap = estimate_region_area(region, samples, parallel); });
  bad += report("area", as, ts, ap, tp);

  Estimate cs, cp;
  ts = time_s([&] { cs = expected_count(prob, samples, serial); });
  tp = time_s([&] { cp = expected_count(prob, samples, parallel); });
  bad += report("expected-count", cs, ts, cp, tp);

  MeasureResult ms, mp;
  ts = time_s([&] { ms = good_rotation_measure(prob, samples, serial); });
  tp = time_s([&] { mp = good_rotation_measure(prob, samples, parallel); });
  bad += report("measure", ms.estimate, ts, mp.estimate, tp);

  if (bad) {
    std::printf("FAIL: %d kernel(s) diverged between policies\n", bad);
    return 1;
  }
  std::printf("all kernels bit-identical across policies (%llu samples, 4 streams)\n",
              (unsigned long long)samples);
  return 0;
}
