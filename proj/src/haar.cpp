#include "rotplace/haar.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include "rotplace/sampling.hpp"

namespace rotplace {

InvarianceResult invariance_test(std::uint64_t seed, std::uint64_t stream_index,
                                 const Region& probe, std::uint64_t trials, int base_points,
                                 const RotationSampler& sampler) {
  if (trials == 0) throw std::invalid_argument("invariance test needs trials > 0");
  if (base_points <= 0) throw std::invalid_argument("invariance test needs base points");

  double p;
  if (auto exact = probe.exact_area()) {
    p = *exact;
  } else {
    McConfig cfg;
    cfg.seed = stream_seed(seed, StreamTag::invariance, stream_index);
    cfg.streams = 4;
    p = estimate_region_area(probe, 400000, cfg).value;
  }
  if (p < 1e-9 || p > 1.0 - 1e-9)
    throw std::invalid_argument("degenerate probe: area must be strictly between 0 and 1");

  // Base points come from a dedicated substream so the rotation draws below are
  // independent of them.
  StreamRng base_rng(seed, StreamTag::invariance, stream_index * 1024 + 1023);
  double stat = 0.0;
  for (int j = 0; j < base_points; ++j) {
    UnitVector a = sample_sphere_point(base_rng);
    StreamRng rot_rng(seed, StreamTag::invariance,
                      stream_index * 1024 + static_cast<std::uint64_t>(j));
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      Rotation x = sampler(rot_rng);
      if (probe.contains(x.apply(a))) ++hits;
    }
    double expected = static_cast<double>(trials) * p;
    double variance = static_cast<double>(trials) * p * (1.0 - p);
    double d = static_cast<double>(hits) - expected;
    stat += d * d / variance;
  }

  boost::math::chi_squared dist(base_points);
  InvarianceResult r;
  r.statistic = stat;
  r.dof = base_points;
  r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  r.probe_area = p;
  r.pass = r.p_value >= 0.001;
  return r;
}

}  // namespace rotplace
