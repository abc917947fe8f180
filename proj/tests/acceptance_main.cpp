// Acceptance gate: every criterion at full scale, one PASS/FAIL line each,
// nonzero exit when anything fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rotplace/cli_app.hpp"
#include "rotplace/cover.hpp"
#include "rotplace/haar.hpp"
#include "rotplace/lattice.hpp"
#include "rotplace/placement.hpp"
#include "rotplace/sampling.hpp"
#include "rotplace/transport.hpp"

using namespace rotplace;

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const UnitVector kZ(0, 0, 1);

Region closed_cap_complement(double cap_area_frac, const UnitVector& c = kZ) {
  return Region::complement(
      Region::cap(c, std::acos(1.0 - 2.0 * cap_area_frac), Boundary::closed));
}

// S minus the last lune of the equal quarter partition.
Region lune_partition_complement(int n) {
  return Region::complement(make_lune_partition(n, kZ)[static_cast<std::size_t>(n - 1)]);
}

McConfig mc_for(std::uint64_t seed) {
  McConfig cfg;
  cfg.seed = seed;
  cfg.streams = 4;
  cfg.policy = ExecPolicy::parallel;
  return cfg;
}

// ---------------------------------------------------------------------------

bool crit_area_closed_form(std::string& note) {
  auto t0 = Clock::now();
  std::vector<std::pair<Region, double>> cases;
  double radii[10] = {0.05, 0.3, 0.7, 1.0, 1.3, kPi / 2, 1.9, 2.6, 3.0, std::acos(0.6)};
  UnitVector centers[5] = {kZ, UnitVector(1, 0, 0), UnitVector(0, -1, 0),
                           UnitVector(1, 1, 1), UnitVector(-0.3, 0.8, -0.5)};
  for (int i = 0; i < 10; ++i)
    cases.push_back({Region::cap(centers[i % 5], radii[i],
                                 i % 2 ? Boundary::open : Boundary::closed),
                     cap_area(radii[i])});
  double widths[10] = {0.2, 0.7, kPi / 2, 1.9, 2.8, kPi, 4.0, 5.1, 5.9, 6.1};
  for (int i = 0; i < 10; ++i)
    cases.push_back({Region::lune(centers[(i + 2) % 5], 0.37 * i, widths[i],
                                  i % 2 ? Boundary::closed : Boundary::open),
                     lune_area(widths[i])});

  int hits = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    Estimate e = estimate_region_area(cases[i].first, 1000000, mc_for(1000 + i));
    if (std::fabs(e.value - cases[i].second) <= 4.0 * e.std_error) ++hits;
  }
  double dt = secs_since(t0);
  std::ostringstream os;
  os << hits << "/20 within 4 sigma at 1e6 samples, " << dt << " s";
  note = os.str();
  return hits >= 19 && dt < 10.0;
}

bool crit_invariance(std::string& note) {
  Region probes[5] = {
      Region::cap(UnitVector(0.2, 0.5, 0.8), 0.6, Boundary::closed),
      Region::cap(UnitVector(-0.7, 0.1, 0.7), 1.2, Boundary::closed),
      Region::lune(UnitVector(0.3, -0.9, 0.3), 0.8, 1.5, Boundary::closed),
      Region::hemisphere(UnitVector(0.5, 0.5, -0.7), Boundary::closed),
      Region::complement(Region::cap(kZ, 0.9, Boundary::closed)),
  };
  int fair_pass = 0, biased_fail = 0;
  for (int i = 0; i < 5; ++i) {
    InvarianceResult fair = invariance_test(2000 + i, 0, probes[i], 200000, 5);
    if (fair.pass && fair.p_value >= 0.001) ++fair_pass;
    InvarianceResult biased =
        invariance_test(2000 + i, 0, probes[i], 200000, 5,
                        RotationSampler(sample_biased_toward_identity));
    if (!biased.pass) ++biased_fail;
  }
  std::ostringstream os;
  os << "uniform sampler passed " << fair_pass << "/5 probes, biased fixture rejected "
     << biased_fail << "/5, significance 0.001, 5 base points";
  note = os.str();
  return fair_pass == 5 && biased_fail == 5;
}

bool crit_expected_count(std::string& note) {
  std::vector<std::pair<Region, double>> regions = {
      {Region::cap(kZ, std::acos(0.6), Boundary::closed), 0.2},
      {lune_partition_complement(4), 0.75},
      {closed_cap_complement(0.2, UnitVector(1, 0, 0)), 0.8},
      {Region::hemisphere(UnitVector(0, 1, 0), Boundary::open), 0.5},
      {Region::lune(kZ, 0.3, 1.3, Boundary::closed), lune_area(1.3)},
      {Region::union_of({Region::cap(kZ, 0.3, Boundary::closed),
                         Region::cap(-kZ, 0.4, Boundary::closed)}),
       cap_area(0.3) + cap_area(0.4)},
      {Region::difference(Region::cap(kZ, 1.0, Boundary::closed),
                          Region::cap(kZ, 0.3, Boundary::open)),
       cap_area(1.0) - cap_area(0.3)},
      {Region::complement(Region::union_of({Region::cap(UnitVector(1, 0, 0), 0.5,
                                                        Boundary::closed),
                                            Region::cap(UnitVector(-1, 0, 0), 0.5,
                                                        Boundary::closed)})),
       1.0 - 2.0 * cap_area(0.5)},
      {Region::cap(UnitVector(0.6, -0.8, 0), 2.2, Boundary::open), cap_area(2.2)},
      {Region::difference(Region::hemisphere(kZ, Boundary::closed),
                          Region::cap(kZ, 0.5, Boundary::open)),
       0.5 - cap_area(0.5)},
  };
  struct Pts {
    const char* preset;
    int n;
  } sets[3] = {{"antipodal-pair", 2}, {"tetrahedron", 4}, {"n-gon-on-great-circle", 7}};

  int ok = 0, total = 0;
  bool partition_case_ok = false;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    auto exact = regions[r].first.exact_area();
    if (!exact || std::fabs(*exact - regions[r].second) > 1e-12) {
      note = "closed-form area missing for a test region";
      return false;
    }
    for (const auto& s : sets) {
      PlacementProblem prob{regions[r].first, preset_pointset(s.preset, s.n), *exact};
      Estimate e = expected_count(prob, 200000, mc_for(3000 + r * 8 + s.n));
      ++total;
      // std_error can legitimately be 0 (antipodal pair on an open hemisphere
      // scores exactly 1 for every rotation); equality is then required.
      bool good = std::fabs(e.value - s.n * *exact) <= 4.0 * e.std_error;
      if (good) ++ok;
      if (r == 1 && s.n == 4) partition_case_ok = good && std::fabs(4 * *exact - 3.0) < 1e-12;
    }
  }
  std::ostringstream os;
  os << ok << "/" << total
     << " region-pointset pairs within 4 sigma of n*area at 2e5 rotations; "
     << "quarter-partition complement with n=4 targets 3.0: "
     << (partition_case_ok ? "yes" : "no");
  note = os.str();
  return ok == total && partition_case_ok;
}

bool crit_placement_search(std::string& note) {
  auto t0 = Clock::now();
  Region variants[2] = {closed_cap_complement(0.24),
                        Region::complement(Region::lune(kZ, 1.0, 0.24 * kTwoPi,
                                                        Boundary::closed))};
  PointSet tet = preset_pointset("tetrahedron");
  int found = 0, runs = 0;
  for (const Region& m : variants) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      PlacementProblem prob{m, tet, 0.76};
      PlacementResult res = find_placement(prob, 1000, mc_for(seed));
      ++runs;
      if (res.status == PlacementStatus::found && res.samples_used <= 1000 &&
          res.rotation && hit_count(prob, *res.rotation) == 4)
        ++found;
    }
  }
  bool measures_ok = true;
  for (const Region& m : variants) {
    PlacementProblem prob{m, tet, 0.76};
    MeasureResult mr = good_rotation_measure(prob, 400000, mc_for(1));
    if (!(mr.estimate.value >= 0.04 - 4.0 * mr.estimate.std_error)) measures_ok = false;
  }
  double dt = secs_since(t0);
  std::ostringstream os;
  os << found << "/" << runs << " searches found a fit within 1000 rotations; measure >= "
     << "0.04 - 4 sigma on both region shapes: " << (measures_ok ? "yes" : "no") << "; " << dt
     << " s";
  note = os.str();
  return found == runs && measures_ok && dt < 30.0;
}

bool crit_sharpness(std::string& note) {
  PlacementProblem prob{Region::hemisphere(kZ, Boundary::open),
                        preset_pointset("antipodal-pair"), 0.5};
  PlacementResult res = find_placement(prob, 100000, mc_for(5));
  MeasureResult mr = good_rotation_measure(prob, 100000, mc_for(5));
  std::ostringstream os;
  os << "status " << (res.status == PlacementStatus::found ? "found" : "not_found")
     << " after 1e5 rotations, measure " << mr.estimate.value << " (4 sigma = "
     << 4 * mr.estimate.std_error << ")";
  note = os.str();
  return res.status == PlacementStatus::not_found &&
         mr.estimate.value <= 4.0 * mr.estimate.std_error;
}

bool crit_transport(std::string& note) {
  auto t0 = Clock::now();
  Region m = closed_cap_complement(0.2);
  Region mp = lune_partition_complement(4);

  TransportBuildOptions opts;
  opts.seed = 1;
  opts.mc = mc_for(1);
  TransportPlan plan = build_transport_plan(m, mp, opts);
  PlanReport rep = validate_plan(plan, m, mp, 100000, 2);
  double dt = secs_since(t0);

  bool rounds_ok = !plan.rounds.empty() && plan.rounds.back().kind == "covering";
  int packing = 0;
  double last_s = 0, last_sp = 0;
  for (const auto& r : plan.rounds) {
    if (r.kind != "packing") continue;
    ++packing;
    double bound = std::pow(0.5, packing) + 4.0 * r.area_stderr;
    if (r.area_sp > bound) rounds_ok = false;
    last_s = r.area_s;
    last_sp = r.area_sp;
  }
  bool stop_ok = packing > 0 && last_s > 4.0 * last_sp;

  // The command-line validate path must agree and exit cleanly.
  int cli_code = -1;
  {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "rotplace_acceptance";
    fs::create_directories(dir);
    fs::path plan_path = dir / "plan.json";
    fs::path m_path = dir / "m.json";
    fs::path mp_path = dir / "mp.json";
    save_plan_file(plan, plan_path.string());
    save_region_file(m, m_path.string());
    save_region_file(mp, mp_path.string());
    std::ostringstream out, err;
    cli_code = run_cli({"transport", "--region", m_path.string(), "--region2",
                        mp_path.string(), "--samples", "100000", "--seed", "2", "--validate",
                        plan_path.string(), "--out", plan_path.string()},
                       out, err);
  }

  std::ostringstream os;
  os << plan.pairs.size() << " pairs, disjoint=" << rep.disjoint
     << ", containment=" << rep.containment_rate << " (" << rep.containment_samples
     << "), coverage=" << rep.coverage_rate << " (" << rep.coverage_samples
     << "), witness=" << rep.witness_ok << ", halving bounds " << (rounds_ok ? "held" : "broke")
     << " over " << packing << " packing rounds, stop rule " << (stop_ok ? "met" : "missed")
     << ", cli validate exit " << cli_code << ", " << dt << " s";
  note = os.str();
  return rep.disjoint && rep.containment_rate == 1.0 && rep.coverage_samples == 100000 &&
         rep.coverage_rate >= 0.999 && rep.witness_ok && rounds_ok && stop_ok &&
         cli_code == 0 && dt < 300.0;
}

bool crit_lattice_sweep(std::string& note) {
  PlanarPred disk = [](double x, double y) { return x * x + y * y < 1.0; };
  double eps_list[4] = {0.1, 0.05, 0.025, 0.0125};
  double err[4];
  for (int i = 0; i < 4; ++i) {
    auto inner = count_inner_squares(disk, eps_list[i], 1.1);
    err[i] = std::fabs(static_cast<double>(inner.size()) * eps_list[i] * eps_list[i] - kPi);
  }
  double c_fit = std::max(err[0] / eps_list[0], err[1] / eps_list[1]);
  bool ok = true;
  for (int i = 0; i < 4; ++i)
    if (err[i] > c_fit * eps_list[i] + 1e-12) ok = false;
  std::ostringstream os;
  os << "C=" << c_fit << " fitted on the two coarse grids; errors";
  for (int i = 0; i < 4; ++i) os << " " << err[i] << "<=" << c_fit * eps_list[i];
  note = os.str();
  return ok;
}

bool crit_distortion(std::string& note) {
  std::ostringstream os;
  bool ok = true;
  for (double theta : {0.05, 0.1, 0.2}) {
    CapCover cover = build_cap_cover(theta);
    DistortionReport rep = validate_distortion(cover, 10000, 4000);
    os << "theta=" << theta << ": " << cover.size() << " caps "
       << (rep.pass ? "pass" : "FAIL") << " at m=cos(theta); ";
    if (!rep.pass) ok = false;
  }
  CapCover cover = build_cap_cover(0.2);
  DistortionReport bad = validate_distortion(cover, 10000, 4000, std::cos(0.15));
  os << "inflated m=cos(0.15) on the theta=0.2 cover "
     << (bad.pass ? "was not rejected" : "rejected");
  if (bad.pass) ok = false;
  note = os.str();
  return ok;
}

bool crit_determinism(std::string& note) {
  bool ok = true;
  std::ostringstream os;

  Region reg = closed_cap_complement(0.2);
  Estimate a1 = estimate_region_area(reg, 200000, mc_for(9));
  Estimate a2 = estimate_region_area(reg, 200000, mc_for(9));
  ok = ok && std::memcmp(&a1.value, &a2.value, sizeof(double)) == 0 &&
       a1.samples == a2.samples;

  McConfig serial = mc_for(9);
  serial.policy = ExecPolicy::serial;
  Estimate a3 = estimate_region_area(reg, 200000, serial);
  ok = ok && std::memcmp(&a1.value, &a3.value, sizeof(double)) == 0;
  os << "area estimates bitwise equal across reruns and policies: " << (ok ? "yes" : "no");

  PlacementProblem prob{reg, preset_pointset("tetrahedron"), 0.8};
  PlacementResult p1 = find_placement(prob, 5000, mc_for(9));
  PlacementResult p2 = find_placement(prob, 5000, mc_for(9));
  bool place_ok = p1.status == p2.status && p1.samples_used == p2.samples_used &&
                  p1.rotation && p2.rotation &&
                  std::memcmp(p1.rotation->m.data(), p2.rotation->m.data(),
                              9 * sizeof(double)) == 0;
  ok = ok && place_ok;
  os << "; placement rotation bytes equal: " << (place_ok ? "yes" : "no");

  // Full build twice on a small instance: serialized plans must match exactly.
  Region tm = Region::cap(kZ, std::acos(1 - 2 * 0.04), Boundary::open);
  Region tmp = Region::cap(kZ, std::acos(1 - 2 * 0.004), Boundary::open);
  TransportBuildOptions topts;
  topts.seed = 3;
  topts.cover_stop_streak = 400;
  topts.diag_samples = 50000;
  std::string plan1 = plan_to_json_text(build_transport_plan(tm, tmp, topts));
  std::string plan2 = plan_to_json_text(build_transport_plan(tm, tmp, topts));
  ok = ok && plan1 == plan2;
  os << "; serialized transport plans identical: " << (plan1 == plan2 ? "yes" : "no");

  // CSV layer, wall-clock column excluded.
  auto strip_wall = [](const std::string& csv) {
    std::istringstream is(csv);
    std::string line, out;
    while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "rotplace_acceptance";
  fs::create_directories(dir);
  fs::path m_path = dir / "m9.json";
  save_region_file(reg, m_path.string());
  std::ostringstream o1, o2, e1, e2;
  int c1 = run_cli({"measure", "--region", m_path.string(), "--points", "tetrahedron",
                    "--samples", "50000", "--seed", "9"},
                   o1, e1);
  int c2 = run_cli({"measure", "--region", m_path.string(), "--points", "tetrahedron",
                    "--samples", "50000", "--seed", "9"},
                   o2, e2);
  bool csv_ok = c1 == 0 && c2 == 0 && strip_wall(o1.str()) == strip_wall(o2.str());
  ok = ok && csv_ok;
  os << "; csv identical minus wall_ms: " << (csv_ok ? "yes" : "no");

  note = os.str();
  return ok;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<bool(std::string&)> run;
  };
  std::vector<Criterion> criteria = {
      {"mc-area-matches-closed-form", crit_area_closed_form},
      {"rotation-invariance-test", crit_invariance},
      {"expected-count-identity", crit_expected_count},
      {"placement-search", crit_placement_search},
      {"hemisphere-sharpness", crit_sharpness},
      {"transport-plan", crit_transport},
      {"planar-lattice-sweep", crit_lattice_sweep},
      {"projection-distortion", crit_distortion},
      {"seeded-determinism", crit_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("%s: %s (%s)\n", ok ? "PASS" : "FAIL", c.name, detail.c_str());
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}
