#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "rotplace/cover.hpp"
#include "rotplace/sampling.hpp"
#include "rotplace/transport.hpp"

using namespace rotplace;

namespace {

Region open_cap_of_area(double area) {
  return Region::cap(UnitVector(0, 0, 1), std::acos(1.0 - 2.0 * area), Boundary::open);
}

// Small source/target pair that drives the full build in a few seconds.
TransportBuildOptions tiny_opts() {
  TransportBuildOptions opts;
  opts.seed = 1;
  opts.cover_stop_streak = 1500;
  opts.diag_samples = 100000;
  return opts;
}

const TransportPlan& tiny_plan() {
  static TransportPlan plan =
      build_transport_plan(open_cap_of_area(0.04), open_cap_of_area(0.004), tiny_opts());
  return plan;
}

}  // namespace

TEST_CASE("state area estimates track removed caps") {
  Region m = Region::complement(Region::cap(UnitVector(0, 0, 1), std::acos(0.6), Boundary::closed));
  HalvingState state = make_state(m, Region::full());
  McConfig cfg;
  cfg.seed = 77;
  Estimate before = estimate_state_area(state, false, 200000, cfg, 0);
  CHECK(std::fabs(before.value - 0.8) <= 4 * before.std_error);

  state.holes_m.add(Cap{UnitVector(1, 0, 0), 0.5});
  Estimate after = estimate_state_area(state, false, 200000, cfg, 1);
  double expect = 0.8 - cap_area(0.5);
  CHECK(std::fabs(after.value - expect) <= 4 * after.std_error);

  Estimate full_sp = estimate_state_area(state, true, 100000, cfg, 2);
  CHECK(std::fabs(full_sp.value - 1.0) <= 4e-5);
}

TEST_CASE("disjointified pieces partition the region") {
  Region region = Region::complement(Region::cap(UnitVector(0, 1, 0), 0.9, Boundary::closed));
  CapCover cover = build_cap_cover(0.5);
  PieceDecomposition pieces = disjointify(region, cover);
  CHECK(pieces.piece_count() == cover.size());

  StreamRng rng(81, StreamTag::region_gen, 0);
  for (int i = 0; i < 5000; ++i) {
    UnitVector p = sample_sphere_point(rng);
    int idx = pieces.piece_index(p);
    if (!region.contains(p)) {
      CHECK(idx == -1);
      continue;
    }
    REQUIRE(idx >= 0);
    REQUIRE(idx < pieces.piece_count());
    int owners = 0;
    for (int k = 0; k < pieces.piece_count(); ++k)
      owners += pieces.piece_contains(k, p) ? 1 : 0;
    CHECK(owners == 1);
    CHECK(angular_distance(p, pieces.cover().centers[idx]) <= cover.theta + 1e-12);
  }
}

TEST_CASE("lattice round halves the target and stays disjoint") {
  Region mp = Region::complement(make_lune_partition(2, UnitVector(0, 0, 1))[1]);
  HalvingState state = make_state(Region::full(), mp);
  std::vector<TransportPair> pairs;
  CapCover cover = build_cap_cover(0.35);
  McConfig cfg;
  cfg.seed = 4;

  RoundDiag diag = transport_round(state, pairs, cover, 0.08, 12345, cfg);
  CHECK(diag.kind == "lattice");
  CHECK(diag.pairs_added == pairs.size());
  CHECK(diag.pairs_added > 500);
  CHECK(diag.eps <= 0.08);
  CHECK(diag.area_sp <= 0.25 + 4 * diag.area_stderr);  // halved from 1/2
  CHECK(diag.sources <= diag.targets);

  CapSet placed;
  for (const auto& pr : pairs) {
    CHECK(!placed.blocks(pr.u.center, pr.u.radius, 0.0));
    placed.add(pr.u);
    CHECK(pr.rho.is_valid(1e-9));
    CHECK(mp.contains(pr.rho.apply(pr.u.center)));
    CHECK(state.holes_mp.covers(pr.rho.apply(pr.u.center), 0.0));
  }
  CHECK(state.holes_m.size() == pairs.size());
  CHECK(state.holes_mp.size() == pairs.size());

  Estimate sp = estimate_state_area(state, true, 200000, cfg, 99);
  CHECK(std::fabs(sp.value - diag.area_sp) <= 4 * (sp.std_error + diag.area_stderr));
}

TEST_CASE("end-to-end build passes its own validation") {
  const TransportPlan& plan = tiny_plan();
  CHECK(plan.pairs.size() > 100);
  REQUIRE(!plan.rounds.empty());
  CHECK(plan.rounds.back().kind == "covering");
  CHECK(plan.witness.radius > 0.0);

  PlanReport rep =
      validate_plan(plan, open_cap_of_area(0.04), open_cap_of_area(0.004), 50000, 7);
  CHECK(rep.disjoint);
  CHECK(rep.containment_rate == 1.0);
  CHECK(rep.containment_samples >= 40000);  // floor(samples / n_caps) per cap
  CHECK(rep.coverage_rate >= 0.99);
  CHECK(rep.coverage_samples > 1000);
  CHECK(rep.witness_ok);
}

TEST_CASE("build rejects a target at least as large as the source") {
  TransportBuildOptions opts = tiny_opts();
  CHECK_THROWS_AS(build_transport_plan(open_cap_of_area(0.01), open_cap_of_area(0.02), opts),
                  std::invalid_argument);
}

TEST_CASE("plan json round trip is exact") {
  const TransportPlan& plan = tiny_plan();
  TransportPlan back = plan_from_json_text(plan_to_json_text(plan));
  REQUIRE(back.pairs.size() == plan.pairs.size());
  for (std::size_t i = 0; i < plan.pairs.size(); ++i) {
    CHECK(std::memcmp(&back.pairs[i].u.center.v, &plan.pairs[i].u.center.v, sizeof(Vec3)) == 0);
    CHECK(back.pairs[i].u.radius == plan.pairs[i].u.radius);
    CHECK(std::memcmp(back.pairs[i].rho.m.data(), plan.pairs[i].rho.m.data(),
                      9 * sizeof(double)) == 0);
  }
  CHECK(back.witness.radius == plan.witness.radius);
  REQUIRE(back.rounds.size() == plan.rounds.size());
  CHECK(back.rounds.back().area_sp == plan.rounds.back().area_sp);

  auto path = std::filesystem::temp_directory_path() / "rotplace_plan_rt.json";
  save_plan_file(plan, path.string());
  TransportPlan loaded = load_plan_file(path.string());
  CHECK(loaded.pairs.size() == plan.pairs.size());
  std::filesystem::remove(path);
}

TEST_CASE("validator flags broken plans") {
  Region m = open_cap_of_area(0.04);
  Region mp = open_cap_of_area(0.004);
  Cap inside{UnitVector(Vec3{std::sin(0.1), 0, std::cos(0.1)}), 0.03};
  Cap witness{UnitVector(Vec3{-std::sin(0.25), 0, std::cos(0.25)}), 0.02};

  TransportPlan overlapping;
  overlapping.pairs = {TransportPair{inside, Rotation::identity()},
                       TransportPair{inside, Rotation::identity()}};
  overlapping.witness = witness;
  PlanReport rep1 = validate_plan(overlapping, m, mp, 2000, 1);
  CHECK(!rep1.disjoint);
  CHECK(rep1.overlap_a == 0);
  CHECK(rep1.overlap_b == 1);
  CHECK(!rep1.pass());

  TransportPlan escaping;
  escaping.pairs = {TransportPair{Cap{UnitVector(0, 0, -1), 0.05}, Rotation::identity()}};
  escaping.witness = witness;
  PlanReport rep2 = validate_plan(escaping, m, mp, 2000, 1);
  CHECK(rep2.containment_rate < 1.0);
  CHECK(!rep2.pass());

  TransportPlan sparse;  // nothing maps onto the target
  sparse.pairs = {TransportPair{inside, Rotation::identity()}};
  sparse.witness = witness;
  PlanReport rep3 = validate_plan(sparse, m, mp, 2000, 1);
  CHECK(rep3.coverage_rate < 0.5);
  CHECK(!rep3.pass());

  TransportPlan no_witness = sparse;
  no_witness.witness = Cap{};
  CHECK(!validate_plan(no_witness, m, mp, 500, 1).witness_ok);

  TransportPlan witness_outside = sparse;
  witness_outside.witness = Cap{UnitVector(1, 0, 0), 0.02};
  CHECK(!validate_plan(witness_outside, m, mp, 500, 1).witness_ok);

  TransportPlan witness_clash = sparse;
  witness_clash.witness = Cap{inside.center, 0.02};  // collides with the placed cap
  CHECK(!validate_plan(witness_clash, m, mp, 500, 1).witness_ok);
}

TEST_CASE("pair budget overflow raises a transport error") {
  TransportBuildOptions opts = tiny_opts();
  opts.max_pairs = 10;
  CHECK_THROWS_AS(build_transport_plan(open_cap_of_area(0.04), open_cap_of_area(0.004), opts),
                  TransportError);
}

TEST_CASE("plan parser rejects malformed documents") {
  CHECK_THROWS(plan_from_json_text("not a plan"));
  CHECK_THROWS(plan_from_json_text("{}"));
  CHECK_THROWS(load_plan_file("/nonexistent/plan.json"));
}
