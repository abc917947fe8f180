#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rotplace/cover.hpp"
#include "rotplace/geom.hpp"
#include "rotplace/index.hpp"
#include "rotplace/lattice.hpp"
#include "rotplace/mc.hpp"
#include "rotplace/region.hpp"

namespace rotplace {

// One plan entry: a cap inside the source region and the rotation carrying it
// onto the patch of the target region it covers.
struct TransportPair {
  Cap u;
  Rotation rho;
};

struct RoundDiag {
  int round = 0;
  std::string kind;  // "packing", "covering", or "lattice"
  double eps = 0.0;
  double theta = 0.0;
  int retries = 0;
  std::uint64_t pairs_added = 0;
  std::uint64_t sources = 0;  // lattice square counts, when applicable
  std::uint64_t targets = 0;
  double radius_start = 0.0;  // cap radius ladder endpoints, when applicable
  double radius_end = 0.0;
  double area_s = 0.0;        // MC estimate of A(S_t) after the round
  double area_sp = 0.0;       // MC estimate of A(S_t') after the round
  double area_stderr = 0.0;   // common standard error of the two estimates
  double removed_exact = 0.0; // sum of removed cap areas (packing rounds)
};

struct TransportPlan {
  std::vector<TransportPair> pairs;
  Cap witness;
  std::vector<RoundDiag> rounds;
};

// Residual state of the halving construction: the original regions minus the
// caps removed so far. Membership is exact (CSG region plus hole index).
struct HalvingState {
  Region m;
  Region mp;
  CapSet holes_m;
  CapSet holes_mp;
  CapSet reserved_m;  // blockers on the M side (the leftover witness)
  int round = 0;

  bool contains_s(const UnitVector& p) const {
    return m.contains(p) && !holes_m.covers(p, 0.0);
  }
  bool contains_sp(const UnitVector& p) const {
    return mp.contains(p) && !holes_mp.covers(p, 0.0);
  }
};

inline HalvingState make_state(const Region& m, const Region& mp) {
  HalvingState s;
  s.m = m;
  s.mp = mp;
  return s;
}

// MC area of the current S_t or S_t' under a deterministic substream.
Estimate estimate_state_area(const HalvingState& state, bool prime_side,
                             std::uint64_t samples, const McConfig& cfg, std::uint64_t salt);

// Assigns every member point to the first cover cap containing it, producing
// the pairwise-disjoint pieces whose union is the region.
class PieceDecomposition {
 public:
  PieceDecomposition(const Region& region, const CapCover& cover);
  PieceDecomposition(std::function<bool(const UnitVector&)> member, const CapCover& cover);

  int piece_count() const { return static_cast<int>(cover_.size()); }
  // -1 when p is not a member (or escapes the cover).
  int piece_index(const UnitVector& p) const;
  bool piece_contains(int i, const UnitVector& p) const { return piece_index(p) == i; }
  const CapCover& cover() const { return cover_; }

 private:
  std::function<bool(const UnitVector&)> member_;
  CapCover cover_;
  CapSet idx_;
};

PieceDecomposition disjointify(const Region& region, const CapCover& cover);

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One halving round in the literal lattice form: disjointify both sides over
// the cover, project, count inner squares, match injectively, lift matched
// squares to half-side caps, and remove them. Retries with eps/2 and a finer
// cover (up to 6 times) until at least half of A(S_t') is removed. Mutates
// `state` and appends the new pairs only on success.
RoundDiag transport_round(HalvingState& state, std::vector<TransportPair>& pairs,
                          const CapCover& cover, double eps, std::uint64_t seed,
                          const McConfig& cfg);

enum class TransportStrategy { adaptive, lattice_rounds };

struct TransportBuildOptions {
  std::uint64_t seed = 1;
  McConfig mc;  // used for the MC diagnostics
  TransportStrategy strategy = TransportStrategy::adaptive;
  double witness_radius = 0.02;
  double clearance = 1e-7;          // strict containment margin for placed caps
  std::uint64_t diag_samples = 400000;
  std::uint64_t max_pairs = 500000;
  // adaptive packing: each pair is sized by the deepest remaining pocket on
  // the target side, matched with a tight-fitting pocket on the source side
  int pocket_candidates = 48;        // pool points examined per placement
  int pocket_deep_candidates = 384;  // fallback scan when pockets look dry
  int pool_target = 256;             // candidate pool size kept per side
  double pack_shrink = 0.9;          // placed radius as a fraction of the pocket
  double min_pack_radius = 7e-4;
  // residual target area the last halving round aims to leave; keeps the
  // covering phase's cap budget (which pays an overlap overhead) inside the
  // area surplus A(M) - A(M')
  double cover_trigger_area = 0.0125;
  // adaptive covering
  double cover_scale = 2.0;   // covering radius as a multiple of the pocket
  double cover_max_radius = 6e-3;
  double min_cover_radius = 3e-4;
  std::uint64_t cover_stop_streak = 30000;
  // lattice strategy
  double lattice_theta = 0.35;
  double lattice_eps = 0.08;
  int max_rounds = 40;
};

// The end-to-end construction: halving rounds until A(S_t) > 4*A(S_t'), then a
// final covering phase, with one reserved cap as the leftover witness.
TransportPlan build_transport_plan(const Region& m, const Region& mp,
                                   const TransportBuildOptions& opts = {});

struct PlanReport {
  bool disjoint = false;
  int overlap_a = -1, overlap_b = -1;  // offending pair when not disjoint
  double containment_rate = 0.0;
  std::uint64_t containment_samples = 0;
  double coverage_rate = 0.0;
  std::uint64_t coverage_samples = 0;
  bool witness_ok = false;

  bool pass() const {
    return disjoint && containment_rate == 1.0 && coverage_rate >= 0.999 && witness_ok;
  }
};

// Checks the three plan conditions: exact pairwise disjointness of the caps,
// per-cap containment sampling against M, and coverage sampling of M' against
// the rotated caps (with a 1e-6 rad boundary band).
PlanReport validate_plan(const TransportPlan& plan, const Region& m, const Region& mp,
                         std::uint64_t samples, std::uint64_t seed);

std::string plan_to_json_text(const TransportPlan& plan);
TransportPlan plan_from_json_text(const std::string& text);
void save_plan_file(const TransportPlan& plan, const std::string& path);
TransportPlan load_plan_file(const std::string& path);

}  // namespace rotplace
