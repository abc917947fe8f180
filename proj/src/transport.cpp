#include "rotplace/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "rotplace/sampling.hpp"

namespace rotplace {

namespace {

double cap_area_of(double radius) { return (1.0 - std::cos(radius)) / 2.0; }

double region_area_or_mc(const Region& r, const McConfig& cfg, std::uint64_t salt) {
  if (auto exact = r.exact_area()) return *exact;
  McConfig c = cfg;
  c.seed = stream_seed(cfg.seed, StreamTag::transport_area, salt);
  return estimate_region_area(r, 400000, c).value;
}

}  // namespace

Estimate estimate_state_area(const HalvingState& state, bool prime_side,
                             std::uint64_t samples, const McConfig& cfg, std::uint64_t salt) {
  McConfig c = cfg;
  c.seed = stream_seed(cfg.seed, StreamTag::transport_area, salt);
  auto acc = run_streams<CountAcc>(
      c, StreamTag::transport_area, samples,
      [&](StreamRng& rng, std::uint64_t count, CountAcc& a) {
        for (std::uint64_t i = 0; i < count; ++i) {
          UnitVector p = sample_sphere_point(rng);
          a.add(prime_side ? state.contains_sp(p) : state.contains_s(p));
        }
      });
  return acc.estimate();
}

PieceDecomposition::PieceDecomposition(const Region& region, const CapCover& cover)
    : PieceDecomposition([region](const UnitVector& p) { return region.contains(p); }, cover) {}

PieceDecomposition::PieceDecomposition(std::function<bool(const UnitVector&)> member,
                                       const CapCover& cover)
    : member_(std::move(member)), cover_(cover) {
  for (const auto& c : cover_.centers) idx_.add(Cap{c, cover_.theta});
}

int PieceDecomposition::piece_index(const UnitVector& p) const {
  if (!member_(p)) return -1;
  return static_cast<int>(idx_.first_containing(p, 0.0));
}

PieceDecomposition disjointify(const Region& region, const CapCover& cover) {
  return PieceDecomposition(region, cover);
}

namespace {

// Returns true when the closed cap sits strictly inside the state's S side,
// judged by the (sound) clearance lower bound plus exact hole distances.
bool cap_fits_s(const HalvingState& state, const UnitVector& center, double radius,
                double gap) {
  if (state.m.signed_clearance(center) < radius + gap) return false;
  if (state.holes_m.blocks(center, radius, gap)) return false;
  if (state.reserved_m.blocks(center, radius, gap)) return false;
  return true;
}

bool cap_fits_sp(const HalvingState& state, const UnitVector& center, double radius,
                 double gap) {
  if (state.mp.signed_clearance(center) < radius + gap) return false;
  if (state.holes_mp.blocks(center, radius, gap)) return false;
  return true;
}

struct RoundAttempt {
  std::vector<TransportPair> pairs;
  std::uint64_t sources = 0;
  std::uint64_t targets = 0;
};

// One lattice pass at the given cover and eps over a trial copy of the state.
RoundAttempt lattice_pass(HalvingState& trial, const CapCover& cover, double eps,
                          double gap) {
  RoundAttempt out;
  std::vector<ProjectionFrame> frames;
  frames.reserve(cover.centers.size());
  for (const auto& c : cover.centers) frames.push_back(make_frame(c));

  PieceDecomposition pieces_s([&trial](const UnitVector& p) { return trial.contains_s(p); },
                              cover);
  PieceDecomposition pieces_sp([&trial](const UnitVector& p) { return trial.contains_sp(p); },
                               cover);

  double bound = std::sin(cover.theta) + 2.0 * eps;
  std::vector<FramedSquare> sources, targets;
  for (int i = 0; i < cover.size(); ++i) {
    const ProjectionFrame* f = &frames[static_cast<std::size_t>(i)];
    auto planar_in = [f, i](const PieceDecomposition* pieces) -> PlanarPred {
      return [pieces, f, i](double x, double y) {
        double rr = x * x + y * y;
        if (rr >= 1.0) return false;
        return pieces->piece_index(lift_point(*f, Planar{x, y})) == i;
      };
    };
    for (const auto& sq : count_inner_squares(planar_in(&pieces_sp), eps, bound))
      sources.push_back(FramedSquare{i, sq});
    for (const auto& sq : count_inner_squares(planar_in(&pieces_s), eps, bound))
      targets.push_back(FramedSquare{i, sq});
  }
  out.sources = sources.size();
  out.targets = targets.size();

  auto matching = match_squares(sources, targets);  // throws CapacityError upward
  for (const auto& [src, dst] : matching) {
    Cap u = lift_square_to_cap(dst.sq, eps, frames[static_cast<std::size_t>(dst.frame)],
                               RadiusRule::half_eps);
    Cap v = lift_square_to_cap(src.sq, eps, frames[static_cast<std::size_t>(src.frame)],
                               RadiusRule::half_eps);
    // The lattice construction makes same-frame caps disjoint; cross-frame and
    // boundary effects are resolved by dropping any pair that fails the exact
    // clearance test.
    if (!cap_fits_s(trial, u.center, u.radius, gap)) continue;
    trial.holes_m.add(u);
    trial.holes_mp.add(v);
    out.pairs.push_back(TransportPair{u, cap_rotation(u, v)});
  }
  return out;
}

}  // namespace

RoundDiag transport_round(HalvingState& state, std::vector<TransportPair>& pairs,
                          const CapCover& cover, double eps, std::uint64_t seed,
                          const McConfig& cfg) {
  McConfig mc = cfg;
  mc.seed = seed;
  constexpr std::uint64_t kDiagSamples = 200000;
  std::uint64_t salt = static_cast<std::uint64_t>(state.round) * 64;
  Estimate before = estimate_state_area(state, true, kDiagSamples, mc, salt);

  RoundDiag diag;
  diag.round = state.round + 1;
  diag.kind = "lattice";
  diag.eps = eps;
  diag.theta = cover.theta;

  // An S' side that is already statistically empty makes the round a no-op.
  if (before.value <= 4.0 * before.std_error) {
    Estimate s_after = estimate_state_area(state, false, kDiagSamples, mc, salt + 1);
    diag.area_s = s_after.value;
    diag.area_sp = before.value;
    diag.area_stderr = std::max(before.std_error, s_after.std_error);
    state.round += 1;
    return diag;
  }

  double gap = 1e-7;
  CapCover working = cover;
  double working_eps = eps;
  for (int retry = 0; retry <= 6; ++retry) {
    HalvingState trial = state;
    RoundAttempt attempt;
    bool capacity_ok = true;
    try {
      attempt = lattice_pass(trial, working, working_eps, gap);
    } catch (const CapacityError&) {
      capacity_ok = false;
    }
    if (capacity_ok) {
      Estimate after = estimate_state_area(trial, true, kDiagSamples, mc,
                                           salt + 2 + static_cast<std::uint64_t>(retry));
      double tol = 4.0 * std::sqrt(before.std_error * before.std_error +
                                   after.std_error * after.std_error);
      if (after.value <= before.value / 2.0 + tol) {
        Estimate s_after = estimate_state_area(trial, false, kDiagSamples, mc, salt + 32);
        diag.retries = retry;
        diag.eps = working_eps;
        diag.theta = working.theta;
        diag.sources = attempt.sources;
        diag.targets = attempt.targets;
        diag.pairs_added = attempt.pairs.size();
        diag.area_s = s_after.value;
        diag.area_sp = after.value;
        diag.area_stderr = std::max(after.std_error, s_after.std_error);
        for (auto& p : attempt.pairs) pairs.push_back(p);
        state = std::move(trial);
        state.round += 1;
        return diag;
      }
    }
    working_eps /= 2.0;
    if (retry + 1 <= 6) working = build_cap_cover(working.theta * 0.8);
  }
  throw TransportError("halving round failed to remove half of the target area after retries");
}

namespace {

struct AdaptiveAccounting {
  double area_m = 0.0;
  double area_mp = 0.0;
  double removed = 0.0;  // identical on both sides: pairs are congruent
  double area_s() const { return area_m - removed; }
  double area_sp() const { return area_mp - removed; }
};

Cap place_witness(HalvingState& state, const TransportBuildOptions& opts) {
  StreamRng rng(opts.seed, StreamTag::transport_place, 0);
  double r = opts.witness_radius;
  for (int attempt = 0; attempt < 200000; ++attempt) {
    UnitVector p = sample_sphere_point(rng);
    if (!state.m.contains(p)) continue;
    if (state.m.signed_clearance(p) < r + opts.clearance) continue;
    Cap w{p, r};
    state.reserved_m.add(w);
    return w;
  }
  throw TransportError("could not place the leftover witness cap inside the source region");
}

double sq(double x) { return x * x; }

// Candidate pool for one side: points known, when pushed, to lie in the
// remaining part of that side. Entries are revalidated on access, so pools
// survive across rounds as holes accumulate.
struct PocketPool {
  std::deque<UnitVector> pts;
  StreamRng rng;
  PocketPool(std::uint64_t seed, std::uint64_t salt)
      : rng(seed, StreamTag::transport_pack, salt) {}
};

template <typename MemberF>
void refill_pool(PocketPool& pool, MemberF&& member, int want, std::uint64_t max_attempts) {
  std::uint64_t attempts = 0;
  while (static_cast<int>(pool.pts.size()) < want && attempts < max_attempts) {
    ++attempts;
    UnitVector p = sample_sphere_point(pool.rng);
    if (member(p)) pool.pts.push_back(p);
  }
}

struct Pocket {
  UnitVector center;
  double clear = -1.0;
};

// Examines up to `want` still-valid pool points. With need > 0 prefers the
// tightest pocket that still admits radius `need`; otherwise, or when none is
// wide enough, returns the deepest pocket seen. Unused candidates go back to
// the pool's far end so later scans see fresh points first.
template <typename MemberF, typename ClearF>
std::optional<Pocket> scan_pockets(PocketPool& pool, int want, double need, MemberF&& member,
                                   ClearF&& clear_fn) {
  std::vector<Pocket> seen;
  seen.reserve(static_cast<std::size_t>(want));
  while (static_cast<int>(seen.size()) < want && !pool.pts.empty()) {
    UnitVector p = pool.pts.back();
    pool.pts.pop_back();
    if (!member(p)) continue;
    seen.push_back(Pocket{p, clear_fn(p)});
  }
  if (seen.empty()) return std::nullopt;
  std::size_t pick = 0;
  bool pick_fits = need > 0.0 && seen[0].clear >= need;
  for (std::size_t i = 1; i < seen.size(); ++i) {
    bool fits = need > 0.0 && seen[i].clear >= need;
    bool better;
    if (fits != pick_fits) better = fits;
    else if (fits) better = seen[i].clear < seen[pick].clear;
    else better = seen[i].clear > seen[pick].clear;
    if (better) {
      pick = i;
      pick_fits = fits;
    }
  }
  Pocket out = seen[pick];
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (i != pick) pool.pts.push_front(seen[i].center);
  return out;
}

// Hill-climbs a pocket to a local clearance maximum; the step halves as the
// ascent stalls, so the walk settles on the pocket center. A sampled point
// typically sits a third of the way into its pocket, and placing there would
// shatter the pocket into slivers; centering first keeps the packing greedy
// in the Apollonian sense.
template <typename ClearF>
Pocket polish_pocket(Pocket start, ClearF&& clear_fn, double floor_step) {
  Pocket cur = start;
  double h = std::max(0.5 * std::max(cur.clear, 0.0), 8.0 * floor_step);
  int evals = 0;
  while (h > floor_step && evals < 200) {
    UnitVector t1 = any_orthogonal(cur.center);
    Vec3 t2 = cross(cur.center.v, t1.v);
    Pocket best = cur;
    for (int j = 0; j < 8; ++j) {
      double a = static_cast<double>(j) * (kPi / 4.0);
      Vec3 dir = t1.v * std::cos(a) + t2 * std::sin(a);
      UnitVector q(cur.center.v * std::cos(h) + dir * std::sin(h));
      ++evals;
      double c = clear_fn(q);
      if (c > best.clear) best = Pocket{q, c};
    }
    if (best.clear > cur.clear) cur = best;
    else h *= 0.5;
  }
  return cur;
}

// Pocket search: scan the pool, center the pick, and rescan deeper when the
// shallow result looks dry.
template <typename MemberF, typename ClearF>
std::optional<Pocket> find_pocket(PocketPool& pool, double need, double polish_floor,
                                  const TransportBuildOptions& opts, MemberF&& member,
                                  ClearF&& clear_fn) {
  if (static_cast<int>(pool.pts.size()) < opts.pocket_candidates)
    refill_pool(pool, member, opts.pool_target, 400000);
  auto got = scan_pockets(pool, opts.pocket_candidates, need, member, clear_fn);
  if (got && (need <= 0.0 || got->clear < need))
    *got = polish_pocket(*got, clear_fn, polish_floor);
  double enough = need > 0.0 ? need : opts.min_pack_radius / opts.pack_shrink;
  if (got && got->clear >= enough) return got;
  refill_pool(pool, member, opts.pool_target * 4, 1600000);
  auto deep = scan_pockets(pool, opts.pocket_deep_candidates, need, member, clear_fn);
  if (deep && (need <= 0.0 || deep->clear < need))
    *deep = polish_pocket(*deep, clear_fn, polish_floor);
  if (!deep) return got;
  if (!got) return deep;
  if (need > 0.0 && (got->clear >= need) != (deep->clear >= need))
    return deep->clear >= need ? deep : got;
  if (need > 0.0 && got->clear >= need) return got->clear <= deep->clear ? got : deep;
  return got->clear >= deep->clear ? got : deep;
}

constexpr double kGiantRadius = 0.25;

// O(1) "certainly inside some hole" pruning for rejection sampling. Dense
// grids hold the mid-sized caps (memory scales as 1/cell^2, which rules the
// smallest caps out); the few giant caps are checked directly, and anything
// below the fine grid's threshold falls through to the exact index.
struct HoleIndexFast {
  std::vector<Cap> giants;
  OccupancyGrid coarse{1.5e-3};  // marks caps >= 4.5e-3
  OccupancyGrid fine{5.0e-4};    // marks caps >= 1.5e-3

  void note(const Cap& c) {
    if (c.radius > kGiantRadius) giants.push_back(c);
    else if (c.radius >= 4.5e-3) coarse.mark(c);
    else fine.mark(c);
  }
  bool certainly_covered(const UnitVector& p) const {
    for (const auto& g : giants)
      if (chord_sq(p.v, g.center.v) <= sq(chord_of_angle(g.radius))) return true;
    return coarse.certainly_covered(p) || fine.certainly_covered(p);
  }
};

// State shared by the packing rounds and the covering phase: candidate pools,
// sampling accelerators, and the clearance clamp that tracks the packing
// frontier (clearance queries get expensive when asked for exact values far
// beyond the current cap scale, and the caller never uses that excess).
struct PackContext {
  PocketPool pool_v;
  PocketPool pool_u;
  HoleIndexFast fast_v;
  HoleIndexFast fast_u;
  double calibre = 4.0;

  explicit PackContext(std::uint64_t seed) : pool_v(seed, 0), pool_u(seed, 1) {}

  void note_pair(const Cap& cu, const Cap& cv, double floor_r) {
    fast_u.note(cu);
    fast_v.note(cv);
    calibre = std::min(calibre, std::max(6.0 * cv.radius, floor_r));
  }
};

// One adaptive packing round: remove congruent disjoint cap pairs until the
// target mass is gone from S'. Each pair is sized by the deepest pocket found
// on the S' side and matched against the tightest fitting pocket of S, so S
// keeps its large pockets for later rounds.
RoundDiag adaptive_round(HalvingState& state, std::vector<TransportPair>& pairs,
                         AdaptiveAccounting& acct, PackContext& ctx,
                         const TransportBuildOptions& opts) {
  int round = state.round + 1;
  double a_sp = acct.area_sp();
  double target = 0.55 * a_sp;
  // When halving once more would already satisfy the stop rule, push deeper so
  // the residual left for the covering phase fits its cap budget (covering
  // pays an overlap overhead, so the residual must sit well inside the area
  // surplus), while still removing more than half.
  double gap_const = acct.area_m - acct.area_mp;
  double stop_at = gap_const / 3.0;
  if (0.45 * a_sp < stop_at) {
    double land = std::min(opts.cover_trigger_area, 0.75 * stop_at);
    target = std::max(0.55 * a_sp, a_sp - land);
  }

  RoundDiag diag;
  diag.round = round;
  diag.kind = "packing";

  auto member_v = [&state, &ctx](const UnitVector& p) {
    return state.mp.contains(p) && !ctx.fast_v.certainly_covered(p) &&
           !state.holes_mp.covers(p, 0.0);
  };
  auto member_u = [&state, &ctx](const UnitVector& p) {
    return state.m.contains(p) && !ctx.fast_u.certainly_covered(p) &&
           !state.holes_m.covers(p, 0.0) && !state.reserved_m.covers(p, 0.0);
  };
  auto clear_v = [&state, &ctx](const UnitVector& p) {
    double c = std::min(ctx.calibre, state.mp.signed_clearance(p));
    if (c <= 0.0) return c;
    return state.holes_mp.min_clearance(p, c);
  };

  double polish_floor = opts.min_pack_radius / 8.0;
  double removed_this = 0.0;
  std::uint64_t added = 0;
  int stale = 0;
  while (removed_this < target) {
    if (pairs.size() >= opts.max_pairs)
      throw TransportError("plan exceeded the maximum pair budget");
    auto v = find_pocket(ctx.pool_v, 0.0, polish_floor, opts, member_v, clear_v);
    double rv = v ? opts.pack_shrink * (v->clear - opts.clearance) : 0.0;
    if (rv < opts.min_pack_radius) {
      if (removed_this > 0.5 * a_sp) break;  // strictly more than half: good enough
      throw TransportError("target-side pockets fell below the minimum radius before halving");
    }
    double need = rv + opts.clearance;
    auto clear_u = [&state, cap_at = 1.25 * need](const UnitVector& p) {
      double c = std::min(cap_at, state.m.signed_clearance(p));
      if (c <= 0.0) return c;
      c = state.holes_m.min_clearance(p, c);
      if (c <= 0.0) return c;
      return state.reserved_m.min_clearance(p, c);
    };
    auto u = find_pocket(ctx.pool_u, need, polish_floor, opts, member_u, clear_u);
    double ru = u ? (u->clear >= need ? rv : opts.pack_shrink * (u->clear - opts.clearance))
                  : 0.0;
    double r = std::min(rv, ru);
    if (r < opts.min_pack_radius) {
      if (removed_this > 0.5 * a_sp) break;
      throw TransportError("source-side pockets fell below the minimum radius before halving");
    }
    Cap cu{u->center, r}, cv{v->center, r};
    if (!cap_fits_s(state, cu.center, r, opts.clearance) ||
        !cap_fits_sp(state, cv.center, r, opts.clearance)) {
      // The fit test is the arbiter of exact accounting; a disagreement with
      // the clearance query means the pocket was stale, so just retry.
      if (++stale > 1000)
        throw TransportError("pocket clearances kept disagreeing with the fit test");
      continue;
    }
    state.holes_m.add(cu);
    state.holes_mp.add(cv);
    ctx.note_pair(cu, cv, 8.0 * opts.min_pack_radius);
    pairs.push_back(TransportPair{cu, rotation_aligning(cu.center, cv.center)});
    removed_this += cap_area_of(r);
    if (added == 0) diag.radius_start = r;
    diag.radius_end = r;
    ++added;
  }

  acct.removed += removed_this;
  state.round += 1;
  diag.pairs_added = added;
  diag.removed_exact = removed_this;

  std::uint64_t salt = static_cast<std::uint64_t>(round) * 64;
  Estimate sp = estimate_state_area(state, true, opts.diag_samples, opts.mc, salt);
  Estimate s = estimate_state_area(state, false, opts.diag_samples, opts.mc, salt + 1);
  diag.area_sp = sp.value;
  diag.area_s = s.value;
  diag.area_stderr = std::max(sp.std_error, s.std_error);
  return diag;
}

// Final phase: cover what is left of S' with small caps. Each uncovered
// sample point is climbed to its pocket center and the covering cap is sized
// to swallow the pocket (these caps may overlap M''s boundary and each other;
// only their partners inside S must stay disjoint). Terminates once a long
// streak of uniform samples finds nothing uncovered.
RoundDiag covering_phase(HalvingState& state, std::vector<TransportPair>& pairs,
                         PackContext& ctx, const TransportBuildOptions& opts) {
  RoundDiag diag;
  diag.round = state.round + 1;
  diag.kind = "covering";
  diag.radius_start = opts.cover_max_radius;
  diag.radius_end = opts.min_cover_radius;

  StreamRng rng_c(opts.seed, StreamTag::transport_cover, 1);

  auto member_u = [&state, &ctx](const UnitVector& p) {
    return state.m.contains(p) && !ctx.fast_u.certainly_covered(p) &&
           !state.holes_m.covers(p, 0.0) && !state.reserved_m.covers(p, 0.0);
  };
  auto clear_cover = [&state, &opts](const UnitVector& p) {
    double c = std::min(2.0 * opts.cover_max_radius, state.mp.signed_clearance(p));
    if (c <= 0.0) return c;
    return state.holes_mp.min_clearance(p, c);
  };

  double polish_floor = opts.min_cover_radius / 4.0;
  std::uint64_t streak = 0;
  std::uint64_t added = 0;
  std::uint64_t guard = 0;
  int u_fail = 0;
  std::deque<UnitVector> backlog;
  while (true) {
    // Sweep uniform draws until uncovered points accumulate or the all-clear
    // streak is reached. Only draws landing in M' count toward the streak, so
    // the exit residual is a fraction of A(M') and small targets are not
    // fooled by a stream of draws that never test anything; batching the
    // finds amortizes the M' hit rate over many placements per sweep.
    while (streak < opts.cover_stop_streak && backlog.size() < 64) {
      if (++guard > 400000000)
        throw TransportError("covering phase exceeded its sampling budget");
      UnitVector p = sample_sphere_point(rng_c);
      if (!state.mp.contains(p)) continue;
      ++streak;
      if (ctx.fast_v.certainly_covered(p)) continue;
      if (state.holes_mp.covers(p, 0.0)) continue;
      backlog.push_back(p);
      streak = 0;
    }
    if (backlog.empty()) break;

    while (!backlog.empty()) {
      UnitVector p = backlog.front();
      backlog.pop_front();
      // An earlier placement from the same sweep may have covered it already.
      if (ctx.fast_v.certainly_covered(p) || state.holes_mp.covers(p, 0.0)) continue;

      Pocket pk = polish_pocket(Pocket{p, clear_cover(p)}, clear_cover, polish_floor);
      double rc = std::clamp(opts.cover_scale * pk.clear, opts.min_cover_radius,
                             opts.cover_max_radius);

      double need = rc + opts.clearance;
      auto clear_u = [&state, cap_at = 1.25 * need](const UnitVector& p2) {
        double c = std::min(cap_at, state.m.signed_clearance(p2));
        if (c <= 0.0) return c;
        c = state.holes_m.min_clearance(p2, c);
        if (c <= 0.0) return c;
        return state.reserved_m.min_clearance(p2, c);
      };
      auto u = find_pocket(ctx.pool_u, need, polish_floor, opts, member_u, clear_u);
      double ru = u ? (u->clear >= need ? rc : opts.pack_shrink * (u->clear - opts.clearance))
                    : 0.0;
      double r = std::min(rc, ru);
      if (r < opts.min_cover_radius || !cap_fits_s(state, u->center, r, opts.clearance)) {
        // p stays uncovered; a later sweep will rediscover it.
        if (++u_fail > 64)
          throw TransportError("covering phase could not place partner caps");
        continue;
      }
      // Keep the sampled point inside the cover cap even when the polish
      // walked past the cap radius; otherwise thin features are rediscovered
      // forever while every cap lands just out of reach, and the residual
      // stalls.
      UnitVector cv_center = pk.center;
      double walk = angular_distance(p, pk.center);
      if (walk > 0.7 * r) {
        Vec3 t = pk.center.v - p.v * std::cos(walk);
        double d_c = 0.7 * r;
        cv_center = UnitVector(p.v * std::cos(d_c) + t * (std::sin(d_c) / std::sin(walk)));
      }
      Cap cu{u->center, r}, cv{cv_center, r};
      state.holes_m.add(cu);
      state.holes_mp.add(cv);
      ctx.note_pair(cu, cv, 8.0 * opts.min_pack_radius);
      pairs.push_back(TransportPair{cu, rotation_aligning(cu.center, cv.center)});
      ++added;
      u_fail = 0;
      if (pairs.size() > opts.max_pairs)
        throw TransportError("plan exceeded the maximum pair budget");
    }
  }

  state.round += 1;
  diag.pairs_added = added;

  std::uint64_t salt = static_cast<std::uint64_t>(diag.round) * 64;
  Estimate sp = estimate_state_area(state, true, opts.diag_samples, opts.mc, salt);
  Estimate s = estimate_state_area(state, false, opts.diag_samples, opts.mc, salt + 1);
  diag.area_sp = sp.value;
  diag.area_s = s.value;
  diag.area_stderr = std::max(sp.std_error, s.std_error);
  return diag;
}

}  // namespace

TransportPlan build_transport_plan(const Region& m, const Region& mp,
                                   const TransportBuildOptions& opts) {
  AdaptiveAccounting acct;
  acct.area_m = region_area_or_mc(m, opts.mc, 1);
  acct.area_mp = region_area_or_mc(mp, opts.mc, 2);
  {
    McConfig c = opts.mc;
    c.seed = stream_seed(opts.seed, StreamTag::transport_area, 3);
    Estimate em = m.exact_area() ? Estimate{*m.exact_area(), 0.0, 0}
                                 : estimate_region_area(m, 400000, c);
    c.seed = stream_seed(opts.seed, StreamTag::transport_area, 4);
    Estimate ep = mp.exact_area() ? Estimate{*mp.exact_area(), 0.0, 0}
                                  : estimate_region_area(mp, 400000, c);
    double tol = 4.0 * std::sqrt(em.std_error * em.std_error + ep.std_error * ep.std_error);
    if (!(em.value > ep.value + tol))
      throw std::invalid_argument(
          "transport requires the source region to be larger than the target");
  }

  TransportPlan plan;
  HalvingState state = make_state(m, mp);
  state.round = 0;

  plan.witness = place_witness(state, opts);

  if (opts.strategy == TransportStrategy::lattice_rounds) {
    double theta = opts.lattice_theta;
    double eps = opts.lattice_eps;
    McConfig mc = opts.mc;
    for (int t = 0; t < opts.max_rounds; ++t) {
      std::uint64_t salt = 4096 + static_cast<std::uint64_t>(t) * 4;
      Estimate s = estimate_state_area(state, false, opts.diag_samples, mc, salt);
      Estimate sp = estimate_state_area(state, true, opts.diag_samples, mc, salt + 1);
      double tol = 4.0 * std::sqrt(s.std_error * s.std_error + 16.0 * sp.std_error * sp.std_error);
      if (s.value > 4.0 * sp.value + tol) break;
      CapCover cover = build_cap_cover(theta);
      plan.rounds.push_back(
          transport_round(state, plan.pairs, cover, eps, stream_seed(opts.seed, StreamTag::transport_pack, static_cast<std::uint64_t>(t)), mc));
      eps /= 2.0;
    }
    // Final covering: reuse the adaptive covering phase, which satisfies the
    // same conditions the lattice final round is after. Its accelerators are
    // seeded from the holes the lattice rounds left behind.
    PackContext ctx(opts.seed);
    for (const auto& c : state.holes_mp.caps()) ctx.fast_v.note(c);
    for (const auto& c : state.holes_m.caps()) ctx.fast_u.note(c);
    plan.rounds.push_back(covering_phase(state, plan.pairs, ctx, opts));
    return plan;
  }

  PackContext ctx(opts.seed);
  while (acct.area_s() <= 4.0 * acct.area_sp()) {
    if (state.round > opts.max_rounds)
      throw TransportError("halving did not reach the stop rule within the round limit");
    plan.rounds.push_back(adaptive_round(state, plan.pairs, acct, ctx, opts));
  }
  plan.rounds.push_back(covering_phase(state, plan.pairs, ctx, opts));
  return plan;
}

PlanReport validate_plan(const TransportPlan& plan, const Region& m, const Region& mp,
                         std::uint64_t samples, std::uint64_t seed) {
  PlanReport rep;
  constexpr double kBand = 1e-6;  // boundary tolerance for coverage sampling

  // (i) exact pairwise disjointness via center distances.
  rep.disjoint = true;
  CapSet placed;
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    const Cap& u = plan.pairs[k].u;
    long hit = placed.first_blocking(u.center, u.radius, 0.0);
    if (hit >= 0) {
      rep.disjoint = false;
      rep.overlap_a = static_cast<int>(hit);
      rep.overlap_b = static_cast<int>(k);
      break;
    }
    placed.add(u);
  }

  // Containment: uniform samples inside each cap, tested against M.
  std::uint64_t n_caps = plan.pairs.size();
  if (n_caps > 0) {
    std::uint64_t per_cap = std::max<std::uint64_t>(1, samples / n_caps);
    StreamRng rng(seed, StreamTag::validate_containment, 0);
    std::uint64_t inside = 0, total = 0;
    for (const auto& pr : plan.pairs) {
      for (std::uint64_t i = 0; i < per_cap; ++i) {
        UnitVector p = sample_in_cap(pr.u.center, pr.u.radius, rng);
        ++total;
        if (m.contains(p)) ++inside;
      }
    }
    rep.containment_samples = total;
    rep.containment_rate = total ? static_cast<double>(inside) / total : 1.0;
  } else {
    rep.containment_rate = 1.0;
  }

  // (ii) coverage: uniform M' points against the rotated caps.
  CapSet images;
  for (const auto& pr : plan.pairs)
    images.add(Cap{pr.rho.apply(pr.u.center), pr.u.radius});
  {
    StreamRng rng(seed, StreamTag::validate_coverage, 0);
    std::uint64_t covered = 0, tested = 0, draws = 0;
    std::uint64_t max_draws = samples * 64;
    while (tested < samples && draws < max_draws) {
      ++draws;
      UnitVector p = sample_sphere_point(rng);
      if (!mp.contains(p)) continue;
      ++tested;
      if (images.covers(p, kBand)) ++covered;
    }
    rep.coverage_samples = tested;
    rep.coverage_rate = tested ? static_cast<double>(covered) / tested : 1.0;
  }

  // (iii) witness: inside M with clearance, disjoint from every placed cap.
  rep.witness_ok = plan.witness.radius > 0 &&
                   m.signed_clearance(plan.witness.center) >= plan.witness.radius &&
                   !placed.blocks(plan.witness.center, plan.witness.radius, 0.0);
  if (rep.witness_ok) {
    StreamRng rng(seed, StreamTag::validate_containment, 1);
    for (int i = 0; i < 2000; ++i) {
      UnitVector p = sample_in_cap(plan.witness.center, plan.witness.radius, rng);
      if (!m.contains(p)) {
        rep.witness_ok = false;
        break;
      }
    }
  }
  return rep;
}

namespace {

using nlohmann::json;

json cap_to_json(const Cap& c) {
  json j;
  j["center"] = json::array({c.center.x(), c.center.y(), c.center.z()});
  j["radius"] = c.radius;
  return j;
}

Cap cap_from_json(const json& j) {
  if (!j.is_object() || !j.contains("center") || !j.contains("radius"))
    throw RegionParseError("cap requires center and radius");
  const json& c = j.at("center");
  if (!c.is_array() || c.size() != 3) throw RegionParseError("cap center must have 3 numbers");
  Cap cap;
  cap.center = UnitVector(Vec3{c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
  cap.radius = j.at("radius").get<double>();
  if (!(cap.radius > 0) || cap.radius > kPi) throw RegionParseError("cap radius out of range");
  return cap;
}

}  // namespace

std::string plan_to_json_text(const TransportPlan& plan) {
  json j;
  json pairs = json::array();
  for (const auto& p : plan.pairs) {
    json e;
    e["u"] = cap_to_json(p.u);
    e["rho"] = p.rho.m;
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  j["witness"] = cap_to_json(plan.witness);
  json rounds = json::array();
  for (const auto& r : plan.rounds) {
    json e;
    e["round"] = r.round;
    e["kind"] = r.kind;
    e["eps"] = r.eps;
    e["theta"] = r.theta;
    e["retries"] = r.retries;
    e["pairs_added"] = r.pairs_added;
    e["sources"] = r.sources;
    e["targets"] = r.targets;
    e["radius_start"] = r.radius_start;
    e["radius_end"] = r.radius_end;
    e["area_s"] = r.area_s;
    e["area_sp"] = r.area_sp;
    e["area_stderr"] = r.area_stderr;
    e["removed_exact"] = r.removed_exact;
    rounds.push_back(std::move(e));
  }
  j["rounds"] = std::move(rounds);
  return j.dump(2);
}

TransportPlan plan_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw RegionParseError(std::string("invalid plan JSON: ") + e.what());
  }
  TransportPlan plan;
  try {
    for (const auto& e : j.at("pairs")) {
      TransportPair p;
      p.u = cap_from_json(e.at("u"));
      const json& rm = e.at("rho");
      if (!rm.is_array() || rm.size() != 9)
        throw RegionParseError("rotation must be 9 row-major numbers");
      for (int i = 0; i < 9; ++i) p.rho.m[static_cast<std::size_t>(i)] = rm[i].get<double>();
      if (!p.rho.is_valid(1e-6)) throw RegionParseError("plan rotation is not a valid rotation");
      plan.pairs.push_back(p);
    }
    plan.witness = cap_from_json(j.at("witness"));
    if (j.contains("rounds")) {
      for (const auto& e : j.at("rounds")) {
        RoundDiag r;
        r.round = e.value("round", 0);
        r.kind = e.value("kind", std::string());
        r.eps = e.value("eps", 0.0);
        r.theta = e.value("theta", 0.0);
        r.retries = e.value("retries", 0);
        r.pairs_added = e.value("pairs_added", 0ull);
        r.sources = e.value("sources", 0ull);
        r.targets = e.value("targets", 0ull);
        r.radius_start = e.value("radius_start", 0.0);
        r.radius_end = e.value("radius_end", 0.0);
        r.area_s = e.value("area_s", 0.0);
        r.area_sp = e.value("area_sp", 0.0);
        r.area_stderr = e.value("area_stderr", 0.0);
        r.removed_exact = e.value("removed_exact", 0.0);
        plan.rounds.push_back(std::move(r));
      }
    }
  } catch (const json::exception& e) {
    throw RegionParseError(std::string("malformed plan JSON: ") + e.what());
  }
  return plan;
}

void save_plan_file(const TransportPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RegionParseError("cannot open plan file for writing: " + path);
  out << plan_to_json_text(plan) << "\n";
}

TransportPlan load_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RegionParseError("cannot open plan file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return plan_from_json_text(ss.str());
}

}  // namespace rotplace
