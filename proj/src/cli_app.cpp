#include "rotplace/cli_app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rotplace/placement.hpp"
#include "rotplace/pointset.hpp"
#include "rotplace/region.hpp"
#include "rotplace/sampling.hpp"
#include "rotplace/transport.hpp"

namespace rotplace {

namespace {

constexpr const char* kCsvHeader =
    "command,seed,n,area,estimate,stderr,bound,status,samples_used,wall_ms";

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Row {
  std::string command;
  std::uint64_t seed = 0;
  int n = 0;
  double area = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  std::string status;
  std::uint64_t samples_used = 0;
  std::int64_t wall_ms = 0;

  std::string to_csv() const {
    std::ostringstream os;
    os << command << ',' << seed << ',' << n << ',' << fmt(area) << ',' << fmt(estimate) << ','
       << fmt(std_error) << ',' << fmt(bound) << ',' << status << ',' << samples_used << ','
       << wall_ms;
    return os.str();
  }
};

class WallClock {
 public:
  std::int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool is_preset_name(const std::string& s) {
  return s == "tetrahedron" || s == "antipodal-pair" || s == "n-gon-on-great-circle";
}

PointSet resolve_points(const ExperimentConfig& cfg) {
  if (cfg.points_spec.empty()) throw std::invalid_argument("--points is required");
  if (is_preset_name(cfg.points_spec)) return preset_pointset(cfg.points_spec, cfg.n);
  return load_pointset_file(cfg.points_spec);
}

// Exact area when the CSG tree supports it, MC otherwise (the MC estimate is
// reused so the row never pays for two passes).
double area_column(const Region& r, const Estimate& mc) {
  auto exact = r.exact_area();
  return exact ? *exact : mc.value;
}

void emit(std::ostream& out, const ExperimentConfig& cfg, const Row& row) {
  out << kCsvHeader << '\n' << row.to_csv() << '\n';
  if (!cfg.out_path.empty() && cfg.command != "place" && cfg.command != "transport") {
    std::ofstream f(cfg.out_path);
    f << kCsvHeader << '\n' << row.to_csv() << '\n';
  }
}

McConfig mc_config(const ExperimentConfig& cfg) {
  McConfig mc;
  mc.seed = cfg.seed;
  mc.streams = cfg.streams;
  mc.policy = ExecPolicy::parallel;
  return mc;
}

int cmd_area(const ExperimentConfig& cfg, std::ostream& out) {
  Region region = load_region_file(cfg.region_path);
  McConfig mc = mc_config(cfg);
  WallClock clock;
  Estimate est = estimate_region_area(region, cfg.samples, mc);
  Row row{"area", cfg.seed, 0, area_column(region, est), est.value, est.std_error,
          0.0,    "ok",     est.samples};
  row.wall_ms = clock.ms();
  emit(out, cfg, row);
  return 0;
}

int cmd_expected_count(const ExperimentConfig& cfg, std::ostream& out) {
  Region region = load_region_file(cfg.region_path);
  PointSet points = resolve_points(cfg);
  McConfig mc = mc_config(cfg);
  PlacementProblem prob{region, points, region.exact_area()};
  WallClock clock;
  Estimate est = expected_count(prob, cfg.samples, mc);
  Estimate area_mc = estimate_region_area(region, cfg.samples, mc);
  double area = area_column(region, area_mc);
  Row row{"expected-count", cfg.seed,       points.n(), area, est.value,
          est.std_error,    points.n() * area, "ok",     est.samples};
  row.wall_ms = clock.ms();
  emit(out, cfg, row);
  return 0;
}

int cmd_measure(const ExperimentConfig& cfg, std::ostream& out) {
  Region region = load_region_file(cfg.region_path);
  PointSet points = resolve_points(cfg);
  McConfig mc = mc_config(cfg);
  PlacementProblem prob{region, points, region.exact_area()};
  WallClock clock;
  MeasureResult res = good_rotation_measure(prob, cfg.samples, mc);
  Estimate area_mc = estimate_region_area(region, cfg.samples / 4 + 1, mc);
  Row row{"measure",
          cfg.seed,
          points.n(),
          area_column(region, area_mc),
          res.estimate.value,
          res.estimate.std_error,
          res.lower_bound,
          "ok",
          res.estimate.samples};
  row.wall_ms = clock.ms();
  emit(out, cfg, row);
  return 0;
}

int cmd_place(const ExperimentConfig& cfg, std::ostream& out) {
  Region region = load_region_file(cfg.region_path);
  PointSet points = resolve_points(cfg);
  McConfig mc = mc_config(cfg);
  PlacementProblem prob{region, points, region.exact_area()};
  WallClock clock;
  PlacementResult res = find_placement(prob, cfg.budget, mc);
  bool found = res.status == PlacementStatus::found;
  Estimate area_mc = estimate_region_area(region, 100000, mc);
  Row row{"place",
          cfg.seed,
          points.n(),
          area_column(region, area_mc),
          res.good_measure.value,
          res.good_measure.std_error,
          res.lower_bound,
          found ? "found" : "not_found",
          res.samples_used};
  row.wall_ms = clock.ms();
  emit(out, cfg, row);
  if (!cfg.out_path.empty()) {
    nlohmann::json j;
    j["status"] = row.status;
    j["samples_used"] = res.samples_used;
    j["refined"] = res.refined;
    if (res.rotation) {
      nlohmann::json m = nlohmann::json::array();
      for (double v : res.rotation->m) m.push_back(v);
      j["rotation"] = m;
    }
    std::ofstream f(cfg.out_path);
    f << j.dump(2) << '\n';
  }
  return found ? 0 : 2;
}

int cmd_transport(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.region2_path.empty())
    throw std::invalid_argument("transport requires --region2 for the target M'");
  Region m = load_region_file(cfg.region_path);
  Region mp = load_region_file(cfg.region2_path);
  McConfig mc = mc_config(cfg);

  WallClock clock;
  TransportPlan plan;
  if (!cfg.validate_path.empty()) {
    plan = load_plan_file(cfg.validate_path);
  } else {
    TransportBuildOptions opts;
    opts.seed = cfg.seed;
    opts.mc = mc;
    if (cfg.budget_set) opts.cover_stop_streak = cfg.budget;
    plan = build_transport_plan(m, mp, opts);
    std::string plan_path = cfg.out_path.empty() ? "plan.json" : cfg.out_path;
    save_plan_file(plan, plan_path);
    err << "plan written to " << plan_path << " (" << plan.pairs.size() << " pairs)\n";
  }

  PlanReport rep = validate_plan(plan, m, mp, cfg.samples, cfg.seed);
  Estimate area_mc = estimate_region_area(m, 100000, mc);
  Row row{"transport",
          cfg.seed,
          static_cast<int>(plan.pairs.size()),
          area_column(m, area_mc),
          rep.coverage_rate,
          std::sqrt(rep.coverage_rate * (1.0 - rep.coverage_rate) /
                    static_cast<double>(rep.coverage_samples ? rep.coverage_samples : 1)),
          rep.containment_rate,
          rep.pass() ? "pass" : "fail",
          rep.coverage_samples};
  row.wall_ms = clock.ms();
  emit(out, cfg, row);

  std::string report_path =
      (cfg.out_path.empty() ? std::string("plan.json") : cfg.out_path) + ".report.json";
  nlohmann::json j;
  j["disjoint"] = rep.disjoint;
  j["containment_rate"] = rep.containment_rate;
  j["containment_samples"] = rep.containment_samples;
  j["coverage_rate"] = rep.coverage_rate;
  j["coverage_samples"] = rep.coverage_samples;
  j["witness_ok"] = rep.witness_ok;
  j["pass"] = rep.pass();
  std::ofstream f(report_path);
  f << j.dump(2) << '\n';

  return rep.pass() ? 0 : 3;
}

int cmd_sharpness(const ExperimentConfig& cfg, std::ostream& out) {
  Region obstruction = load_region_file(cfg.region_path);
  PointSet points = resolve_points(cfg);
  McConfig mc = mc_config(cfg);
  int grid = static_cast<int>(std::sqrt(static_cast<double>(cfg.budget)));
  if (grid < 8) grid = 8;
  if (grid > 256) grid = 256;
  WallClock clock;
  AdversarialResult res = adversarial_min_search(obstruction, points, grid, 60, cfg.seed);
  Estimate area_mc = estimate_region_area(obstruction, cfg.samples, mc);
  double area = area_column(obstruction, area_mc);
  double complement_bound =
      std::clamp(points.n() * (1.0 - area) - (points.n() - 1), 0.0, 1.0);
  Row row{"sharpness", cfg.seed,        points.n(),  area, static_cast<double>(res.min_hits),
          0.0,         complement_bound, "recorded", res.evaluations};
  row.wall_ms = clock.ms();
  emit(out, cfg, row);
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.region_path.empty()) throw std::invalid_argument("--region is required");
    if (cfg.command == "area") return cmd_area(cfg, out);
    if (cfg.command == "expected-count") return cmd_expected_count(cfg, out);
    if (cfg.command == "measure") return cmd_measure(cfg, out);
    if (cfg.command == "place") return cmd_place(cfg, out);
    if (cfg.command == "transport") return cmd_transport(cfg, out, err);
    if (cfg.command == "sharpness") return cmd_sharpness(cfg, out);
    throw std::invalid_argument("unknown command: " + cfg.command);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sphere placement experiments"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  const char* names[] = {"area", "expected-count", "measure", "place", "transport", "sharpness"};
  const char* blurbs[] = {"Monte Carlo region area against the closed form when available",
                          "mean number of rotated points landing in the region",
                          "fraction of rotations placing every point inside, with the area bound",
                          "search for one rotation placing the whole set inside",
                          "build and validate an area transport plan between two regions",
                          "adversarial search for the rotation minimizing obstruction hits"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--region", cfg.region_path, "region JSON path")->required();
    sub->add_option("--region2", cfg.region2_path, "target region JSON path (transport M')");
    sub->add_option("--points", cfg.points_spec, "point-set preset name or JSON path");
    sub->add_option("--n", cfg.n, "preset point count where applicable");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--samples", cfg.samples, "Monte Carlo sample count");
    sub->add_option("--budget", cfg.budget,
                    "search budget (place: rotations; transport: covering stop streak)")
        ->each([&cfg](const std::string&) { cfg.budget_set = true; });
    sub->add_option("--streams", cfg.streams, "independent RNG streams");
    sub->add_option("--out", cfg.out_path, "artifact path (plan/rotation JSON, CSV tee)");
    sub->add_option("--validate", cfg.validate_path, "validate this stored plan JSON");
    sub->callback([&cfg, i, names] { cfg.command = names[i]; });
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 4;
  }
  return run_experiment(cfg, out, err);
}

}  // namespace rotplace
