#include "oblab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>
#include <vector>

#include <json.hpp>

#include "oblab/blowup.hpp"
#include "oblab/diagnostics.hpp"
#include "oblab/epiperimetric.hpp"
#include "oblab/exact.hpp"
#include "oblab/io.hpp"
#include "oblab/quadrature.hpp"
#include "oblab/solver.hpp"

namespace oblab {

namespace {

using nlohmann::json;

int thread_cap() {
  const char* env = std::getenv("OBSTACLE_LAB_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v > 0 ? v : 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const int threads = std::min<std::size_t>(thread_cap(), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

struct Check {
  std::string name;
  bool pass;
  double value;
  double threshold;
};

json checks_json(const std::vector<Check>& checks, bool& all_pass) {
  json arr = json::array();
  all_pass = true;
  for (const Check& c : checks) {
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value},
                   {"threshold", c.threshold}});
    all_pass = all_pass && c.pass;
  }
  return arr;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json params_json(const ProblemParams& p) {
  return {{"n", p.n}, {"s", p.s}, {"a", p.a}, {"h", p.h}, {"R_dom", p.R_dom}};
}

struct Setup {
  ProblemParams params;
  std::string experiment;
  std::string outdir;
  std::string datum_kind;   // cone | perturbation | file
  double cone_e = 1.0;      // n = 2 sign; n = 3 angle via e_angle
  double e_angle = 0.0;
  double lambda = 1.0;
  int perturbation_id = 0;
  std::string field_file;
  std::string field_source; // exact | solve
  std::string center_spec;  // auto | "x0[,x1]"
  double r_min = -1.0;
  double r_max = -1.0;
  PsorOptions psor;
};

Setup read_setup(const Config& cfg) {
  Setup st;
  st.params = ProblemParams::make(cfg.get_int_or("params.n", 2), cfg.get_double("params.s"),
                                  cfg.get_double("params.h"),
                                  cfg.get_double_or("params.R_dom", 1.0));
  st.experiment = cfg.get_string("experiment.type");
  st.outdir = cfg.get_string("output.dir");
  st.datum_kind = cfg.get_string_or("experiment.datum", "cone");
  st.cone_e = cfg.get_double_or("experiment.e", 1.0);
  st.e_angle = cfg.get_double_or("experiment.e_angle", 0.0);
  st.lambda = cfg.get_double_or("experiment.lambda", 1.0);
  st.perturbation_id = cfg.get_int_or("experiment.perturbation_id", 0);
  st.field_file = cfg.get_string_or("experiment.field_file", "");
  st.field_source = cfg.get_string_or("experiment.field_source", "exact");
  st.center_spec = cfg.get_string_or("experiment.center", "auto");
  st.r_min = cfg.get_double_or("radii.r_min", -1.0);
  st.r_max = cfg.get_double_or("radii.r_max", 0.8 * st.params.R_dom);
  st.psor.omega = cfg.get_double_or("tolerances.psor_omega", 1.5);
  st.psor.tol = cfg.get_double_or("tolerances.psor_tol", 1e-10);
  st.psor.max_iter = cfg.get_int_or("tolerances.psor_max_iter", 200000);
  cfg.check_all_touched();
  if (st.psor.tol <= 0.0) throw std::runtime_error("config: tolerances.psor_tol must be > 0");
  return st;
}

Point cone_direction(const Setup& st) {
  if (st.params.n == 2) return make_point(st.cone_e >= 0 ? 1.0 : -1.0, 0);
  return make_point(std::cos(st.e_angle), std::sin(st.e_angle), 0);
}

std::function<double(const Point&)> datum_function(const Setup& st, const Grid& g) {
  if (st.datum_kind == "cone") {
    const Point e = cone_direction(st);
    const double lam = st.lambda, s = st.params.s;
    const int n = st.params.n;
    return [e, lam, s, n](const Point& p) { return lam * h_e_eval(p, e, s, n); };
  }
  if (st.datum_kind == "perturbation") {
    auto family = default_family(g);
    if (st.perturbation_id < 0 || st.perturbation_id >= static_cast<int>(family.size()))
      throw std::runtime_error("config: perturbation_id out of range");
    HomogeneousDatum d = family[st.perturbation_id];
    const double s = st.params.s;
    return [d, s](const Point& p) {
      const double nr = norm(p);
      if (nr < 1e-300) return 0.0;
      return std::pow(nr, 1.0 + s) * d.trace(make_point(p[0] / nr, p[1] / nr, p[2] / nr));
    };
  }
  if (st.datum_kind == "file") {
    if (st.field_file.empty()) throw std::runtime_error("config: field datum needs field_file");
    auto loaded = std::make_shared<LoadedField>(read_snapshot(st.field_file));
    auto grid = std::make_shared<Grid>(loaded->params);
    auto field = std::make_shared<ScalarField>(*grid);
    field->v = loaded->values;
    return [grid, field](const Point& p) { return interpolate(*field, p); };
  }
  throw std::runtime_error("config: unknown datum kind '" + st.datum_kind + "'");
}

// Field under study plus bookkeeping about how it was produced.
struct StudyField {
  ScalarField u;
  bool solved = false;
  bool converged = true;
  int iterations = 0;
};

StudyField make_study_field(const Setup& st, const Grid& g) {
  StudyField sf;
  auto fn = datum_function(st, g);
  if (st.field_source == "exact") {
    sf.u = sample(g, fn);
    return sf;
  }
  if (st.field_source != "solve")
    throw std::runtime_error("config: field_source must be exact or solve");
  DiscreteProblem prob = assemble(g, fn);
  Solution sol = solve_psor(prob, st.psor);
  sf.u = std::move(sol.u);
  sf.solved = true;
  sf.converged = sol.converged;
  sf.iterations = sol.iterations;
  return sf;
}

Point parse_center(const Setup& st, const StudyField& sf, bool& certified) {
  certified = false;
  if (st.center_spec != "auto") {
    Point c = make_point(0, 0, 0);
    std::size_t pos = 0;
    std::string spec = st.center_spec;
    for (int d = 0; d < st.params.n - 1; ++d) {
      std::size_t used = 0;
      c[d] = std::stod(spec.substr(pos), &used);
      pos += used;
      if (d + 2 < st.params.n && pos < spec.size() && spec[pos] == ',') ++pos;
    }
    return c;
  }
  const FreeBoundary fb = contact_and_boundary(sf.u, 1e-10);
  if (fb.boundary.empty())
    throw std::runtime_error("center=auto: no free-boundary nodes detected");
  // boundary node nearest the origin, then sub-grid refinement
  const Grid& g = *sf.u.grid;
  std::size_t best = fb.boundary.front();
  double bd = 1e300;
  for (std::size_t f : fb.boundary) {
    const double d = norm(g.point(f));
    if (d < bd) {
      bd = d;
      best = f;
    }
  }
  certified = true;
  return refine_boundary_point(sf.u, best, 1e-10);
}

void ensure_outdir(const std::string& dir) { std::filesystem::create_directories(dir); }

void write_summary(const std::string& outdir, const json& summary) {
  write_text_file(outdir + "/summary.json", summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int run_solve(const Setup& st) {
  Grid g(st.params);
  auto fn = datum_function(st, g);
  DiscreteProblem prob = assemble(g, fn);
  Solution sol = solve_psor(prob, st.psor);
  const KktReport kkt = kkt_check(prob, sol, st.psor.tol);

  write_snapshot(sol.u, st.outdir + "/solution.snapshot");

  std::vector<Check> checks;
  checks.push_back({"psor_converged", sol.converged, sol.final_update, st.psor.tol});
  checks.push_back({"plane_min_nonnegative", kkt.min_plane_value >= -1e-14,
                    kkt.min_plane_value, -1e-14});
  checks.push_back({"flux_sign", kkt.max_flux_defect <= 100 * st.psor.tol, kkt.max_flux_defect,
                    100 * st.psor.tol});
  checks.push_back({"symmetric", is_symmetric(sol.u, 1e-12), 0.0, 1e-12});

  bool pass;
  json summary = {{"experiment", "solve"},
                  {"params", params_json(st.params)},
                  {"results",
                   {{"iterations", sol.iterations},
                    {"energy", sol.energy},
                    {"final_update", sol.final_update},
                    {"contact_count", kkt.contact_count},
                    {"max_offcontact_residual", kkt.max_offcontact_residual},
                    {"max_flux_defect", kkt.max_flux_defect},
                    {"max_complementarity", kkt.max_complementarity},
                    {"min_plane_value", kkt.min_plane_value}}},
                  {"checks", checks_json(checks, pass)},
                  {"pass", pass},
                  {"metadata", {{"timestamp", timestamp()}}}};
  write_summary(st.outdir, summary);
  return pass ? 0 : 1;
}

int run_diagnostics(const Setup& st) {
  Grid g(st.params);
  StudyField sf = make_study_field(st, g);
  bool certified = false;
  const Point x0 = parse_center(st, sf, certified);

  DiagField df(sf.u);
  const double r_min = st.r_min > 0 ? st.r_min : 8 * g.h();
  DiagnosticsSeries series = build_series(df, x0, r_min, st.r_max);
  write_text_file(st.outdir + "/diagnostics.csv", series_csv(series));

  std::vector<Check> checks;
  checks.push_back({"solver_converged", sf.converged, 0.0, 0.0});
  const auto vN = monotonicity_scan(series, MonotoneQuantity::N);
  const auto vW = monotonicity_scan(series, MonotoneQuantity::W);
  const auto vH = monotonicity_scan(series, MonotoneQuantity::H_over_r);
  checks.push_back({"monotone_N", vN.empty(), double(vN.size()), 0.0});
  checks.push_back({"monotone_W", vW.empty(), double(vW.size()), 0.0});
  checks.push_back({"monotone_H_over_r", vH.empty(), double(vH.size()), 0.0});
  json floor_json;
  if (certified) {
    const FloorReport fr = frequency_floor_check(series, st.params.s);
    checks.push_back({"frequency_floor", fr.pass, fr.min_N, fr.floor});
    floor_json = {{"min_N", fr.min_N}, {"floor", fr.floor}};
  }

  bool pass;
  json summary = {{"experiment", "diagnostics"},
                  {"params", params_json(st.params)},
                  {"inputs",
                   {{"center", {x0[0], x0[1], x0[2]}},
                    {"certified_on_boundary", certified},
                    {"r_min", series.samples.front().r},
                    {"r_max", series.samples.back().r}}},
                  {"results",
                   {{"radii", series.samples.size()},
                    {"N_at_r_max", series.samples.back().N},
                    {"W_at_r_max", series.samples.back().W},
                    {"frequency_floor", floor_json}}},
                  {"checks", checks_json(checks, pass)},
                  {"pass", pass},
                  {"metadata", {{"timestamp", timestamp()}}}};
  write_summary(st.outdir, summary);
  return pass ? 0 : 1;
}

int run_blowup(const Setup& st) {
  Grid g(st.params);
  StudyField sf = make_study_field(st, g);
  bool certified = false;
  const Point x0 = parse_center(st, sf, certified);
  if (!certified) {
    // explicit centers are accepted only if they sit on the detected boundary
    const FreeBoundary fb = contact_and_boundary(sf.u, 1e-10);
    for (std::size_t f : fb.boundary) {
      const Point p = g.point(f);
      if (std::abs(p[0] - x0[0]) < g.h() && std::abs(p[1] - x0[1]) < g.h()) certified = true;
    }
  }

  DiagField df(sf.u);
  const double r_min = st.r_min > 0 ? st.r_min : 8 * g.h();
  const PointClass cls = classify_point(df, x0, r_min, certified);

  ProblemParams unit_params = st.params;
  unit_params.R_dom = 1.0;
  Grid unit(unit_params);

  std::vector<double> radii;
  for (double r = std::min(st.r_max, 0.8 * g.R() - norm(x0)); r >= r_min; r *= 0.5)
    radii.push_back(r);
  const auto fits = blowup_fit(sf.u, unit, x0, radii);
  write_text_file(st.outdir + "/classification.csv", classification_csv(x0, fits, g.n()));

  DiagnosticsSeries series = build_series(df, x0, r_min, radii.front(), false);
  const DecayFit decay = decay_fit(series);
  json rate_json;
  std::vector<Check> checks;
  checks.push_back({"solver_converged", sf.converged, 0.0, 0.0});
  checks.push_back({"classified_regular", cls == PointClass::Regular, 0.0, 0.0});
  if (!decay.degenerate) {
    const RateCheck rc = uniqueness_rate_check(sf.u, unit, x0, radii, decay.gamma_emp);
    checks.push_back({"uniqueness_rate", rc.pass, rc.exponent, rc.required});
    rate_json = {{"exponent", rc.exponent},
                 {"required", rc.required},
                 {"degenerate", rc.degenerate}};
  }

  json fit_rows = json::array();
  for (const auto& b : fits)
    fit_rows.push_back({{"r", b.r},
                        {"lambda", b.element.lambda},
                        {"e", {b.element.e[0], b.element.e[1]}},
                        {"dist", b.dist},
                        {"N", b.N}});

  bool pass;
  json summary = {{"experiment", "blowup"},
                  {"params", params_json(st.params)},
                  {"inputs", {{"center", {x0[0], x0[1], x0[2]}}, {"certified", certified}}},
                  {"results",
                   {{"class", cls == PointClass::Regular        ? "regular"
                              : cls == PointClass::HigherFrequency ? "higher-frequency"
                                                                   : "not-on-boundary"},
                    {"fits", fit_rows},
                    {"decay", {{"gamma", decay.gamma_emp}, {"degenerate", decay.degenerate}}},
                    {"uniqueness", rate_json}}},
                  {"checks", checks_json(checks, pass)},
                  {"pass", pass},
                  {"metadata", {{"timestamp", timestamp()}}}};
  write_summary(st.outdir, summary);
  return pass ? 0 : 1;
}

int run_epiperimetric(const Setup& st) {
  ProblemParams p = st.params;
  if (std::abs(p.R_dom - 1.0) > 1e-12)
    throw std::runtime_error("epiperimetric experiment requires R_dom = 1");
  Grid g(p);
  const auto family = default_family(g);

  std::vector<EpiReport> table(family.size());
  parallel_for(family.size(),
               [&](std::size_t i) { table[i] = epiperimetric_gap(family[i], g); });

  KappaSweep sweep;
  sweep.table = table;
  sweep.min_kappa = std::numeric_limits<double>::infinity();
  for (const EpiReport& r : table) {
    if (r.status == EpiStatus::Violated) sweep.any_violated = true;
    if (r.status == EpiStatus::Ok) {
      sweep.any_ok = true;
      sweep.min_kappa = std::min(sweep.min_kappa, r.kappa_emp);
    }
  }
  if (!sweep.any_ok) sweep.min_kappa = 0.0;

  write_text_file(st.outdir + "/epiperimetric.csv", epi_csv(sweep.table));

  std::vector<Check> checks;
  checks.push_back({"no_violation", !sweep.any_violated, sweep.any_violated ? 1.0 : 0.0, 0.0});
  checks.push_back({"some_nondegenerate", sweep.any_ok, sweep.any_ok ? 1.0 : 0.0, 0.0});
  checks.push_back({"min_kappa_positive", sweep.min_kappa > 0.0, sweep.min_kappa, 0.0});

  bool pass;
  json summary = {{"experiment", "epiperimetric"},
                  {"params", params_json(st.params)},
                  {"results", {{"min_kappa", sweep.min_kappa}, {"data", sweep.table.size()}}},
                  {"checks", checks_json(checks, pass)},
                  {"pass", pass},
                  {"metadata", {{"timestamp", timestamp()}}}};
  write_summary(st.outdir, summary);
  return pass ? 0 : 1;
}

int run_verify_oracle(const Setup& st) {
  // enlarged domain so that r = 1 stays inside the trusted region
  ProblemParams p = st.params;
  p.R_dom = 1.25;
  Grid g(p);
  const Point e = cone_direction(st);
  const double s = p.s;
  const int n = p.n;

  const ScalarField he = sample(g, [&](const Point& q) { return h_e_eval(q, e, s, n); });
  DiagField df(he);

  // grid-free angular references for H(1) and D(1) = (1+s) H(1)
  const double H_ref = sphere_integral_fn(
      g, [&](const Point& q) { const double v = h_e_eval(q, e, s, n); return v * v; },
      make_point(0, 0, 0), 1.0, true);
  const double D_ref = (1.0 + s) * H_ref;

  const HD hd = H_D_at(df, make_point(0, 0, 0), 1.0);
  const double h = p.h;

  std::vector<Check> checks;
  checks.push_back({"H_matches_reference", std::abs(hd.H - H_ref) <= 5 * h * H_ref,
                    std::abs(hd.H - H_ref) / H_ref, 5 * h});
  checks.push_back({"D_matches_reference", std::abs(hd.D - D_ref) <= 5 * h * D_ref,
                    std::abs(hd.D - D_ref) / D_ref, 5 * h});

  double worst_N = 0.0, worst_W = 0.0;
  for (double r : {0.1, 0.2, 0.4, 0.6, 0.8}) {
    const HD hr = H_D_at(df, make_point(0, 0, 0), r);
    const double N = r * hr.D / hr.H;
    worst_N = std::max(worst_N, std::abs(N - (1.0 + s)) / (1.0 + s));
    const double W = hr.D / std::pow(r, n + 1) - (1.0 + s) * hr.H / std::pow(r, n + 2);
    worst_W = std::max(worst_W, std::abs(W) / ((1.0 + s) * hr.H / std::pow(r, n + 2)));
  }
  checks.push_back({"N_equals_1ps", worst_N <= 5 * h, worst_N, 5 * h});
  checks.push_back({"W_vanishes", worst_W <= 5 * h, worst_W, 5 * h});

  const IdentityResiduals ir = identity_residuals(df, make_point(0, 0, 0), 0.5);
  const double res_scale = ir.scale;
  checks.push_back({"rellich_residual", ir.rellich <= 10 * h * res_scale,
                    ir.rellich / res_scale, 10 * h});
  checks.push_back({"Hprime_residual", ir.H_prime <= 10 * h * res_scale,
                    ir.H_prime / res_scale, 10 * h});
  checks.push_back({"Dprime_residual", ir.D_prime <= 10 * h * res_scale,
                    ir.D_prime / res_scale, 10 * h});
  checks.push_back({"Dboundary_residual", ir.D_boundary <= 10 * h * res_scale,
                    ir.D_boundary / res_scale, 10 * h});

  bool pass;
  json summary = {{"experiment", "verify-oracle"},
                  {"params", params_json(st.params)},
                  {"results",
                   {{"H_1", hd.H},
                    {"D_1", hd.D},
                    {"H_reference", H_ref},
                    {"worst_rel_N_error", worst_N},
                    {"worst_rel_W", worst_W}}},
                  {"checks", checks_json(checks, pass)},
                  {"pass", pass},
                  {"metadata", {{"timestamp", timestamp()}}}};
  write_summary(st.outdir, summary);
  return pass ? 0 : 1;
}

} // namespace

int run_experiment(const Config& cfg) {
  const Setup st = read_setup(cfg);
  ensure_outdir(st.outdir);
  if (st.experiment == "solve") return run_solve(st);
  if (st.experiment == "diagnostics") return run_diagnostics(st);
  if (st.experiment == "blowup") return run_blowup(st);
  if (st.experiment == "epiperimetric") return run_epiperimetric(st);
  if (st.experiment == "verify-oracle") return run_verify_oracle(st);
  throw std::runtime_error("config: unknown experiment type '" + st.experiment + "'");
}

std::string describe() {
  return R"(obstacle-lab experiment runner, config schema v1

EXPERIMENTS
  solve          assemble and solve the thin-obstacle problem, certify the
                 Euler-Lagrange/complementarity system, write a solution
                 snapshot
  diagnostics    H_a, D_a, N_a, W at a geometric radius ladder with the
                 Rellich / H' / D' / boundary-D / Weiss-derivative residuals,
                 monotonicity scans and the frequency floor
  blowup         free-boundary detection, point classification, cone fits of
                 the rescaled fields, decay and uniqueness-rate checks
  epiperimetric  the shipped 20-datum family: W of the homogeneous extension
                 vs the inner minimizer, empirical kappa per datum
  verify-oracle  closed-form h_e identity battery at the configured s and h

CONFIG (flat key = value with [section] headers, # comments)
  [params]
    n            ambient dimension, 2 (default) or 3
    s            fractional order in (0,1)              (required)
    h            grid spacing; must divide R_dom        (required)
    R_dom        domain radius (default 1)
  [experiment]
    type         solve | diagnostics | blowup | epiperimetric | verify-oracle
    datum        cone (default) | perturbation | file
    e            cone direction sign for n = 2 (default +1)
    e_angle      cone direction angle in the plane for n = 3 (default 0)
    lambda       cone scale (default 1)
    perturbation_id   index into the shipped family, 0..19
    field_file   snapshot path for datum = file
    field_source exact (sample the datum) | solve (minimize with the datum
                 as boundary data); default exact
    center       auto (detect + refine the free boundary) | explicit plane
                 coordinates "x0" or "x0,x1"
  [radii]
    r_min        smallest radius (default 8h)
    r_max        largest radius (default 0.8 R_dom)
  [tolerances]
    psor_omega   relaxation in (0,2), default 1.5
    psor_tol     PSOR stop tolerance, default 1e-10
    psor_max_iter  default 200000
  [output]
    dir          artifact directory                     (required)

OUTPUT FILES
  solution.snapshot   "# obstacle-lab field snapshot v1", one-line JSON
                      header {n,s,a,h,R_dom}, then index,x0,x1[,x2],value
                      rows for every lattice node, 17 significant digits
  diagnostics.csv     header: r,H,D,N,W,res_rellich,res_Hp,res_Dp,res_Db,res_weiss
  classification.csv  header (n=2): x0_0,r,lambda,e_0,dist,N
                      header (n=3): x0_0,x0_1,r,lambda,e_0,e_1,dist,N
  epiperimetric.csv   header: datum_id,W_c,W_star,kappa_emp,status
  summary.json        {experiment, params, inputs?, results, checks[],
                      pass, metadata.timestamp}; timestamps appear only here

Exit status is nonzero iff any check fails or a solver does not converge.
OBSTACLE_LAB_THREADS caps worker threads (default 1); outputs do not depend
on the thread count.
)";
}

} // namespace oblab
