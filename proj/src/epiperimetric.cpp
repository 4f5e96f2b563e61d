#include "oblab/epiperimetric.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "oblab/exact.hpp"
#include "oblab/quadrature.hpp"

namespace oblab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double datum_H(const HomogeneousDatum& c, const Grid& g) {
  return sphere_integral_fn(
      g, [&](const Point& p) { const double v = c.trace(p); return v * v; },
      make_point(0, 0, 0), 1.0, /*weighted=*/true);
}

double extension_value(const HomogeneousDatum& c, double s, const Point& p) {
  const double nr = norm(p);
  if (nr < 1e-300) return 0.0;
  const Point q = make_point(p[0] / nr, p[1] / nr, p[2] / nr);
  return std::pow(nr, 1.0 + s) * c.trace(q);
}

void require_unit_domain(const Grid& g) {
  if (std::abs(g.R() - 1.0) > 1e-12)
    throw std::invalid_argument("epiperimetric: grid must cover exactly the unit ball");
}

// |W_c| below this is quadrature noise around the cone; kappa is a ratio and
// meaningless there. Calibrated against h_e traces at h in {1/64, 1/128}.
double degeneracy_threshold(const Grid& g, double H_c) {
  return std::max(1e-8, 2.0 * std::pow(g.h(), 1.5) * std::max(H_c, 1.0));
}

} // namespace

HomogeneousDatum make_datum(const Grid& g, std::string id,
                            std::function<double(const Point&)> trace) {
  HomogeneousDatum d;
  d.id = std::move(id);
  d.trace = std::move(trace);

  const int n = g.n();
  // even symmetry in x_n, sampled on the quadrature sphere
  const int M = 128;
  for (int i = 0; i < M; ++i) {
    Point p;
    if (n == 2) {
      const double th = (i + 0.37) * 2 * kPi / M;
      p = make_point(std::cos(th), std::sin(th));
    } else {
      const double th = (i + 0.37) * kPi / M, ps = (7.0 * i + 0.51) * 2 * kPi / M;
      p = make_point(std::sin(th) * std::cos(ps), std::sin(th) * std::sin(ps), std::cos(th));
    }
    Point pm = p;
    pm[n - 1] = -pm[n - 1];
    const double v = d.trace(p), vm = d.trace(pm);
    if (std::abs(v - vm) > 1e-10 * (1.0 + std::abs(v)))
      throw std::invalid_argument("make_datum: trace is not even in x_n");
  }
  // nonnegativity where the sphere meets the plane
  double mn = 1e300;
  if (n == 2) {
    mn = std::min(d.trace(make_point(1, 0)), d.trace(make_point(-1, 0)));
  } else {
    for (int i = 0; i < 256; ++i) {
      const double ps = (i + 0.5) * 2 * kPi / 256;
      mn = std::min(mn, d.trace(make_point(std::cos(ps), std::sin(ps), 0)));
    }
  }
  d.min_plane_value = mn;
  if (mn < -1e-12)
    throw std::invalid_argument("make_datum: trace negative where the sphere meets the plane");
  return d;
}

ScalarField homogeneous_extension(const HomogeneousDatum& c, const Grid& g) {
  const double s = g.params().s;
  return sample(g, [&](const Point& p) { return extension_value(c, s, p); });
}

Solution inner_minimize(const HomogeneousDatum& c, const Grid& g) {
  require_unit_domain(g);
  const double s = g.params().s;
  const ScalarField ext = homogeneous_extension(c, g);
  DiscreteProblem prob = assemble(g, [&](const Point& p) { return extension_value(c, s, p); });
  PsorOptions opt;
  double scale = 0.0;
  for (double v : ext.v) scale = std::max(scale, std::abs(v));
  opt.tol = 1e-10 * std::max(scale, 1e-6);
  opt.initial = &ext;
  Solution sol = solve_psor(prob, opt);
  if (!sol.converged) throw std::runtime_error("inner_minimize: PSOR did not converge");
  return sol;
}

EpiReport epiperimetric_gap(const HomogeneousDatum& c, const Grid& g) {
  require_unit_domain(g);
  const double s = g.params().s;
  const double H_c = datum_H(c, g);

  const ScalarField ext = homogeneous_extension(c, g);
  DiscreteProblem prob = assemble(g, [&](const Point& p) { return extension_value(c, s, p); });
  PsorOptions opt;
  double scale = 0.0;
  for (double v : ext.v) scale = std::max(scale, std::abs(v));
  opt.tol = 1e-10 * std::max(scale, 1e-6);
  opt.initial = &ext;
  Solution sol = solve_psor(prob, opt);

  EpiReport rep;
  rep.id = c.id;
  rep.solver_converged = sol.converged;
  rep.W_c = energy(prob, ext) - (1.0 + s) * H_c;
  rep.W_star = energy(prob, sol.u) - (1.0 + s) * H_c;
  if (rep.W_star > rep.W_c + 1e-10) {
    rep.status = EpiStatus::Violated;
    return rep;
  }
  if (std::abs(rep.W_c) <= degeneracy_threshold(g, H_c)) {
    rep.status = EpiStatus::Degenerate;
    return rep;
  }
  rep.status = EpiStatus::Ok;
  rep.kappa_emp = 1.0 - rep.W_star / rep.W_c;
  return rep;
}

KappaSweep kappa_sweep(const std::vector<HomogeneousDatum>& family, const Grid& g) {
  if (family.empty()) throw std::invalid_argument("kappa_sweep: empty family");
  KappaSweep sweep;
  sweep.min_kappa = std::numeric_limits<double>::infinity();
  for (const HomogeneousDatum& d : family) {
    EpiReport rep = epiperimetric_gap(d, g);
    if (rep.status == EpiStatus::Violated) sweep.any_violated = true;
    if (rep.status == EpiStatus::Ok) {
      sweep.any_ok = true;
      sweep.min_kappa = std::min(sweep.min_kappa, rep.kappa_emp);
    }
    sweep.table.push_back(std::move(rep));
  }
  if (!sweep.any_ok) sweep.min_kappa = 0.0;
  return sweep;
}

std::vector<HomogeneousDatum> default_family(const Grid& g) {
  if (g.n() != 2)
    throw std::invalid_argument("default_family: the shipped family is defined for n = 2");
  const double s = g.params().s;

  // even cosine shapes, positive at both plane points theta = 0, pi
  const std::vector<std::function<double(double)>> shapes = {
      [](double) { return 1.0; },
      [](double th) { return 1.0 + std::cos(2 * th); },
      [](double th) { return 1.0 + 0.5 * std::cos(4 * th); },
      [](double th) {
        const double c = 1.0 + std::cos(th);
        return 0.5 + 0.5 * c * c;
      },
      [](double th) { return 1.0 + 0.5 * std::cos(2 * th) + 0.25 * std::cos(4 * th); },
  };

  std::vector<HomogeneousDatum> family;
  int qid = 0;
  for (const auto& q : shapes) {
    for (double esign : {1.0, -1.0}) {
      for (double eps : {0.1, 0.2}) {
        const Point e = make_point(esign, 0);
        char id[64];
        std::snprintf(id, sizeof id, "pert-q%d-e%+d-eps%g", qid, static_cast<int>(esign), eps);
        auto trace = [e, eps, q, s](const Point& p) {
          const double th = std::atan2(p[1], p[0]);
          double v = h_e_eval(p, e, s, 2) + eps * q(th);
          if (std::abs(p[1]) < 1e-14) v = std::max(v, 0.0); // plane safeguard clip
          return v;
        };
        family.push_back(make_datum(g, id, trace));
      }
    }
    ++qid;
  }
  return family;
}

double auxiliary_functional(const AuxiliaryInput& inp) {
  const ScalarField& z = *inp.z;
  const Grid& g = *z.grid;
  const int n = g.n();
  const double s = g.params().s;
  const double h = g.h();
  if (inp.theta < 0.0) throw std::invalid_argument("auxiliary_functional: theta must be >= 0");

  // feasibility: boundary trace matches z_j
  double trace_scale = 0.0, mismatch2 = 0.0, weight_sum = 0.0;
  const double mism = sphere_integral_fn(
      g,
      [&](const Point& p) {
        const double tv = inp.zj_trace(p);
        trace_scale = std::max(trace_scale, std::abs(tv));
        const double d = interpolate(z, p) - tv;
        return d * d;
      },
      make_point(0, 0, 0), 1.0, /*weighted=*/true);
  weight_sum = sphere_integral_fn(
      g, [](const Point&) { return 1.0; }, make_point(0, 0, 0), 1.0, true);
  mismatch2 = mism / std::max(weight_sum, 1e-300);
  const double trace_tol = std::max(1e-9, 25.0 * std::pow(h, 1.0 + s) * (1.0 + trace_scale));
  if (std::sqrt(mismatch2) > trace_tol) return std::numeric_limits<double>::infinity();

  // feasibility: z + theta h >= 0 on the plane
  Point e_last = make_point(0, 0, 0);
  e_last[n - 2] = 1.0;
  for (std::size_t f : g.plane_nodes()) {
    const Point p = g.point(f);
    const double hv = h_e_eval(p, e_last, s, n);
    if (z.v[f] + inp.theta * hv < -1e-9 * (1.0 + inp.theta))
      return std::numeric_limits<double>::infinity();
  }

  // volume gradient term
  VectorField gz = gradient(z);
  ScalarField grad2(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& gv = gz.v[i];
    grad2.v[i] = gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2];
  }
  const double vol = weighted_volume_integral(grad2, make_point(0, 0, 0), 1.0);

  // boundary term, fixed by the stored trace
  const double bdry = sphere_integral_fn(
      g,
      [&](const Point& p) {
        const double tv = inp.zj_trace(p);
        return tv * tv;
      },
      make_point(0, 0, 0), 1.0, true);

  // thin-plane term with the closed-form R_a(h)
  ScalarField zRa(g);
  for (std::size_t f : g.plane_nodes()) {
    const Point p = g.point(f);
    zRa.v[f] = z.v[f] * R_a_h(p, e_last, s, n);
  }
  const double plane = thin_disk_integral(zRa, make_point(0, 0, 0), 1.0);

  return vol - (1.0 + s) * bdry - 4.0 * inp.theta * plane;
}

std::string epi_csv(const std::vector<EpiReport>& table) {
  std::string out = "datum_id,W_c,W_star,kappa_emp,status\n";
  char buf[512];
  for (const EpiReport& r : table) {
    const char* st = r.status == EpiStatus::Ok          ? "ok"
                     : r.status == EpiStatus::Degenerate ? "degenerate"
                                                         : "violated";
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%s\n", r.id.c_str(), r.W_c, r.W_star,
                  r.kappa_emp, st);
    out += buf;
  }
  return out;
}

} // namespace oblab
