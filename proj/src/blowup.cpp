#include "oblab/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "oblab/quadrature.hpp"

namespace oblab {

RescaledField rescale(const ScalarField& u, const Grid& unit_grid, const Point& x0, double r) {
  const Grid& g = *u.grid;
  if (norm(x0) + r > 0.8 * g.R() * (1.0 + 1e-9) + 1e-12)
    throw std::invalid_argument("rescale: reach exceeded (need |x0| + r <= 0.8 R)");
  if (std::abs(unit_grid.R() - 1.0) > 1e-12)
    throw std::invalid_argument("rescale: target grid must cover the unit ball");
  const double s = g.params().s;
  const double scale = std::pow(r, 1.0 + s);
  RescaledField out{x0, r, ScalarField(unit_grid)};
  const double hull = g.R() * (1.0 - 1e-12);
  for (std::size_t f = 0; f < unit_grid.size(); ++f) {
    Point y = unit_grid.point(f);
    Point p = make_point(x0[0] + r * y[0], x0[1] + r * y[1], x0[2] + r * y[2]);
    // clamp lattice-corner probes outside the source hull; only |y| <= 1 is
    // ever integrated
    for (int d = 0; d < g.n(); ++d) p[d] = std::clamp(p[d], -hull, hull);
    out.field.v[f] = interpolate(u, p) / scale;
  }
  return out;
}

FreeBoundary contact_and_boundary(const ScalarField& u, double solver_tol) {
  const Grid& g = *u.grid;
  FreeBoundary fb;
  fb.threshold = 10.0 * solver_tol;
  if (g.plane_nodes().empty()) throw std::runtime_error("contact_and_boundary: empty plane set");

  auto plane_neighbor = [&](std::size_t f, int d, int off, std::size_t& out_idx) {
    int i, j, k;
    g.unflat(f, i, j, k);
    int q[3] = {i, j, k};
    q[d] += off;
    if (q[d] < 0 || q[d] >= g.nodes_per_axis()) return false;
    out_idx = g.flat(q[0], q[1], q[2]);
    return g.active(out_idx);
  };

  for (std::size_t f : g.plane_nodes()) {
    const bool in_contact = u.v[f] <= fb.threshold;
    if (in_contact) fb.contact.push_back(f);
    bool near_contact = in_contact, near_positive = !in_contact;
    for (int d = 0; d < g.n() - 1; ++d)
      for (int off : {-1, 1}) {
        std::size_t nb;
        if (!plane_neighbor(f, d, off, nb)) continue;
        if (u.v[nb] <= fb.threshold)
          near_contact = true;
        else
          near_positive = true;
      }
    if (near_contact && near_positive) fb.boundary.push_back(f);
  }
  return fb;
}

Point refine_boundary_point(const ScalarField& u, std::size_t boundary_node, double solver_tol) {
  const Grid& g = *u.grid;
  const double h = g.h();
  const double s = g.params().s;
  const double thr = 10.0 * solver_tol;
  int i, j, k;
  g.unflat(boundary_node, i, j, k);
  const Point p0 = g.point(boundary_node);

  // walk along each plane axis to find the contact/positive transition and
  // solve u ~ C (t - t0)^{1+s} on the first two positive nodes
  Point best = p0;
  double best_shift = 1e300;
  for (int d = 0; d < g.n() - 1; ++d) {
    for (int dir : {-1, 1}) {
      int q[3] = {i, j, k};
      auto value_at = [&](int steps) {
        int w[3] = {q[0], q[1], q[2]};
        w[d] += dir * steps;
        if (w[d] < 0 || w[d] >= g.nodes_per_axis()) return -1.0;
        const std::size_t idx = g.flat(w[0], w[1], w[2]);
        return g.active(idx) ? u.v[idx] : -1.0;
      };
      for (int kpos = 0; kpos <= 2; ++kpos) {
        const double v1 = value_at(kpos), v2 = value_at(kpos + 1);
        if (v1 <= thr || v2 <= v1) continue;
        // the node behind the fit pair must sit in the contact set
        if (kpos > 0 && value_at(kpos - 1) > thr) break;
        if (kpos == 0 && value_at(-1) > thr) break;
        const double rho = std::pow(v2 / v1, 1.0 / (1.0 + s));
        // nodes at distances delta, delta + h from the crossing
        if (rho <= 1.0 + 1e-12) break;
        const double delta = h / (rho - 1.0);
        const double t_cross = kpos * h - delta; // signed offset from boundary_node
        if (std::abs(t_cross) > 1.5 * h) break;
        if (std::abs(t_cross) < best_shift) {
          best_shift = std::abs(t_cross);
          best = p0;
          best[d] = p0[d] + dir * t_cross;
        }
        break;
      }
    }
  }
  return best;
}

PointClass classify_point(const DiagField& f, const Point& x0, double r_min,
                          bool certified_on_boundary) {
  if (!certified_on_boundary)
    throw std::invalid_argument("classify_point: center not certified on the free boundary");
  const double s = f.u->grid->params().s;
  const double N = frequency(f, x0, r_min);
  const double tol_class = 0.05;
  return N <= (1.0 + s) + tol_class ? PointClass::Regular : PointClass::HigherFrequency;
}

std::vector<BlowupSample> blowup_fit(const ScalarField& u, const Grid& unit_grid,
                                     const Point& x0, const std::vector<double>& radii,
                                     ConeNorm norm) {
  std::vector<BlowupSample> out;
  out.reserve(radii.size());
  DiagField df(u);
  for (double r : radii) {
    RescaledField rf = rescale(u, unit_grid, x0, r);
    const ConeFit fit = project_to_cone(rf.field, norm);
    BlowupSample smp;
    smp.r = r;
    smp.element = fit.element;
    smp.dist = fit.dist;
    smp.N = frequency(df, x0, r);
    out.push_back(smp);
  }
  return out;
}

RateCheck uniqueness_rate_check(const ScalarField& u, const Grid& unit_grid, const Point& x0,
                                const std::vector<double>& radii, double gamma) {
  RateCheck rc;
  rc.required = gamma / 2.0 - 0.1;
  if (radii.size() < 3)
    throw std::invalid_argument("uniqueness_rate_check: need >= 3 radii");

  // blow-up limit: cone fit at the smallest radius
  const double r_small = *std::min_element(radii.begin(), radii.end());
  RescaledField rf_small = rescale(u, unit_grid, x0, r_small);
  const ConeFit limit = project_to_cone(rf_small.field);
  const ScalarField limit_field = sample_cone_element(limit.element, unit_grid);

  const double s = unit_grid.params().s;
  const double noise = 10.0 * std::pow(unit_grid.h(), 1.0 + s);
  for (double r : radii) {
    RescaledField rf = rescale(u, unit_grid, x0, r);
    const double d = sphere_integral_fn(
        unit_grid,
        [&](const Point& p) {
          return std::abs(interpolate(rf.field, p) - interpolate(limit_field, p));
        },
        make_point(0, 0, 0), 1.0, /*weighted=*/true);
    rc.radii.push_back(r);
    rc.dist.push_back(d);
  }
  double dmax = 0.0;
  for (double d : rc.dist) dmax = std::max(dmax, d);
  if (dmax <= noise) {
    rc.degenerate = true; // everything below quadrature noise
    rc.pass = true;
    return rc;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::size_t m = rc.radii.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(rc.radii[i]);
    const double ly = std::log(std::max(rc.dist[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  rc.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  rc.pass = rc.exponent >= rc.required && rc.exponent > 0.0;
  return rc;
}

std::string classification_csv(const Point& x0, const std::vector<BlowupSample>& rows, int n) {
  std::string out;
  out = n == 2 ? "x0_0,r,lambda,e_0,dist,N\n" : "x0_0,x0_1,r,lambda,e_0,e_1,dist,N\n";
  char buf[512];
  for (const BlowupSample& b : rows) {
    if (n == 2)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x0[0], b.r,
                    b.element.lambda, b.element.e[0], b.dist, b.N);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x0[0],
                    x0[1], b.r, b.element.lambda, b.element.e[0], b.element.e[1], b.dist, b.N);
    out += buf;
  }
  return out;
}

} // namespace oblab
