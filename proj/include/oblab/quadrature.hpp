#pragma once

#include <functional>

#include "oblab/grid.hpp"

namespace oblab {

// Closed forms for the one-dimensional weight |t|^a, a in (-1,1). These are
// the only way the degenerate weight enters any quadrature: it is integrated
// in closed form over cells and never point-evaluated at t = 0.
double weight_integral_1d(double t0, double t1, double a); // int |t|^a dt
double weight_moment_1d(double t0, double t1, double a);   // int t |t|^a dt

// Average of |t|^a over (-h/2, h/2); the in-plane tangential edge weight.
inline double avg_plane_weight(double h, double a) {
  return weight_integral_1d(-h / 2, h / 2, a) / h;
}

// Adaptive tanh-sinh rule; handles endpoint algebraic singularities.
double tanh_sinh(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-13);

// Exact area and centroid of box [x0,x1]x[y0,y1] intersected with the disk
// of radius r centered at c.
struct ClipResult {
  double area = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};
ClipResult clip_box_disk(double x0, double x1, double y0, double y1, double cx, double cy,
                         double r);

// Fraction of the axis-aligned box centered at q with half-widths hw inside
// the ball B_r(c). Exact for n = 2, subsampled for n = 3.
double box_ball_fraction(int n, const Point& q, double hw, const Point& c, double r);

// int_{B_r(x0)} f dmu_a, cell-wise quadrature with exact per-cell weight
// integrals and weighted centroids; cut cells clipped exactly (n = 2) or by
// subsampling (n = 3). Requires x0 on the thin plane and B_r(x0) inside the
// domain ball.
double weighted_volume_integral(const ScalarField& f, const Point& x0, double r);

// int_{partial B_r(x0)} f |x_n|^a dH^{n-1} (weighted) or the unweighted
// surface integral. Angular product rule with exact weight-cell integrals;
// f is interpolated multilinearly.
double sphere_integral(const ScalarField& f, const Point& x0, double r, bool weighted);

// Same rule, but f given as a callable on points of the sphere.
double sphere_integral_fn(const Grid& g, const std::function<double(const Point&)>& f,
                          const Point& x0, double r, bool weighted);

// int over B'_r(x0) = {|xhat - xhat0| < r, x_n = 0} with the unweighted
// H^{n-1} measure; midpoint rule on plane nodes.
double thin_disk_integral(const ScalarField& f, const Point& x0, double r);

// Discrete Dirichlet form sum_edges w_e (du)(dv) h^n over lattice edges with
// both endpoints inside the ball; edge weights are |x_n|^a at the edge
// midpoint (cell-averaged for in-plane edges) and rim edges carry the inside
// fraction of their dual box. This is the quadratic form the solver
// minimizes, restated on the full grid.
double dirichlet_form(const ScalarField& u, const ScalarField& v);

// Lumped weighted mass sum_i u_i v_i mu_a(dual cell_i cap B_R).
double lumped_mass_inner(const ScalarField& u, const ScalarField& v);

// Full discrete H^1(B_R, mu_a) inner product.
inline double h1_inner(const ScalarField& u, const ScalarField& v) {
  return dirichlet_form(u, v) + lumped_mass_inner(u, v);
}

// Weighted L^2 inner product on the sphere of radius r.
double sphere_l2_inner(const ScalarField& u, const ScalarField& v, double r);

} // namespace oblab
