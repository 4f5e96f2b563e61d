#include "oblab/exact.hpp"

#include <cmath>
#include <stdexcept>

#include "oblab/quadrature.hpp"

namespace oblab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double dot_plane(const Point& x, const Point& e, int n) {
  double d = 0.0;
  for (int i = 0; i < n - 1; ++i) d += x[i] * e[i];
  return d;
}
} // namespace

void ConeElement::validate(int n) const {
  if (lambda < 0.0) throw std::invalid_argument("ConeElement: lambda must be >= 0");
  double nrm = 0.0;
  for (int i = 0; i < n - 1; ++i) nrm += e[i] * e[i];
  if (std::abs(e[n - 1]) > 1e-14 || std::abs(nrm - 1.0) > 1e-12)
    throw std::invalid_argument("ConeElement: e must be a unit vector in the thin plane");
}

double h_e_eval(const Point& x, const Point& e, double s, int n) {
  const double xe = dot_plane(x, e, n);
  const double xn = x[n - 1];
  const double rho = std::sqrt(xe * xe + xn * xn);
  const double base = rho + xe;
  if (base <= 0.0) return 0.0; // contact half-line, 0^s * (finite) = 0
  return (xe / s - rho) * std::pow(base, s);
}

std::optional<std::array<double, 3>> h_e_grad(const Point& x, const Point& e, double s, int n) {
  const double xe = dot_plane(x, e, n);
  const double xn = x[n - 1];
  const double rho = std::sqrt(xe * xe + xn * xn);
  const double base = rho + xe;
  if (base <= 0.0) return std::nullopt;
  const double de = (1.0 - s * s) / s * std::pow(base, s);
  const double dn = -(1.0 + s) * xn * std::pow(base, s - 1.0);
  std::array<double, 3> grad = {0.0, 0.0, 0.0};
  for (int i = 0; i < n - 1; ++i) grad[i] = de * e[i];
  grad[n - 1] = dn;
  return grad;
}

double R_a_h(const Point& xhat, const Point& e, double s, int n) {
  const double xe = dot_plane(xhat, e, n);
  if (xe >= 0.0) return 0.0;
  return -(1.0 + s) * std::pow(2.0 * std::abs(xe), 1.0 - s);
}

ScalarField sample_cone_element(const ConeElement& c, const Grid& g) {
  c.validate(g.n());
  const double s = g.params().s;
  return sample(g, [&](const Point& p) { return c.lambda * h_e_eval(p, c.e, s, g.n()); });
}

ScalarField tangent_field(const Point& e, const TangentVector& t, const Grid& g) {
  const int n = g.n();
  const double s = g.params().s;
  double xi_e = 0.0, xi_n = t.xi[n - 1], xi_norm = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    xi_e += t.xi[i] * e[i];
    xi_norm += t.xi[i] * t.xi[i];
  }
  if (std::abs(xi_e) > 1e-12 || std::abs(xi_n) > 1e-12)
    throw std::invalid_argument("tangent_field: xi must be orthogonal to e and e_n");
  if (n == 2 && xi_norm > 1e-24)
    throw std::invalid_argument("tangent_field: no tangent directions exist for n = 2");
  return sample(g, [&](const Point& p) {
    const double xe = dot_plane(p, e, n);
    const double xn = p[n - 1];
    const double base = std::sqrt(xe * xe + xn * xn) + xe;
    double v = t.alpha * h_e_eval(p, e, s, n);
    if (base > 0.0) {
      double xxi = 0.0;
      for (int i = 0; i < n - 1; ++i) xxi += p[i] * t.xi[i];
      v += xxi * std::pow(base, s);
    }
    return v;
  });
}

double appendix_profile_eval(const AppendixProfile& p, const Point& x, int n) {
  if (n < 3 && p.a1 != 0.0)
    throw std::invalid_argument("appendix_profile_eval: x_i factors need n >= 3");
  Point e_last = make_point(0, 0, 0);
  e_last[n - 2] = 1.0; // e_{n-1}
  double v = p.a0 * h_e_eval(x, e_last, p.s, n);
  if (p.a1 != 0.0) {
    const double xn1 = x[n - 2], xn = x[n - 1];
    const double base = std::sqrt(xn1 * xn1 + xn * xn) + xn1;
    if (base > 0.0) v += p.a1 * x[0] * std::pow(base, p.s);
  }
  return v;
}

ScalarField sample_appendix_profile(const AppendixProfile& p, const Grid& g) {
  return sample(g, [&](const Point& x) { return appendix_profile_eval(p, x, g.n()); });
}

namespace {

struct FitState {
  const ScalarField* f;
  double f_norm2;
  ConeNorm norm;
};

double inner(const ScalarField& u, const ScalarField& v, ConeNorm norm) {
  return norm == ConeNorm::H1 ? h1_inner(u, v) : sphere_l2_inner(u, v, u.grid->R());
}

// squared distance from f to the ray {lambda h_e : lambda >= 0}, plus the fit
double ray_fit(const FitState& st, const Point& e, double& lambda_out) {
  const Grid& g = *st.f->grid;
  ConeElement c{1.0, e};
  const ScalarField he = sample_cone_element(c, g);
  const double hh = inner(he, he, st.norm);
  const double fh = inner(*st.f, he, st.norm);
  const double lambda = hh > 0.0 ? std::max(0.0, fh / hh) : 0.0;
  lambda_out = lambda;
  return st.f_norm2 - 2.0 * lambda * fh + lambda * lambda * hh;
}

} // namespace

ConeFit project_to_cone(const ScalarField& f, ConeNorm norm) {
  const Grid& g = *f.grid;
  const int n = g.n();
  if (!is_symmetric(f, 1e-9)) throw std::invalid_argument("project_to_cone: field not symmetric");

  FitState st{&f, inner(f, f, norm), norm};
  ConeFit best;
  best.element.e = make_point(1, 0, 0);
  if (st.f_norm2 <= 1e-28) {
    best.element.lambda = 0.0;
    best.dist = 0.0;
    return best;
  }

  if (n == 2) {
    double d2best = 0.0;
    bool first = true;
    for (double sgn : {1.0, -1.0}) {
      double lambda;
      const double d2 = ray_fit(st, make_point(sgn, 0), lambda);
      if (first || d2 < d2best) {
        first = false;
        d2best = d2;
        best.element = ConeElement{lambda, make_point(sgn, 0)};
      }
    }
    best.dist = std::sqrt(std::max(d2best, 0.0));
    return best;
  }

  // n = 3: coarse scan over the plane circle, then golden-section refinement
  auto dir = [](double alpha) { return make_point(std::cos(alpha), std::sin(alpha), 0); };
  auto objective = [&](double alpha, double& lambda) { return ray_fit(st, dir(alpha), lambda); };

  const int scan = 64;
  double alpha_best = 0.0, d2best = 0.0, lam = 0.0;
  for (int i = 0; i < scan; ++i) {
    const double alpha = 2 * kPi * i / scan;
    double lambda;
    const double d2 = objective(alpha, lambda);
    if (i == 0 || d2 < d2best) {
      d2best = d2;
      alpha_best = alpha;
      lam = lambda;
    }
  }
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = alpha_best - 2 * kPi / scan, hi = alpha_best + 2 * kPi / scan;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double l1, l2;
  double f1 = objective(x1, l1), f2 = objective(x2, l2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1, l1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2, l2);
    }
  }
  const double alpha = 0.5 * (lo + hi);
  double lambda;
  const double d2 = objective(alpha, lambda);
  if (d2 < d2best) {
    d2best = d2;
    alpha_best = alpha;
    lam = lambda;
  }
  best.element = ConeElement{lam, dir(alpha_best)};
  best.dist = std::sqrt(std::max(d2best, 0.0));
  return best;
}

double stencil_residual(const ScalarField& f, std::size_t node) {
  const Grid& g = *f.grid;
  const int n = g.n();
  const double h = g.h();
  const double a = g.params().a;
  int i, j, k;
  g.unflat(node, i, j, k);
  const int idx[3] = {i, j, k};
  const int nax = g.nodes_per_axis();
  for (int d = 0; d < n; ++d)
    if (idx[d] <= 0 || idx[d] >= nax - 1)
      throw std::invalid_argument("stencil_residual: node touches the lattice boundary");

  const Point p = g.point(node);
  double num = 0.0, den = 0.0;
  for (int d = 0; d < n; ++d) {
    for (int off : {-1, 1}) {
      int q[3] = {i, j, k};
      q[d] += off;
      const std::size_t nb = g.flat(q[0], q[1], q[2]);
      double xn_mid = p[n - 1];
      if (d == n - 1) xn_mid += off * h / 2;
      const double w = std::abs(xn_mid) < h / 4 ? avg_plane_weight(h, a)
                                                : std::pow(std::abs(xn_mid), a);
      num += w * (f.v[nb] - f.v[node]);
      den += w;
    }
  }
  return num / den;
}

} // namespace oblab
