#include "oblab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "oblab/quadrature.hpp"

namespace oblab {

namespace {

void check_trusted(const Grid& g, const Point& x0, double r) {
  if (norm(x0) + r > 0.8 * g.R() * (1.0 + 1e-9) + 1e-12)
    throw std::invalid_argument("diagnostics: radius outside the trusted region (r <= 0.8 R)");
}

} // namespace

HD H_D_at(const DiagField& f, const Point& x0, double r) {
  const Grid& g = *f.u->grid;
  check_trusted(g, x0, r);
  ScalarField grad2(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& gv = f.grad.v[i];
    grad2.v[i] = gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2];
  }
  HD out;
  out.D = weighted_volume_integral(grad2, x0, r);
  ScalarField u2(g);
  for (std::size_t i = 0; i < g.size(); ++i) u2.v[i] = f.u->v[i] * f.u->v[i];
  out.H = sphere_integral(u2, x0, r, /*weighted=*/true);
  return out;
}

double frequency(const DiagField& f, const Point& x0, double r) {
  const HD hd = H_D_at(f, x0, r);
  if (!(hd.H > 0.0))
    throw std::runtime_error("frequency: H <= 0, frequency undefined (trace vanishes)");
  return r * hd.D / hd.H;
}

double weiss_energy(const DiagField& f, const Point& x0, double r) {
  const Grid& g = *f.u->grid;
  const int n = g.n();
  const double s = g.params().s;
  const HD hd = H_D_at(f, x0, r);
  const double W = hd.D / std::pow(r, n + 1) - (1.0 + s) * hd.H / std::pow(r, n + 2);
  if (hd.H > 0.0) {
    const double N = r * hd.D / hd.H;
    const double W2 = hd.H / std::pow(r, n + 2) * (N - (1.0 + s));
    const double scale = std::abs(W) + std::abs(W2) + 1e-300;
    if (std::abs(W - W2) > 1e-12 * std::max(scale, hd.H / std::pow(r, n + 2)))
      throw std::runtime_error("weiss_energy: algebraic cross-check failed");
  }
  return W;
}

namespace {

// Interpolated value of grad u . dir at a point.
double grad_component_dot(const DiagField& f, const Point& p, const Point& dir) {
  const Grid& g = *f.u->grid;
  // multilinear interpolation of each cached gradient component
  const int n = g.n();
  const double h = g.h();
  int base[3] = {0, 0, 0};
  double w[3] = {0, 0, 0};
  for (int d = 0; d < n; ++d) {
    double t = p[d] / h + g.m();
    int i = static_cast<int>(std::floor(t));
    i = std::max(0, std::min(i, 2 * g.m() - 1));
    base[d] = i;
    w[d] = t - i;
  }
  double acc = 0.0;
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    double wc = 1.0;
    int idx[3] = {base[0], base[1], base[2]};
    for (int d = 0; d < n; ++d) {
      const bool hi = (c >> d) & 1;
      wc *= hi ? w[d] : 1.0 - w[d];
      idx[d] += hi ? 1 : 0;
    }
    if (wc == 0.0) continue;
    const auto& gv = f.grad.v[g.flat(idx[0], idx[1], idx[2])];
    double dv = 0.0;
    for (int d = 0; d < n; ++d) dv += gv[d] * dir[d];
    acc += wc * dv;
  }
  return acc;
}

struct SphereTerms {
  double grad2 = 0.0;   // int |grad u|^2 |x_n|^a
  double normal2 = 0.0; // int (grad u . nu)^2 |x_n|^a
  double u_normal = 0.0; // int u (grad u . nu) |x_n|^a
};

SphereTerms sphere_terms(const DiagField& f, const Point& x0, double r) {
  const Grid& g = *f.u->grid;
  SphereTerms t;
  t.grad2 = sphere_integral_fn(
      g,
      [&](const Point& p) {
        double acc = 0.0;
        for (int d = 0; d < g.n(); ++d) {
          Point dir = make_point(0, 0, 0);
          dir[d] = 1.0;
          const double c = grad_component_dot(f, p, dir);
          acc += c * c;
        }
        return acc;
      },
      x0, r, true);
  auto nu_at = [&](const Point& p) {
    Point nu = make_point((p[0] - x0[0]) / r, (p[1] - x0[1]) / r, (p[2] - x0[2]) / r);
    return nu;
  };
  t.normal2 = sphere_integral_fn(
      g,
      [&](const Point& p) {
        const double c = grad_component_dot(f, p, nu_at(p));
        return c * c;
      },
      x0, r, true);
  t.u_normal = sphere_integral_fn(
      g,
      [&](const Point& p) {
        return interpolate(*f.u, p) * grad_component_dot(f, p, nu_at(p));
      },
      x0, r, true);
  return t;
}

} // namespace

IdentityResiduals identity_residuals(const DiagField& f, const Point& x0, double r) {
  const Grid& g = *f.u->grid;
  const int n = g.n();
  const double a = g.params().a;
  const double s = g.params().s;
  const double h = g.h();
  const double dr = 2.0 * h;
  check_trusted(g, x0, r + dr);

  const HD hd = H_D_at(f, x0, r);
  const SphereTerms st = sphere_terms(f, x0, r);
  const HD hd_p = H_D_at(f, x0, r + dr);
  const HD hd_m = H_D_at(f, x0, r - dr);

  IdentityResiduals out;
  // Rellich: int_{dB_r} |grad u|^2 |x_n|^a = (n-2+a)/r D + 2 int (du/dnu)^2 |x_n|^a
  const double rel_rhs = (n - 2 + a) / r * hd.D + 2.0 * st.normal2;
  out.rellich = std::abs(st.grad2 - rel_rhs);
  // H'
  const double Hp_fd = (hd_p.H - hd_m.H) / (2 * dr);
  const double Hp = (n - 2 * s) / r * hd.H + 2.0 * st.u_normal;
  out.H_prime = std::abs(Hp_fd - Hp);
  // D'
  const double Dp_fd = (hd_p.D - hd_m.D) / (2 * dr);
  const double Dp = (n - 2 + a) / r * hd.D + 2.0 * st.normal2;
  out.D_prime = std::abs(Dp_fd - Dp);
  // D as a boundary integral
  out.D_boundary = std::abs(hd.D - st.u_normal);
  out.scale = std::abs(st.grad2) + std::abs(hd.D) + std::abs(Hp) + 1e-300;
  return out;
}

double weiss_derivative_residual(const DiagField& f, const Point& x0, double r) {
  const Grid& g = *f.u->grid;
  const int n = g.n();
  const double s = g.params().s;
  const double h = g.h();
  const double dr = 2.0 * h;
  check_trusted(g, x0, r + dr);

  const double Wp = weiss_energy(f, x0, r + dr);
  const double Wm = weiss_energy(f, x0, r - dr);
  const double dW_fd = (Wp - Wm) / (2 * dr);

  // (2/r^{n+1}) int_{dB_r} (du/dnu - (1+s) u / r)^2 |x_n|^a dH^{n-1},
  // the unit-sphere form of the rescaled field written on the original grid
  const double integral = sphere_integral_fn(
      g,
      [&](const Point& p) {
        Point nu = make_point((p[0] - x0[0]) / r, (p[1] - x0[1]) / r, (p[2] - x0[2]) / r);
        const double dn = grad_component_dot(f, p, nu);
        const double uv = interpolate(*f.u, p);
        const double t = dn - (1.0 + s) * uv / r;
        return t * t;
      },
      x0, r, true);
  const double rhs = 2.0 / std::pow(r, n + 1) * integral;
  return std::abs(dW_fd - rhs);
}

DiagnosticsSeries build_series(const DiagField& f, const Point& x0, double r_min, double r_max,
                               bool with_residuals) {
  const Grid& g = *f.u->grid;
  if (r_min <= 0.0) r_min = 8.0 * g.h();
  std::vector<double> radii;
  for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= 0.85) radii.push_back(r);
  std::reverse(radii.begin(), radii.end());
  if (radii.size() < 3)
    throw std::invalid_argument("build_series: window too narrow, need >= 3 radii");

  DiagnosticsSeries out;
  out.x0 = x0;
  out.n = g.n();
  out.samples.resize(radii.size());
  const double s = g.params().s;
  const int n = g.n();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    RadiusSample& smp = out.samples[i];
    smp.r = radii[i];
    const HD hd = H_D_at(f, x0, smp.r);
    smp.H = hd.H;
    smp.D = hd.D;
    if (!(hd.H > 0.0))
      throw std::runtime_error("build_series: H <= 0, trace vanishes at some radius");
    smp.N = smp.r * hd.D / hd.H;
    smp.W = hd.D / std::pow(smp.r, n + 1) - (1.0 + s) * hd.H / std::pow(smp.r, n + 2);
    if (with_residuals) {
      const IdentityResiduals ir = identity_residuals(f, x0, smp.r);
      smp.res_rellich = ir.rellich;
      smp.res_Hp = ir.H_prime;
      smp.res_Dp = ir.D_prime;
      smp.res_Db = ir.D_boundary;
      smp.res_weiss = weiss_derivative_residual(f, x0, smp.r);
    }
  }
  return out;
}

std::vector<Violation> monotonicity_scan(const DiagnosticsSeries& s, MonotoneQuantity which) {
  if (s.samples.size() < 3)
    throw std::invalid_argument("monotonicity_scan: need at least 3 radii");
  std::vector<double> q(s.samples.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    const RadiusSample& x = s.samples[i];
    switch (which) {
      case MonotoneQuantity::N: q[i] = x.N; break;
      case MonotoneQuantity::W: q[i] = x.W; break;
      case MonotoneQuantity::H_over_r: q[i] = x.H / std::pow(x.r, s.n + 2); break;
    }
    scale = std::max(scale, std::abs(q[i]));
  }
  std::vector<Violation> out;
  const double tol = 1e-6 * (scale + 1e-300);
  for (std::size_t i = 0; i + 1 < q.size(); ++i) {
    if (q[i] - q[i + 1] > tol)
      out.push_back({s.samples[i].r, s.samples[i + 1].r, q[i] - q[i + 1]});
  }
  return out;
}

FloorReport frequency_floor_check(const DiagnosticsSeries& s, double s_order, double tol) {
  FloorReport rep;
  rep.min_N = 1e300;
  for (const RadiusSample& x : s.samples) rep.min_N = std::min(rep.min_N, x.N);
  rep.floor = 1.0 + s_order - tol;
  rep.pass = rep.min_N >= rep.floor;
  return rep;
}

DecayFit decay_fit(const DiagnosticsSeries& s) {
  DecayFit fit;
  std::vector<double> lr, lw;
  for (const RadiusSample& x : s.samples)
    if (x.W > 1e-12) {
      lr.push_back(std::log(x.r));
      lw.push_back(std::log(x.W));
    }
  if (lr.size() < 5) {
    fit.degenerate = true;
    return fit;
  }
  const std::size_t m = lr.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += lr[i];
    sy += lw[i];
    sxx += lr[i] * lr[i];
    sxy += lr[i] * lw[i];
  }
  const double den = m * sxx - sx * sx;
  fit.gamma_emp = (m * sxy - sx * sy) / den;
  fit.C = std::exp((sy - fit.gamma_emp * sx) / m);
  for (std::size_t i = 0; i < m; ++i)
    fit.max_log_residual =
        std::max(fit.max_log_residual,
                 std::abs(lw[i] - (std::log(fit.C) + fit.gamma_emp * lr[i])));
  fit.r_lo = std::exp(lr.front());
  fit.r_hi = std::exp(lr.back());
  return fit;
}

double nondegeneracy_estimate(const DiagnosticsSeries& s, int n) {
  double H0 = 1e300;
  for (const RadiusSample& x : s.samples) H0 = std::min(H0, x.H / std::pow(x.r, n + 2));
  if (!(H0 > 0.0)) throw std::runtime_error("nondegeneracy_estimate: H0 is not positive");
  return H0;
}

std::string series_csv(const DiagnosticsSeries& s) {
  std::string out = "r,H,D,N,W,res_rellich,res_Hp,res_Dp,res_Db,res_weiss\n";
  char buf[512];
  for (const RadiusSample& x : s.samples) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x.r, x.H, x.D,
                  x.N, x.W, x.res_rellich, x.res_Hp, x.res_Dp, x.res_Db, x.res_weiss);
    out += buf;
  }
  return out;
}

} // namespace oblab
