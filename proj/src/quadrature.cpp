#include "oblab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace oblab {

namespace {
constexpr double kPi = 3.14159265358979323846;

double sgn(double t) { return t >= 0 ? 1.0 : -1.0; }
} // namespace

double weight_integral_1d(double t0, double t1, double a) {
  auto F = [a](double t) { return sgn(t) * std::pow(std::abs(t), 1.0 + a) / (1.0 + a); };
  return F(t1) - F(t0);
}

double weight_moment_1d(double t0, double t1, double a) {
  auto G = [a](double t) { return std::pow(std::abs(t), 2.0 + a) / (2.0 + a); };
  return G(t1) - G(t0);
}

double tanh_sinh(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  const double c = 0.5 * (lo + hi), d = 0.5 * (hi - lo);
  if (d <= 0.0) return 0.0;
  const double tmax = 6.5; // abscissae beyond this underflow
  auto eval = [&](double t) {
    const double u = 0.5 * kPi * std::sinh(t);
    const double x = c + d * std::tanh(u);
    const double w = d * 0.5 * kPi * std::cosh(t) / (std::cosh(u) * std::cosh(u));
    if (!(w > 0.0) || x <= lo || x >= hi) return 0.0;
    return w * f(x);
  };
  double step = 1.0;
  double sum = eval(0.0);
  for (double t = step; t <= tmax; t += step) sum += eval(t) + eval(-t);
  double prev = sum * step;
  for (int level = 1; level <= 11; ++level) {
    step *= 0.5;
    double add = 0.0;
    for (double t = step; t <= tmax; t += 2 * step) add += eval(t) + eval(-t);
    sum += add;
    const double cur = sum * step;
    if (level >= 3 && std::abs(cur - prev) <= rel_tol * (std::abs(cur) + 1e-300)) return cur;
    prev = cur;
  }
  return prev;
}

// ---------------------------------------------------------------------------
// Exact box/disk clipping via Green's theorem on the piecewise boundary
// (straight pieces on box edges, arcs on the circle).

namespace {

struct GreenAcc {
  double A = 0.0;  // (1/2) oint (x dy - y dx)
  double Mx = 0.0; // (1/2) oint x^2 dy
  double My = 0.0; // -(1/2) oint y^2 dx

  void add_segment(double px, double py, double qx, double qy) {
    A += 0.5 * (px * qy - qx * py);
    Mx += 0.5 * (qy - py) * (px * px + px * qx + qx * qx) / 3.0;
    My += -0.5 * (qx - px) * (py * py + py * qy + qy * qy) / 3.0;
  }
  // ccw arc of circle (cx,cy,r) from angle al to be (be > al)
  void add_arc(double cx, double cy, double r, double al, double be) {
    const double dth = be - al;
    const double sb = std::sin(be), sa = std::sin(al), cb = std::cos(be), ca = std::cos(al);
    A += 0.5 * (r * r * dth + cx * r * (sb - sa) - cy * r * (cb - ca));
    const double i_cos = sb - sa;
    const double i_cos2 = 0.5 * dth + 0.25 * (std::sin(2 * be) - std::sin(2 * al));
    const double i_cos3 = (sb - sb * sb * sb / 3.0) - (sa - sa * sa * sa / 3.0);
    Mx += 0.5 * r * (cx * cx * i_cos + 2 * cx * r * i_cos2 + r * r * i_cos3);
    const double i_sin = ca - cb;
    const double i_sin2 = 0.5 * dth - 0.25 * (std::sin(2 * be) - std::sin(2 * al));
    const double i_sin3 = (-cb + cb * cb * cb / 3.0) - (-ca + ca * ca * ca / 3.0);
    My += 0.5 * r * (cy * cy * i_sin + 2 * cy * r * i_sin2 + r * r * i_sin3);
  }
};

} // namespace

ClipResult clip_box_disk(double x0, double x1, double y0, double y1, double cx, double cy,
                         double r) {
  const double r2 = r * r;
  auto inside = [&](double x, double y) {
    const double dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy <= r2;
  };
  // quick outs on the box/disk bounding distances
  const double nx = std::max({x0 - cx, 0.0, cx - x1});
  const double ny = std::max({y0 - cy, 0.0, cy - y1});
  if (nx * nx + ny * ny >= r2) return {};
  const double fx = std::max(std::abs(x0 - cx), std::abs(x1 - cx));
  const double fy = std::max(std::abs(y0 - cy), std::abs(y1 - cy));
  if (fx * fx + fy * fy <= r2) {
    ClipResult full;
    full.area = (x1 - x0) * (y1 - y0);
    full.cx = 0.5 * (x0 + x1);
    full.cy = 0.5 * (y0 + y1);
    return full;
  }

  GreenAcc acc;
  std::vector<double> angles;

  // box corners ccw
  const double bx[5] = {x0, x1, x1, x0, x0};
  const double by[5] = {y0, y0, y1, y1, y0};
  for (int e = 0; e < 4; ++e) {
    const double px = bx[e], py = by[e], qx = bx[e + 1], qy = by[e + 1];
    const double dx = qx - px, dy = qy - py;
    // circle intersections along the edge parameter t in (0,1)
    const double ox = px - cx, oy = py - cy;
    const double qa = dx * dx + dy * dy;
    const double qb = 2 * (ox * dx + oy * dy);
    const double qc = ox * ox + oy * oy - r2;
    std::vector<double> ts = {0.0, 1.0};
    const double disc = qb * qb - 4 * qa * qc;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)})
        if (t > 1e-12 && t < 1.0 - 1e-12) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      const double tm = 0.5 * (ts[i] + ts[i + 1]);
      if (inside(px + tm * dx, py + tm * dy))
        acc.add_segment(px + ts[i] * dx, py + ts[i] * dy, px + ts[i + 1] * dx,
                        py + ts[i + 1] * dy);
    }
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)})
        if (t > -1e-12 && t < 1.0 + 1e-12)
          angles.push_back(std::atan2(py + t * dy - cy, px + t * dx - cx));
    }
  }

  if (angles.empty()) {
    // either empty, or the disk lies wholly inside the box
    if (cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1 && acc.A == 0.0) {
      ClipResult disk;
      disk.area = kPi * r2;
      disk.cx = cx;
      disk.cy = cy;
      return disk;
    }
  } else {
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 angles.end());
    const std::size_t na = angles.size();
    for (std::size_t i = 0; i < na; ++i) {
      const double al = angles[i];
      const double be = (i + 1 < na) ? angles[i + 1] : angles[0] + 2 * kPi;
      if (be - al < 1e-14) continue;
      const double tm = 0.5 * (al + be);
      const double mx = cx + r * std::cos(tm), my = cy + r * std::sin(tm);
      if (mx > x0 - 1e-12 && mx < x1 + 1e-12 && my > y0 - 1e-12 && my < y1 + 1e-12)
        acc.add_arc(cx, cy, r, al, be);
    }
  }

  ClipResult out;
  out.area = std::max(acc.A, 0.0);
  if (out.area > 1e-300) {
    out.cx = acc.Mx / acc.A;
    out.cy = acc.My / acc.A;
  } else {
    out.area = 0.0;
  }
  return out;
}

double box_ball_fraction(int n, const Point& q, double hw, const Point& c, double r) {
  if (n == 2) {
    const ClipResult cl =
        clip_box_disk(q[0] - hw, q[0] + hw, q[1] - hw, q[1] + hw, c[0], c[1], r);
    return cl.area / (4 * hw * hw);
  }
  // n = 3: subsample
  const int k = 4;
  int cnt = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int l = 0; l < k; ++l) {
        const double dx = q[0] - hw + (2.0 * i + 1) * hw / k - c[0];
        const double dy = q[1] - hw + (2.0 * j + 1) * hw / k - c[1];
        const double dz = q[2] - hw + (2.0 * l + 1) * hw / k - c[2];
        if (dx * dx + dy * dy + dz * dz <= r * r) ++cnt;
      }
  return static_cast<double>(cnt) / (k * k * k);
}

// ---------------------------------------------------------------------------
// Volume quadrature

namespace {

void check_plane_center(const Grid& g, const Point& x0) {
  const int nd = g.n();
  if (std::abs(x0[nd - 1]) > 1e-12)
    throw std::invalid_argument("quadrature: center must lie on the thin plane");
}

void check_ball_inside(const Grid& g, const Point& x0, double r) {
  if (norm(x0) + r > g.R() * (1.0 + 1e-12) + 1e-12)
    throw std::invalid_argument("quadrature: ball exits the domain");
}

} // namespace

double weighted_volume_integral(const ScalarField& f, const Point& x0, double r) {
  const Grid& g = *f.grid;
  const double h = g.h();
  const double a = g.params().a;
  check_plane_center(g, x0);
  check_ball_inside(g, x0, r);

  const int nax = g.nodes_per_axis();
  auto cell_range = [&](double c) {
    int lo = static_cast<int>(std::floor((c - r) / h)) + g.m();
    int hi = static_cast<int>(std::ceil((c + r) / h)) + g.m();
    return std::pair<int, int>(std::max(lo, 0), std::min(hi, nax - 1));
  };
  const auto [i0, i1] = cell_range(x0[0]);
  const auto [j0, j1] = cell_range(x0[1]);

  double acc = 0.0;
  if (g.n() == 2) {
    for (int i = i0; i < i1; ++i) {
      const double xl = g.coord(i), xr = xl + h;
      for (int j = j0; j < j1; ++j) {
        const double yl = g.coord(j), yr = yl + h;
        const double nx = std::max({xl - x0[0], 0.0, x0[0] - xr});
        const double ny = std::max({yl - x0[1], 0.0, x0[1] - yr});
        if (nx * nx + ny * ny >= r * r) continue;
        const double fx = std::max(std::abs(xl - x0[0]), std::abs(xr - x0[0]));
        const double fy = std::max(std::abs(yl - x0[1]), std::abs(yr - x0[1]));
        const double w1 = weight_integral_1d(yl, yr, a);
        if (fx * fx + fy * fy <= r * r) {
          const double yt = weight_moment_1d(yl, yr, a) / w1;
          acc += interpolate(f, make_point(0.5 * (xl + xr), yt)) * h * w1;
        } else {
          const ClipResult cl = clip_box_disk(xl, xr, yl, yr, x0[0], x0[1], r);
          if (cl.area <= 0.0) continue;
          acc += interpolate(f, make_point(cl.cx, cl.cy)) * (cl.area / (h * h)) * h * w1;
        }
      }
    }
    return acc;
  }

  const auto [k0, k1] = cell_range(x0[2]);
  for (int i = i0; i < i1; ++i) {
    const double xl = g.coord(i), xc = xl + 0.5 * h;
    for (int j = j0; j < j1; ++j) {
      const double yl = g.coord(j), yc = yl + 0.5 * h;
      for (int k = k0; k < k1; ++k) {
        const double zl = g.coord(k), zr = zl + h;
        const double nx = std::max({xl - x0[0], 0.0, x0[0] - xl - h});
        const double ny = std::max({yl - x0[1], 0.0, x0[1] - yl - h});
        const double nz = std::max({zl - x0[2], 0.0, x0[2] - zr});
        if (nx * nx + ny * ny + nz * nz >= r * r) continue;
        const double fx = std::max(std::abs(xl - x0[0]), std::abs(xl + h - x0[0]));
        const double fy = std::max(std::abs(yl - x0[1]), std::abs(yl + h - x0[1]));
        const double fz = std::max(std::abs(zl - x0[2]), std::abs(zr - x0[2]));
        const double w1 = weight_integral_1d(zl, zr, a);
        if (fx * fx + fy * fy + fz * fz <= r * r) {
          const double zt = weight_moment_1d(zl, zr, a) / w1;
          acc += interpolate(f, make_point(xc, yc, zt)) * h * h * w1;
        } else {
          // subsample the cut cell
          const int ks = 4;
          int cnt = 0;
          double sx = 0, sy = 0, sz = 0;
          for (int ii = 0; ii < ks; ++ii)
            for (int jj = 0; jj < ks; ++jj)
              for (int ll = 0; ll < ks; ++ll) {
                const double px = xl + (2.0 * ii + 1) * h / (2 * ks);
                const double py = yl + (2.0 * jj + 1) * h / (2 * ks);
                const double pz = zl + (2.0 * ll + 1) * h / (2 * ks);
                const double dx = px - x0[0], dy = py - x0[1], dz = pz - x0[2];
                if (dx * dx + dy * dy + dz * dz <= r * r) {
                  ++cnt;
                  sx += px;
                  sy += py;
                  sz += pz;
                }
              }
          if (cnt == 0) continue;
          const double frac = static_cast<double>(cnt) / (ks * ks * ks);
          acc += interpolate(f, make_point(sx / cnt, sy / cnt, sz / cnt)) * frac * h * h * w1;
        }
      }
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Sphere quadrature

namespace {

struct AngularTable {
  std::vector<double> weight; // per-cell int |sin t|^a dt
  std::vector<double> node;   // per-cell weighted centroid angle
};

// cache keyed by (M, a); the table is radius-independent
const AngularTable& angular_table(int M, double a) {
  static std::map<std::pair<int, long long>, AngularTable> cache;
  static std::mutex mtx;
  const long long akey = static_cast<long long>(std::llround(a * 1e12));
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find({M, akey});
  if (it != cache.end()) return it->second;

  AngularTable tab;
  tab.weight.resize(M);
  tab.node.resize(M);
  const double dth = 2 * kPi / M;
  for (int j = 0; j < M; ++j) {
    const double lo = j * dth, hi = lo + dth;
    if (a == 0.0) {
      tab.weight[j] = dth;
      tab.node[j] = lo + 0.5 * dth;
    } else {
      auto wfun = [a](double t) { return std::pow(std::abs(std::sin(t)), a); };
      const double w = tanh_sinh(wfun, lo, hi);
      const double m = tanh_sinh([&](double t) { return t * wfun(t); }, lo, hi);
      tab.weight[j] = w;
      tab.node[j] = m / w;
    }
  }
  return cache.emplace(std::make_pair(M, akey), std::move(tab)).first->second;
}

int even_count(double x, int floor_val) {
  int M = std::max(floor_val, static_cast<int>(std::ceil(x)));
  return M + (M % 2);
}

double sphere_integral_impl(const Grid& g, const std::function<double(const Point&)>& f,
                            const Point& x0, double r, bool weighted) {
  check_ball_inside(g, x0, r);
  const double h = g.h();
  const double a = weighted ? g.params().a : 0.0;

  if (g.n() == 2) {
    const int M = even_count(2 * kPi * r / h, 64);
    const AngularTable& tab = angular_table(M, a);
    double acc = 0.0;
    for (int j = 0; j < M; ++j) {
      const double th = tab.node[j];
      acc += f(make_point(x0[0] + r * std::cos(th), x0[1] + r * std::sin(th))) * tab.weight[j];
    }
    return acc * std::pow(r, 1.0 + a);
  }

  // n = 3: x_n = r cos(phi); the plane phi = pi/2 is a cell boundary.
  const int Mphi = even_count(kPi * r / h, 32);
  const int Mpsi = even_count(2 * kPi * r / h, 64);
  const double dphi = kPi / Mphi, dpsi = 2 * kPi / Mpsi;
  double acc = 0.0;
  for (int i = 0; i < Mphi; ++i) {
    const double plo = i * dphi, phi = plo + 0.5 * dphi;
    // int_cell |cos t|^a sin t dt, exact via t -> cos t
    const double wphi = weight_integral_1d(std::cos(plo + dphi), std::cos(plo), a);
    const double sp = std::sin(phi), cp = std::cos(phi);
    double ring = 0.0;
    for (int j = 0; j < Mpsi; ++j) {
      const double psi = (j + 0.5) * dpsi;
      ring += f(make_point(x0[0] + r * sp * std::cos(psi), x0[1] + r * sp * std::sin(psi),
                           x0[2] + r * cp));
    }
    acc += ring * wphi * dpsi;
  }
  return acc * std::pow(r, 2.0 + a);
}

} // namespace

double sphere_integral(const ScalarField& f, const Point& x0, double r, bool weighted) {
  return sphere_integral_impl(*f.grid, [&](const Point& p) { return interpolate(f, p); }, x0, r,
                              weighted);
}

double sphere_integral_fn(const Grid& g, const std::function<double(const Point&)>& f,
                          const Point& x0, double r, bool weighted) {
  return sphere_integral_impl(g, f, x0, r, weighted);
}

// ---------------------------------------------------------------------------
// Thin-disk quadrature (unweighted H^{n-1} measure on the plane)

double thin_disk_integral(const ScalarField& f, const Point& x0, double r) {
  const Grid& g = *f.grid;
  const double h = g.h();
  check_plane_center(g, x0);
  if (std::abs(norm(x0)) + r > g.R() * (1.0 + 1e-12) + 1e-12)
    throw std::invalid_argument("thin_disk_integral: disk exits the domain");

  double acc = 0.0;
  if (g.n() == 2) {
    for (int i = 0; i < g.nodes_per_axis(); ++i) {
      const double x = g.coord(i);
      const double lo = std::max(x - h / 2, x0[0] - r);
      const double hi = std::min(x + h / 2, x0[0] + r);
      if (hi <= lo) continue;
      acc += f.v[g.flat(i, g.plane_layer())] * (hi - lo);
    }
    return acc;
  }
  for (int i = 0; i < g.nodes_per_axis(); ++i)
    for (int j = 0; j < g.nodes_per_axis(); ++j) {
      const double x = g.coord(i), y = g.coord(j);
      const ClipResult cl =
          clip_box_disk(x - h / 2, x + h / 2, y - h / 2, y + h / 2, x0[0], x0[1], r);
      if (cl.area > 0.0) acc += f.v[g.flat(i, j, g.plane_layer())] * cl.area;
    }
  return acc;
}

// ---------------------------------------------------------------------------
// Discrete forms

namespace {

double edge_weight(const Grid& g, const Point& mid) {
  const double a = g.params().a;
  const double h = g.h();
  const double xn = mid[g.n() - 1];
  if (std::abs(xn) < h / 4) return avg_plane_weight(h, a) / (h * h);
  return std::pow(std::abs(xn), a) / (h * h);
}

double rim_fraction(const Grid& g, const Point& mid) {
  const double h = g.h();
  const double R = g.R();
  const double d = norm(mid);
  const double reach = 0.5 * h * std::sqrt(static_cast<double>(g.n()));
  if (d + reach <= R) return 1.0;
  return box_ball_fraction(g.n(), mid, h / 2, make_point(0, 0, 0), R);
}

} // namespace

double dirichlet_form(const ScalarField& u, const ScalarField& v) {
  const Grid& g = *u.grid;
  if (v.grid != &g) throw std::invalid_argument("dirichlet_form: mismatched grids");
  const int n = g.n();
  const int nax = g.nodes_per_axis();
  const double h = g.h();
  const double hn = std::pow(h, n);

  double acc = 0.0;
  auto handle_edge = [&](std::size_t fa, std::size_t fb) {
    if (!g.active(fa) || !g.active(fb)) return;
    const Point pa = g.point(fa), pb = g.point(fb);
    const Point mid = {0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])};
    const double w = edge_weight(g, mid) * rim_fraction(g, mid);
    acc += w * (u.v[fa] - u.v[fb]) * (v.v[fa] - v.v[fb]) * hn;
  };

  if (n == 2) {
    for (int i = 0; i < nax; ++i)
      for (int j = 0; j < nax; ++j) {
        if (i + 1 < nax) handle_edge(g.flat(i, j), g.flat(i + 1, j));
        if (j + 1 < nax) handle_edge(g.flat(i, j), g.flat(i, j + 1));
      }
  } else {
    for (int i = 0; i < nax; ++i)
      for (int j = 0; j < nax; ++j)
        for (int k = 0; k < nax; ++k) {
          if (i + 1 < nax) handle_edge(g.flat(i, j, k), g.flat(i + 1, j, k));
          if (j + 1 < nax) handle_edge(g.flat(i, j, k), g.flat(i, j + 1, k));
          if (k + 1 < nax) handle_edge(g.flat(i, j, k), g.flat(i, j, k + 1));
        }
  }
  return acc;
}

double lumped_mass_inner(const ScalarField& u, const ScalarField& v) {
  const Grid& g = *u.grid;
  if (v.grid != &g) throw std::invalid_argument("lumped_mass_inner: mismatched grids");
  const double h = g.h();
  const double a = g.params().a;
  const int n = g.n();
  double acc = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (!g.active(f)) continue;
    const Point p = g.point(f);
    const double xn = p[n - 1];
    const double wz = weight_integral_1d(xn - h / 2, xn + h / 2, a);
    const double frac = rim_fraction(g, p);
    acc += u.v[f] * v.v[f] * wz * std::pow(h, n - 1) * frac;
  }
  return acc;
}

double sphere_l2_inner(const ScalarField& u, const ScalarField& v, double r) {
  const Grid& g = *u.grid;
  return sphere_integral_fn(
      g, [&](const Point& p) { return interpolate(u, p) * interpolate(v, p); },
      make_point(0, 0, 0), r, true);
}

} // namespace oblab
