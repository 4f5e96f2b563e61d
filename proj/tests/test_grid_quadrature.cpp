#include <doctest.h>

#include <cmath>
#include <random>

#include "oblab/exact.hpp"
#include "oblab/grid.hpp"
#include "oblab/quadrature.hpp"

using namespace oblab;

namespace {
constexpr double kPi = 3.14159265358979323846;

// brute-force area/centroid of box cap disk by subdivision, clip oracle
ClipResult clip_oracle(double x0, double x1, double y0, double y1, double cx, double cy,
                       double r) {
  const int K = 600;
  const double dx = (x1 - x0) / K, dy = (y1 - y0) / K;
  double area = 0, sx = 0, sy = 0;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      const double px = x0 + (i + 0.5) * dx, py = y0 + (j + 0.5) * dy;
      const double qx = px - cx, qy = py - cy;
      if (qx * qx + qy * qy <= r * r) {
        area += dx * dy;
        sx += px * dx * dy;
        sy += py * dx * dy;
      }
    }
  ClipResult out;
  out.area = area;
  if (area > 0) {
    out.cx = sx / area;
    out.cy = sy / area;
  }
  return out;
}
} // namespace

TEST_CASE("grid construction") {
  SUBCASE("5x5 lattice has 13 nodes in the closed unit ball") {
    // R/h = 2 is below the coarseness floor, so count on a raw lattice
    ProblemParams p = ProblemParams::make(2, 0.5, 1.0 / 16);
    Grid g(p);
    int count = 0;
    for (std::size_t f = 0; f < g.size(); ++f) {
      const Point q = g.point(f);
      const bool coarse_node = std::abs(std::remainder(q[0], 0.5)) < 1e-12 &&
                               std::abs(std::remainder(q[1], 0.5)) < 1e-12;
      if (coarse_node && g.active(f)) ++count;
    }
    CHECK(count == 13);
  }

  SUBCASE("rejects bad spacing") {
    CHECK_THROWS(ProblemParams::make(2, 0.5, -0.1));
    CHECK_THROWS(ProblemParams::make(2, 0.5, 0.3)); // does not divide R
    CHECK_THROWS(ProblemParams::make(2, 0.5, 0.25)); // too coarse
  }

  SUBCASE("plane layer is exact") {
    Grid g(ProblemParams::make(2, 0.5, 1.0 / 128));
    bool found = false;
    for (std::size_t f : g.plane_nodes()) found = found || g.point(f)[1] == 0.0;
    CHECK(found);
    for (std::size_t f : g.plane_nodes()) CHECK(g.point(f)[1] == 0.0);
  }

  SUBCASE("node set symmetric under reflection") {
    Grid g(ProblemParams::make(2, 0.25, 1.0 / 32));
    for (std::size_t f = 0; f < g.size(); ++f) CHECK(g.active(f) == g.active(g.mirror(f)));
  }
}

TEST_CASE("interpolation and gradient") {
  Grid g(ProblemParams::make(2, 0.5, 1.0 / 32));
  SUBCASE("multilinear reproduces linear functions") {
    ScalarField f = sample(g, [](const Point& p) { return 2.0 * p[0] - 0.7 * p[1] + 0.3; });
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (int t = 0; t < 50; ++t) {
      const Point p = make_point(U(rng), U(rng));
      CHECK(interpolate(f, p) == doctest::Approx(2.0 * p[0] - 0.7 * p[1] + 0.3).epsilon(1e-12));
    }
    CHECK(interpolate(f, g.point(g.flat(3, 5))) ==
          doctest::Approx(f.v[g.flat(3, 5)]).epsilon(1e-14));
  }
  SUBCASE("gradient exact on linears, zero on constants") {
    ScalarField f = sample(g, [](const Point& p) { return p[0]; });
    VectorField gr = gradient(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(gr.v[i][0] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(gr.v[i][1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    ScalarField c = sample(g, [](const Point&) { return 3.25; });
    VectorField gc = gradient(c);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(gc.v[i][0]) < 1e-13);
  }
}

TEST_CASE("clip_box_disk matches subdivision oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const double x0 = U(rng), y0 = U(rng);
    const double w = 0.05 + 0.4 * std::abs(U(rng)), hgt = 0.05 + 0.4 * std::abs(U(rng));
    const double cx = U(rng), cy = U(rng), r = 0.2 + std::abs(U(rng));
    const ClipResult got = clip_box_disk(x0, x0 + w, y0, y0 + hgt, cx, cy, r);
    const ClipResult want = clip_oracle(x0, x0 + w, y0, y0 + hgt, cx, cy, r);
    CHECK(got.area == doctest::Approx(want.area).epsilon(0.02).scale(w * hgt));
    if (want.area > 0.05 * w * hgt) {
      CHECK(got.cx == doctest::Approx(want.cx).epsilon(0.02).scale(w));
      CHECK(got.cy == doctest::Approx(want.cy).epsilon(0.02).scale(hgt));
    }
  }
}

TEST_CASE("weighted volume integral") {
  Grid g(ProblemParams::make(2, 0.5, 1.0 / 64)); // a = 0
  const Point origin = make_point(0, 0);

  SUBCASE("area of the unit disk, a = 0") {
    ScalarField one = sample(g, [](const Point&) { return 1.0; });
    CHECK(weighted_volume_integral(one, origin, 1.0) ==
          doctest::Approx(kPi).epsilon(2.0 / 64 / kPi));
  }
  SUBCASE("odd integrand vanishes") {
    ScalarField f = sample(g, [](const Point& p) { return p[0]; });
    CHECK(std::abs(weighted_volume_integral(f, origin, 1.0)) < 1.0 / (64.0 * 64.0));
  }
  SUBCASE("|x_n| weight, a = 1 (s = 0): analytic 4/3") {
    // a = 1 corresponds to s = 0, outside the s-range; emulate by a grid
    // with a = 1 - 2s, s = 0.25 -> a = 0.5 and compare against tanh-sinh
    Grid gw(ProblemParams::make(2, 0.25, 1.0 / 64));
    ScalarField one = sample(gw, [](const Point&) { return 1.0; });
    const double got = weighted_volume_integral(one, origin, 1.0);
    // reference: int_0^1 int_0^2pi rho^{1.5} |sin|^{0.5} dtheta drho
    auto w = [](double th) { return std::pow(std::abs(std::sin(th)), 0.5); };
    const double ang = tanh_sinh(w, 0.0, kPi) + tanh_sinh(w, kPi, 2 * kPi);
    const double want = ang / 2.5;
    CHECK(got == doctest::Approx(want).epsilon(2.0 / 64));
  }
  SUBCASE("ball exiting the domain is rejected") {
    ScalarField one = sample(g, [](const Point&) { return 1.0; });
    CHECK_THROWS(weighted_volume_integral(one, make_point(0.5, 0), 0.75));
    CHECK_THROWS(weighted_volume_integral(one, make_point(0.3, 0.2), 0.1));
  }
}

TEST_CASE("sphere integral") {
  Grid g(ProblemParams::make(2, 0.5, 1.0 / 64));
  const Point origin = make_point(0, 0);

  SUBCASE("circumference, unweighted") {
    ScalarField one = sample(g, [](const Point&) { return 1.0; });
    CHECK(sphere_integral(one, origin, 1.0, false) == doctest::Approx(2 * kPi).epsilon(1e-12));
  }
  SUBCASE("weighted measure of the circle for several a") {
    for (double s : {0.25, 0.5, 0.75}) {
      Grid gs(ProblemParams::make(2, s, 1.0 / 64));
      ScalarField one = sample(gs, [](const Point&) { return 1.0; });
      const double a = 1.0 - 2.0 * s;
      auto w = [a](double th) { return std::pow(std::abs(std::sin(th)), a); };
      // split at the singular angles so the endpoint rule applies
      const double want = tanh_sinh(w, 0.0, kPi) + tanh_sinh(w, kPi, 2 * kPi);
      CHECK(sphere_integral(one, origin, 1.0, true) == doctest::Approx(want).epsilon(1e-8));
    }
  }
  SUBCASE("h_e^2 with a = 0 integrates to 2 pi") {
    ScalarField he2 = sample(g, [](const Point& p) {
      const double v = h_e_eval(p, make_point(1, 0), 0.5, 2);
      return v * v;
    });
    CHECK(sphere_integral(he2, origin, 1.0, true) ==
          doctest::Approx(2 * kPi).epsilon(3.0 / 64));
  }
  SUBCASE("n = 3 sphere area and weighted measure") {
    Grid g3(ProblemParams::make(3, 0.5, 1.0 / 16));
    ScalarField one = sample(g3, [](const Point&) { return 1.0; });
    CHECK(sphere_integral(one, make_point(0, 0, 0), 0.75, false) ==
          doctest::Approx(4 * kPi * 0.75 * 0.75).epsilon(1e-10));
    Grid g3w(ProblemParams::make(3, 0.25, 1.0 / 16));
    ScalarField onew = sample(g3w, [](const Point&) { return 1.0; });
    // int |cos|^a over the sphere: 2 pi * 2/(1+a) * r^{2+a}
    const double a = 0.5;
    const double want = 2 * kPi * 2.0 / (1.0 + a) * std::pow(0.75, 2 + a);
    CHECK(sphere_integral(onew, make_point(0, 0, 0), 0.75, true) ==
          doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("thin disk integral") {
  Grid g(ProblemParams::make(2, 0.5, 1.0 / 64));
  SUBCASE("length of the segment") {
    ScalarField one = sample(g, [](const Point&) { return 1.0; });
    CHECK(thin_disk_integral(one, make_point(0, 0), 1.0) ==
          doctest::Approx(2.0).epsilon(1.0 / 64));
  }
  SUBCASE("zero field and odd field") {
    ScalarField zero = sample(g, [](const Point&) { return 0.0; });
    CHECK(thin_disk_integral(zero, make_point(0, 0), 1.0) == 0.0);
    ScalarField odd = sample(g, [](const Point& p) { return p[0]; });
    CHECK(std::abs(thin_disk_integral(odd, make_point(0, 0), 1.0)) < 1e-10);
  }
}

TEST_CASE("quadrature consistency under refinement") {
  // smooth integrand, weighted: error should drop by at least ~2x per halving
  auto run = [](double h) {
    Grid g(ProblemParams::make(2, 0.25, h));
    ScalarField f = sample(g, [](const Point& p) { return std::cos(p[0]) + p[1] * p[1]; });
    return weighted_volume_integral(f, make_point(0, 0), 0.9);
  };
  const double c1 = run(1.0 / 32), c2 = run(1.0 / 64), c3 = run(1.0 / 128);
  const double e1 = std::abs(c1 - c3), e2 = std::abs(c2 - c3);
  CHECK(e2 < e1); // refinement helps; the sharp rate is covered in diagnostics
}

TEST_CASE("symmetric integrands are reflection invariant") {
  Grid g(ProblemParams::make(2, 0.75, 1.0 / 32));
  ScalarField f = sample(g, [](const Point& p) { return std::exp(-p[0] * p[0]) + p[1] * p[1]; });
  ScalarField fr(g);
  for (std::size_t i = 0; i < g.size(); ++i) fr.v[i] = f.v[g.mirror(i)];
  CHECK(weighted_volume_integral(f, make_point(0, 0), 0.8) ==
        doctest::Approx(weighted_volume_integral(fr, make_point(0, 0), 0.8)).epsilon(1e-12));
  CHECK(sphere_integral(f, make_point(0, 0), 0.8, true) ==
        doctest::Approx(sphere_integral(fr, make_point(0, 0), 0.8, true)).epsilon(1e-12));
}
