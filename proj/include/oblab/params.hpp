#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace oblab {

// Points live in R^3 with unused trailing components fixed at 0, so the
// same code paths serve n = 2 and n = 3. The last used axis is the
// distinguished direction x_n carrying the weight |x_n|^a.
using Point = std::array<double, 3>;

inline Point make_point(double x0, double x1, double x2 = 0.0) { return {x0, x1, x2}; }

inline double norm(const Point& p) {
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

struct ProblemParams {
  int n = 2;           // ambient dimension (2 or 3)
  double s = 0.5;      // fractional order in (0,1)
  double a = 0.0;      // weight exponent, a = 1 - 2s
  double h = 1.0 / 64; // grid spacing
  double R_dom = 1.0;  // domain ball radius

  static ProblemParams make(int n, double s, double h, double R_dom = 1.0) {
    ProblemParams p;
    p.n = n;
    p.s = s;
    p.a = 1.0 - 2.0 * s;
    p.h = h;
    p.R_dom = R_dom;
    p.validate();
    return p;
  }

  void validate() const {
    if (n != 2 && n != 3) throw std::invalid_argument("ProblemParams: n must be 2 or 3");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("ProblemParams: s must lie in (0,1)");
    if (std::abs(a - (1.0 - 2.0 * s)) > 1e-14)
      throw std::invalid_argument("ProblemParams: a must equal 1 - 2s");
    if (!(a > -1.0 && a < 1.0)) throw std::invalid_argument("ProblemParams: a must lie in (-1,1)");
    if (!(h > 0.0)) throw std::invalid_argument("ProblemParams: h must be positive");
    if (!(R_dom > 0.0)) throw std::invalid_argument("ProblemParams: R_dom must be positive");
    const double cells = R_dom / h;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
      throw std::invalid_argument("ProblemParams: h must divide R_dom evenly");
    if (std::round(cells) < 16)
      throw std::invalid_argument("ProblemParams: grid too coarse, need >= 16 cells across R_dom");
  }

  int cells_per_radius() const { return static_cast<int>(std::round(R_dom / h)); }
};

} // namespace oblab
