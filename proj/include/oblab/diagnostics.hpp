#pragma once

#include <string>
#include <vector>

#include "oblab/grid.hpp"

namespace oblab {

// Field together with its cached finite-difference gradient; every
// diagnostic below is a pure function of this pair.
struct DiagField {
  const ScalarField* u = nullptr;
  VectorField grad;

  explicit DiagField(const ScalarField& f) : u(&f), grad(gradient(f)) {}
};

struct HD {
  double H = 0.0;
  double D = 0.0;
};

// D_a via the weighted volume integral of |grad u|^2, H_a via the weighted
// sphere integral of u^2. Radii are trusted up to 0.8 R_dom.
HD H_D_at(const DiagField& f, const Point& x0, double r);

double frequency(const DiagField& f, const Point& x0, double r);

// W = D/r^{n+1} - (1+s) H/r^{n+2}; cross-checked against
// (H/r^{n+2}) (N - (1+s)) to 1e-12 relative.
double weiss_energy(const DiagField& f, const Point& x0, double r);

struct IdentityResiduals {
  double rellich = 0.0;  // Rellich formula, |lhs - rhs|
  double H_prime = 0.0;  // FD H'(r) vs (n-2s)/r H + 2 int u du/dnu
  double D_prime = 0.0;  // FD D'(r) vs (n-2+a)/r D + 2 int (du/dnu)^2
  double D_boundary = 0.0; // D vs int u du/dnu
  double scale = 0.0;      // magnitude of the compared quantities
};

IdentityResiduals identity_residuals(const DiagField& f, const Point& x0, double r);

// |FD d/dr W - (2/r^{n+1}) int_{dB_r} (du/dnu - (1+s) u / r)^2 |x_n|^a|
double weiss_derivative_residual(const DiagField& f, const Point& x0, double r);

struct RadiusSample {
  double r = 0.0;
  double H = 0.0;
  double D = 0.0;
  double N = 0.0;
  double W = 0.0;
  double res_rellich = 0.0;
  double res_Hp = 0.0;
  double res_Dp = 0.0;
  double res_Db = 0.0;
  double res_weiss = 0.0;
};

struct DiagnosticsSeries {
  Point x0 = make_point(0, 0, 0);
  int n = 2;
  std::vector<RadiusSample> samples; // radii strictly increasing
};

// Geometric radius ladder r_max * rho^k down to r_min (default 8h), rho =
// 0.85, with the per-radius identities evaluated at every rung.
DiagnosticsSeries build_series(const DiagField& f, const Point& x0, double r_min, double r_max,
                               bool with_residuals = true);

enum class MonotoneQuantity { N, W, H_over_r };

struct Violation {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double drop = 0.0;
};

// Adjacent-pair scan; a drop beyond 1e-6 * (scale of the quantity) counts.
std::vector<Violation> monotonicity_scan(const DiagnosticsSeries& s, MonotoneQuantity which);

struct FloorReport {
  double min_N = 0.0;
  double floor = 0.0;
  bool pass = false;
};

// min over radii of N against (1+s) - tol; callers certify x0 on the free
// boundary first (see blowup.hpp).
FloorReport frequency_floor_check(const DiagnosticsSeries& s, double s_order,
                                  double tol = 1e-4);

struct DecayFit {
  double C = 0.0;
  double gamma_emp = 0.0;
  double max_log_residual = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  bool degenerate = false; // too few radii with W > 0
};

DecayFit decay_fit(const DiagnosticsSeries& s);

// H_0 = min_r H(r)/r^{n+2}; positive at regular centers.
double nondegeneracy_estimate(const DiagnosticsSeries& s, int n);

std::string series_csv(const DiagnosticsSeries& s);

} // namespace oblab
