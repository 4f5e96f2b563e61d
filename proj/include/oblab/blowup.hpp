#pragma once

#include <string>
#include <vector>

#include "oblab/diagnostics.hpp"
#include "oblab/exact.hpp"
#include "oblab/grid.hpp"

namespace oblab {

// Samples of u(x0 + r x) / r^{1+s} on a unit-ball grid of the same spacing.
struct RescaledField {
  Point x0 = make_point(0, 0, 0);
  double r = 0.0;
  ScalarField field; // lives on its own unit-ball grid
};

RescaledField rescale(const ScalarField& u, const Grid& unit_grid, const Point& x0, double r);

struct FreeBoundary {
  std::vector<std::size_t> contact;  // plane nodes with u <= threshold
  std::vector<std::size_t> boundary; // plane nodes adjacent to both sides
  double threshold = 0.0;
};

// Contact set from the solver threshold (10 * tol) and its plane boundary.
FreeBoundary contact_and_boundary(const ScalarField& u, double solver_tol = 1e-10);

// Sub-grid free-boundary locator: fits u ~ C (t - t0)^{1+s} along the plane
// through a boundary node, using the first positive-side nodes. Grid-node
// centers distort the frequency at radius r by O((h/r)^2), which is far above
// the acceptance floor, so diagnostics centers use this refinement.
Point refine_boundary_point(const ScalarField& u, std::size_t boundary_node,
                            double solver_tol = 1e-10);

enum class PointClass { Regular, HigherFrequency, NotOnBoundary };

// Regular iff N(r_min) <= (1+s) + 0.05; monotonicity makes N(r_min) an upper
// bound for N(0+).
PointClass classify_point(const DiagField& f, const Point& x0, double r_min,
                          bool certified_on_boundary);

struct BlowupSample {
  double r = 0.0;
  ConeElement element;
  double dist = 0.0;
  double N = 0.0;
};

std::vector<BlowupSample> blowup_fit(const ScalarField& u, const Grid& unit_grid,
                                     const Point& x0, const std::vector<double>& radii,
                                     ConeNorm norm = ConeNorm::H1);

struct RateCheck {
  std::vector<double> radii;
  std::vector<double> dist; // sphere-L1 distance to the fitted limit
  double exponent = 0.0;
  double required = 0.0; // gamma/2 - 0.1
  bool degenerate = false;
  bool pass = false;
};

// Power-law fit of the weighted sphere-L1 distance between u_{x0,r} and the
// blow-up limit; checks the exponent against gamma/2 - 0.1.
RateCheck uniqueness_rate_check(const ScalarField& u, const Grid& unit_grid, const Point& x0,
                                const std::vector<double>& radii, double gamma);

std::string classification_csv(const Point& x0, const std::vector<BlowupSample>& rows, int n);

} // namespace oblab
