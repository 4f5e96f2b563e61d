#pragma once

#include <optional>

#include "oblab/grid.hpp"

namespace oblab {

// lambda * h_e with e a unit direction in the thin plane; lambda = 0 names
// the zero function. For n = 2 the direction reduces to e[0] in {+1, -1}.
struct ConeElement {
  double lambda = 0.0;
  Point e = make_point(1, 0, 0);

  void validate(int n) const;
};

// alpha * h_e + v_{e,xi}; xi must be orthogonal to both e and e_n (so for
// n = 2 it is forced empty).
struct TangentVector {
  double alpha = 0.0;
  Point xi = make_point(0, 0, 0);
};

// a0 * h_{e_{n-1}} + (sum_i a_i x_i) (sqrt(x_{n-1}^2 + x_n^2) + x_{n-1})^s
struct AppendixProfile {
  double a0 = 0.0;
  double a1 = 0.0; // only n = 3 supports a nonzero x_i factor
  double s = 0.5;
};

// (1+s)-homogeneous global solution profile; value 0 on the contact
// half-line {x_n = 0, xhat.e <= 0} by the convention 0^s * (finite) = 0.
double h_e_eval(const Point& x, const Point& e, double s, int n);

// Closed-form gradient away from the contact half-line; signals the
// singular set by returning nullopt.
std::optional<std::array<double, 3>> h_e_grad(const Point& x, const Point& e, double s, int n);

// Weighted normal flux limit R_a(h_e) on the plane.
double R_a_h(const Point& xhat, const Point& e, double s, int n);

ScalarField sample_cone_element(const ConeElement& c, const Grid& g);

ScalarField tangent_field(const Point& e, const TangentVector& t, const Grid& g);

double appendix_profile_eval(const AppendixProfile& p, const Point& x, int n);
ScalarField sample_appendix_profile(const AppendixProfile& p, const Grid& g);

enum class ConeNorm { H1, SphereL2 };

struct ConeFit {
  ConeElement element;
  double dist = 0.0;
};

// Projects f onto the cone {lambda h_e}: for each candidate direction the
// optimal lambda is the clipped Rayleigh quotient in the chosen inner
// product; n = 3 refines a 64-point direction scan by golden section.
ConeFit project_to_cone(const ScalarField& f, ConeNorm norm = ConeNorm::H1);

// Normalized residual of the conservative stencil at a node; O(h^2) for
// exact solutions away from the contact half-line.
double stencil_residual(const ScalarField& f, std::size_t node);

} // namespace oblab
