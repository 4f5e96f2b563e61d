#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oblab/grid.hpp"
#include "oblab/solver.hpp"

namespace oblab {

// (1+s)-homogeneous boundary datum, given by its trace on the unit sphere.
// Construction certifies the even symmetry and nonnegativity where the
// sphere meets the thin plane.
struct HomogeneousDatum {
  std::string id;
  std::function<double(const Point&)> trace; // evaluated at |p| = 1
  double min_plane_value = 0.0;
};

HomogeneousDatum make_datum(const Grid& g, std::string id,
                            std::function<double(const Point&)> trace);

// x -> |x|^{1+s} c(x/|x|), value 0 at the origin.
ScalarField homogeneous_extension(const HomogeneousDatum& c, const Grid& g);

// Minimizes the Weiss energy over A_c by solving the obstacle problem with
// boundary data c; PSOR starts from the homogeneous extension, so its energy
// can only improve on the extension's.
Solution inner_minimize(const HomogeneousDatum& c, const Grid& g);

enum class EpiStatus { Ok, Degenerate, Violated };

struct EpiReport {
  std::string id;
  double W_c = 0.0;
  double W_star = 0.0;
  double kappa_emp = 0.0;
  EpiStatus status = EpiStatus::Ok;
  bool solver_converged = false;
};

// Both energies share the datum-fixed boundary term: W(v) = E(v) - (1+s) H_c
// with E the assembled Dirichlet form, so W_star <= W_c is structural.
EpiReport epiperimetric_gap(const HomogeneousDatum& c, const Grid& g);

struct KappaSweep {
  std::vector<EpiReport> table;
  double min_kappa = 0.0;
  bool any_ok = false;       // at least one non-degenerate datum
  bool any_violated = false;
};

KappaSweep kappa_sweep(const std::vector<HomogeneousDatum>& family, const Grid& g);

// The shipped 20-datum perturbation family (n = 2): traces of h_e plus
// eps * q with q a low-order even cosine polynomial, positive at the two
// plane points.
std::vector<HomogeneousDatum> default_family(const Grid& g);

// Auxiliary functional of the contradiction argument:
// G_j(z) = int |grad z|^2 dmu_a - (1+s) int z_j^2 |x_n|^a dH
//          - 4 theta int_{B'_1} z R_a(h) dH^{n-1},  h = h_{e_{n-1}},
// or +inf when z is not admissible (trace mismatch or z + theta h < 0 on the
// plane).
struct AuxiliaryInput {
  const ScalarField* z = nullptr;
  double theta = 0.0;
  std::function<double(const Point&)> zj_trace; // boundary datum of z_j
};

double auxiliary_functional(const AuxiliaryInput& inp);

std::string epi_csv(const std::vector<EpiReport>& table);

} // namespace oblab
