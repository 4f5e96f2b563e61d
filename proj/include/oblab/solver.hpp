#pragma once

#include <functional>
#include <vector>

#include "oblab/grid.hpp"

namespace oblab {

// Quadratic form for the discrete thin-obstacle problem, assembled on the
// half-grid x_n >= 0 with edge weights doubled across the plane layer.
// Dirichlet data live on the staircase layer of nodes nearest the domain
// sphere; plane nodes carry the unilateral constraint u >= 0.
class DiscreteProblem {
public:
  DiscreteProblem(const Grid& grid, const std::function<double(const Point&)>& g);

  const Grid& grid() const { return *grid_; }
  std::size_t unknowns() const { return free_nodes_.size(); }

  // packed accessors used by the solver and by test oracles
  bool constrained(std::size_t p) const { return constrained_[p] != 0; }
  double diag(std::size_t p) const { return diag_[p]; }
  double rhs(std::size_t p) const { return rhs_[p]; }
  const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t p) const {
    return nbr_[p];
  }
  std::size_t full_index(std::size_t p) const { return free_nodes_[p]; }

  // energy of the assembled form on a packed iterate (boundary data folded in)
  double packed_energy(const std::vector<double>& x) const;

  // expand a packed iterate to a full-grid field (even reflection, Dirichlet
  // data at staircase and exterior nodes)
  ScalarField expand(const std::vector<double>& x) const;
  std::vector<double> restrict_to_free(const ScalarField& u) const;

  double boundary_value(std::size_t full) const { return gval_[full]; }

private:
  const Grid* grid_;
  std::vector<double> gval_;                // datum at every lattice node
  std::vector<std::size_t> free_nodes_;     // half-grid free nodes, lexicographic
  std::vector<std::ptrdiff_t> packed_of_;   // full index -> packed or -1
  std::vector<std::uint8_t> constrained_;   // plane constraint flag per packed node
  std::vector<double> diag_;
  std::vector<double> rhs_;                 // contribution of Dirichlet neighbors
  std::vector<std::vector<std::pair<std::size_t, double>>> nbr_; // packed, coeff
  double fixed_energy_ = 0.0;               // edges between Dirichlet nodes
};

struct Solution {
  ScalarField u;
  int iterations = 0;
  double final_update = 0.0;
  double energy = 0.0;
  bool converged = false;
  double tol = 0.0;
};

struct PsorOptions {
  double omega = 1.5;
  double tol = 1e-10;
  int max_iter = 200000;
  // optional initial iterate on the full grid
  const ScalarField* initial = nullptr;
};

DiscreteProblem assemble(const Grid& grid, const std::function<double(const Point&)>& g);

// Projected SOR sweeps in lexicographic order; clamps constrained nodes at 0
// after each update. Energy is nonincreasing (checked every 50 sweeps).
Solution solve_psor(const DiscreteProblem& p, const PsorOptions& opt = {});

// Unconstrained SOR solve of the same form; the "boundary-harmonic
// extension" initial guess.
ScalarField harmonic_extension(const DiscreteProblem& p, double tol = 1e-10,
                               int max_iter = 200000);

struct KktReport {
  double max_offcontact_residual = 0.0; // normalized stencil residual off contact
  double min_plane_value = 0.0;
  double max_flux_defect = 0.0;         // max over plane nodes of (L_a u)_i, must be <= tol
  double max_complementarity = 0.0;     // max |u_i * lambda_i|
  std::size_t contact_count = 0;
};

KktReport kkt_check(const DiscreteProblem& p, const Solution& sol, double tol);

// Value of the assembled quadratic form on an arbitrary full-grid field.
double energy(const DiscreteProblem& p, const ScalarField& u);

} // namespace oblab
