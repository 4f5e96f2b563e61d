#include "oblab/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "oblab/quadrature.hpp"

namespace oblab {

namespace {

double rim_frac(const Grid& g, const Point& mid) {
  const double reach = 0.5 * g.h() * std::sqrt(static_cast<double>(g.n()));
  if (norm(mid) + reach <= g.R()) return 1.0;
  return box_ball_fraction(g.n(), mid, g.h() / 2, make_point(0, 0, 0), g.R());
}

// Visits every half-grid edge (both endpoints active, x_n >= 0) with its
// assembled coefficient c_e = mult * w_e * frac * h^n.
template <typename F>
void for_each_half_edge(const Grid& g, F&& visit) {
  const int n = g.n();
  const int nax = g.nodes_per_axis();
  const int m = g.m();
  const double h = g.h();
  const double a = g.params().a;
  const double hn = std::pow(h, n);
  const double wplane = avg_plane_weight(h, a) / (h * h);

  auto do_node = [&](int i, int j, int k) {
    const std::size_t f = g.flat(i, j, k);
    if (!g.active(f)) return;
    const Point p = g.point(f);
    const int layer = (n == 2 ? j : k) - m;
    // tangential edges
    for (int d = 0; d < n - 1; ++d) {
      int q[3] = {i, j, k};
      q[d] += 1;
      if (q[d] >= nax) continue;
      const std::size_t fb = g.flat(q[0], q[1], q[2]);
      if (!g.active(fb)) continue;
      Point mid = p;
      mid[d] += h / 2;
      const double w = layer == 0 ? wplane : std::pow(std::abs(p[n - 1]), a) / (h * h);
      const double mult = layer == 0 ? 1.0 : 2.0;
      visit(f, fb, mult * w * rim_frac(g, mid) * hn);
    }
    // normal edge toward larger x_n
    {
      int q[3] = {i, j, k};
      q[n - 1] += 1;
      if (q[n - 1] < nax) {
        const std::size_t fb = g.flat(q[0], q[1], q[2]);
        if (g.active(fb)) {
          Point mid = p;
          mid[n - 1] += h / 2;
          const double w = std::pow(std::abs(mid[n - 1]), a) / (h * h);
          visit(f, fb, 2.0 * w * rim_frac(g, mid) * hn);
        }
      }
    }
  };

  if (n == 2) {
    for (int i = 0; i < nax; ++i)
      for (int j = m; j < nax; ++j) do_node(i, j, 0);
  } else {
    for (int i = 0; i < nax; ++i)
      for (int j = 0; j < nax; ++j)
        for (int k = m; k < nax; ++k) do_node(i, j, k);
  }
}

bool is_dirichlet(const Grid& g, std::size_t f) {
  int i, j, k;
  g.unflat(f, i, j, k);
  const int nax = g.nodes_per_axis();
  const int idx[3] = {i, j, k};
  for (int d = 0; d < g.n(); ++d)
    for (int off : {-1, 1}) {
      int q[3] = {i, j, k};
      q[d] = idx[d] + off;
      if (q[d] < 0 || q[d] >= nax) return true;
      if (!g.active(g.flat(q[0], q[1], q[2]))) return true;
    }
  return false;
}

} // namespace

DiscreteProblem::DiscreteProblem(const Grid& grid, const std::function<double(const Point&)>& g)
    : grid_(&grid) {
  const Grid& gr = grid;
  const int n = gr.n();

  gval_.resize(gr.size());
  for (std::size_t f = 0; f < gr.size(); ++f) gval_[f] = g(gr.point(f));
  for (std::size_t f = 0; f < gr.size(); ++f) {
    const std::size_t mf = gr.mirror(f);
    if (std::abs(gval_[f] - gval_[mf]) > 1e-12 * (1.0 + std::abs(gval_[f])))
      throw std::invalid_argument("assemble: boundary datum is not symmetric in x_n");
  }

  packed_of_.assign(gr.size(), -1);
  const int nax = gr.nodes_per_axis();
  const int m = gr.m();
  auto consider = [&](int i, int j, int k) {
    const std::size_t f = gr.flat(i, j, k);
    if (!gr.active(f)) return;
    if (is_dirichlet(gr, f)) {
      if (gr.on_plane(f) && gval_[f] < -1e-14)
        throw std::invalid_argument("assemble: incompatible datum, negative on the thin plane");
      return;
    }
    packed_of_[f] = static_cast<std::ptrdiff_t>(free_nodes_.size());
    free_nodes_.push_back(f);
    constrained_.push_back(gr.on_plane(f) ? 1 : 0);
  };
  if (n == 2) {
    for (int i = 0; i < nax; ++i)
      for (int j = m; j < nax; ++j) consider(i, j, 0);
  } else {
    for (int i = 0; i < nax; ++i)
      for (int j = 0; j < nax; ++j)
        for (int k = m; k < nax; ++k) consider(i, j, k);
  }

  diag_.assign(free_nodes_.size(), 0.0);
  rhs_.assign(free_nodes_.size(), 0.0);
  nbr_.resize(free_nodes_.size());

  for_each_half_edge(gr, [&](std::size_t fa, std::size_t fb, double c) {
    const std::ptrdiff_t pa = packed_of_[fa], pb = packed_of_[fb];
    if (pa >= 0) diag_[pa] += c;
    if (pb >= 0) diag_[pb] += c;
    if (pa >= 0 && pb >= 0) {
      nbr_[pa].push_back({static_cast<std::size_t>(pb), c});
      nbr_[pb].push_back({static_cast<std::size_t>(pa), c});
    } else if (pa >= 0) {
      rhs_[pa] += c * gval_[fb];
    } else if (pb >= 0) {
      rhs_[pb] += c * gval_[fa];
    } else {
      const double d = gval_[fa] - gval_[fb];
      fixed_energy_ += c * d * d;
    }
  });
  // constant from free-Dirichlet edges: sum c * g_b^2
  for_each_half_edge(gr, [&](std::size_t fa, std::size_t fb, double c) {
    const std::ptrdiff_t pa = packed_of_[fa], pb = packed_of_[fb];
    if (pa >= 0 && pb < 0) fixed_energy_ += c * gval_[fb] * gval_[fb];
    if (pb >= 0 && pa < 0) fixed_energy_ += c * gval_[fa] * gval_[fa];
  });
}

double DiscreteProblem::packed_energy(const std::vector<double>& x) const {
  double e = fixed_energy_;
  for (std::size_t p = 0; p < free_nodes_.size(); ++p) {
    double cross = 0.0;
    for (const auto& [q, c] : nbr_[p]) cross += c * x[q];
    e += x[p] * (diag_[p] * x[p] - cross) - 2.0 * rhs_[p] * x[p];
  }
  return e;
}

ScalarField DiscreteProblem::expand(const std::vector<double>& x) const {
  const Grid& g = *grid_;
  ScalarField u(g);
  u.v = gval_;
  for (std::size_t p = 0; p < free_nodes_.size(); ++p) u.v[free_nodes_[p]] = x[p];
  // lower half copies the upper half (even symmetry)
  for (std::size_t f = 0; f < g.size(); ++f) {
    int i, j, k;
    g.unflat(f, i, j, k);
    const int layer = (g.n() == 2 ? j : k) - g.m();
    if (layer < 0) u.v[f] = u.v[g.mirror(f)];
  }
  return u;
}

std::vector<double> DiscreteProblem::restrict_to_free(const ScalarField& u) const {
  std::vector<double> x(free_nodes_.size());
  for (std::size_t p = 0; p < free_nodes_.size(); ++p) x[p] = u.v[free_nodes_[p]];
  return x;
}

DiscreteProblem assemble(const Grid& grid, const std::function<double(const Point&)>& g) {
  return DiscreteProblem(grid, g);
}

Solution solve_psor(const DiscreteProblem& p, const PsorOptions& opt) {
  if (!(opt.omega > 0.0 && opt.omega < 2.0))
    throw std::invalid_argument("solve_psor: omega must lie in (0,2)");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solve_psor: tol must be positive");

  const std::size_t N = p.unknowns();
  std::vector<double> x(N, 0.0);
  if (opt.initial) {
    x = p.restrict_to_free(*opt.initial);
    for (std::size_t i = 0; i < N; ++i)
      if (p.constrained(i)) x[i] = std::max(x[i], 0.0);
  }

  double last_energy = p.packed_energy(x);
  double maxupd = 0.0;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    maxupd = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double cross = p.rhs(i);
      for (const auto& [q, c] : p.neighbors(i)) cross += c * x[q];
      const double target = cross / p.diag(i);
      double xn = x[i] + opt.omega * (target - x[i]);
      if (p.constrained(i) && xn < 0.0) xn = 0.0;
      const double d = std::abs(xn - x[i]);
      if (d > maxupd) maxupd = d;
      x[i] = xn;
    }
    if ((it + 1) % 50 == 0) {
      const double e = p.packed_energy(x);
      if (e > last_energy + 1e-9 * (std::abs(last_energy) + 1.0))
        throw std::runtime_error("solve_psor: energy increased across sweeps");
      last_energy = e;
    }
    if (maxupd < opt.tol) {
      ++it;
      break;
    }
  }

  Solution sol;
  sol.u = p.expand(x);
  sol.iterations = it;
  sol.final_update = maxupd;
  sol.energy = p.packed_energy(x);
  sol.converged = maxupd < opt.tol;
  sol.tol = opt.tol;
  return sol;
}

ScalarField harmonic_extension(const DiscreteProblem& p, double tol, int max_iter) {
  const std::size_t N = p.unknowns();
  std::vector<double> x(N, 0.0);
  const double omega = 1.8;
  for (int it = 0; it < max_iter; ++it) {
    double maxupd = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double cross = p.rhs(i);
      for (const auto& [q, c] : p.neighbors(i)) cross += c * x[q];
      const double target = cross / p.diag(i);
      const double xn = x[i] + omega * (target - x[i]);
      maxupd = std::max(maxupd, std::abs(xn - x[i]));
      x[i] = xn;
    }
    if (maxupd < tol) break;
  }
  return p.expand(x);
}

KktReport kkt_check(const DiscreteProblem& p, const Solution& sol, double tol) {
  const std::vector<double> x = p.restrict_to_free(sol.u);
  KktReport rep;
  rep.min_plane_value = 1e300;
  bool any_plane = false;
  for (std::size_t i = 0; i < p.unknowns(); ++i) {
    double cross = p.rhs(i);
    for (const auto& [q, c] : p.neighbors(i)) cross += c * x[q];
    const double resid = (p.diag(i) * x[i] - cross) / p.diag(i); // units of u
    if (p.constrained(i)) {
      any_plane = true;
      rep.min_plane_value = std::min(rep.min_plane_value, x[i]);
      const double lam = -resid; // discrete L_a u, must be <= 0 up to tol
      rep.max_flux_defect = std::max(rep.max_flux_defect, lam);
      rep.max_complementarity = std::max(rep.max_complementarity, std::abs(x[i] * lam));
      if (x[i] <= 10.0 * tol) {
        ++rep.contact_count;
        continue; // contact nodes carry the multiplier, not a residual
      }
    }
    rep.max_offcontact_residual = std::max(rep.max_offcontact_residual, std::abs(resid));
  }
  if (!any_plane) rep.min_plane_value = 0.0;
  return rep;
}

double energy(const DiscreteProblem& p, const ScalarField& u) {
  double e = 0.0;
  for_each_half_edge(p.grid(), [&](std::size_t fa, std::size_t fb, double c) {
    const double d = u.v[fa] - u.v[fb];
    e += c * d * d;
  });
  return e;
}

} // namespace oblab
