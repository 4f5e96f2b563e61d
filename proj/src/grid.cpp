#include "oblab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace oblab {

Grid::Grid(const ProblemParams& params) : p_(params) {
  p_.validate();
  m_ = p_.cells_per_radius();
  nax_ = 2 * m_ + 1;
  total_ = 1;
  for (int d = 0; d < p_.n; ++d) total_ *= static_cast<std::size_t>(nax_);
  active_.assign(total_, 0);
  for (std::size_t f = 0; f < total_; ++f) {
    if (inside_ball(point(f))) {
      active_[f] = 1;
      ++active_count_;
      if (on_plane(f)) plane_nodes_.push_back(f);
    }
  }
}

bool Grid::on_plane(std::size_t f) const {
  int i, j, k;
  unflat(f, i, j, k);
  return (p_.n == 2 ? j : k) == m_;
}

std::size_t Grid::mirror(std::size_t f) const {
  int i, j, k;
  unflat(f, i, j, k);
  if (p_.n == 2) return flat(i, 2 * m_ - j);
  return flat(i, j, 2 * m_ - k);
}

Grid build_grid(const ProblemParams& params) { return Grid(params); }

ScalarField sample(const Grid& g, const std::function<double(const Point&)>& f) {
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out.v[i] = f(g.point(i));
  return out;
}

bool is_symmetric(const ScalarField& f, double tol) {
  const Grid& g = *f.grid;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(f.v[i] - f.v[g.mirror(i)]) > tol) return false;
  return true;
}

void check_finite(const ScalarField& f) {
  for (std::size_t i = 0; i < f.v.size(); ++i)
    if (!std::isfinite(f.v[i]) && f.grid->active(i))
      throw std::runtime_error("ScalarField: non-finite value at active node");
}

double interpolate(const ScalarField& f, const Point& p) {
  const Grid& g = *f.grid;
  const int n = g.n();
  const double h = g.h();
  int base[3] = {0, 0, 0};
  double w[3] = {0.0, 0.0, 0.0};
  for (int d = 0; d < n; ++d) {
    double t = p[d] / h + g.m();
    if (t < -1e-9 || t > 2 * g.m() + 1e-9)
      throw std::out_of_range("interpolate: point outside lattice hull");
    int i = static_cast<int>(std::floor(t));
    if (i < 0) i = 0;
    if (i > 2 * g.m() - 1) i = 2 * g.m() - 1;
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
    if (wc != 0.0) acc += wc * f.v[g.flat(idx[0], idx[1], idx[2])];
  }
  return acc;
}

VectorField gradient(const ScalarField& f) {
  const Grid& g = *f.grid;
  const int n = g.n();
  const int nax = g.nodes_per_axis();
  const double h = g.h();
  VectorField out(g);

  auto shifted = [&](std::size_t base, int d, int off) {
    int i, j, k;
    g.unflat(base, i, j, k);
    int idx[3] = {i, j, k};
    idx[d] += off;
    return g.flat(idx[0], idx[1], idx[2]);
  };

  for (std::size_t fl = 0; fl < g.size(); ++fl) {
    int i, j, k;
    g.unflat(fl, i, j, k);
    const int idx[3] = {i, j, k};
    for (int d = 0; d < n; ++d) {
      double gval;
      if (idx[d] == 0) {
        gval = (-3.0 * f.v[fl] + 4.0 * f.v[shifted(fl, d, 1)] - f.v[shifted(fl, d, 2)]) / (2 * h);
      } else if (idx[d] == nax - 1) {
        gval = (3.0 * f.v[fl] - 4.0 * f.v[shifted(fl, d, -1)] + f.v[shifted(fl, d, -2)]) / (2 * h);
      } else {
        gval = (f.v[shifted(fl, d, 1)] - f.v[shifted(fl, d, -1)]) / (2 * h);
      }
      out.v[fl][d] = gval;
    }
  }
  return out;
}

} // namespace oblab
