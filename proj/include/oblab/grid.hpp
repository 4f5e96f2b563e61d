#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "oblab/params.hpp"

namespace oblab {

// Vertex-centered tensor grid on [-R,R]^n with the plane {x_n = 0} lying
// exactly on a grid layer. Fields store a value at every lattice node;
// the active mask marks nodes inside the closed ball B_R.
class Grid {
public:
  explicit Grid(const ProblemParams& params);

  const ProblemParams& params() const { return p_; }
  int n() const { return p_.n; }
  double h() const { return p_.h; }
  double R() const { return p_.R_dom; }
  int m() const { return m_; }              // nodes per half-axis
  int nodes_per_axis() const { return nax_; }
  std::size_t size() const { return total_; }

  double coord(int i) const { return (i - m_) * p_.h; }
  // nearest lattice index along one axis, no bounds clamp
  int index_of(double x) const { return static_cast<int>(std::lround(x / p_.h)) + m_; }

  std::size_t flat(int i, int j, int k = 0) const {
    return p_.n == 2 ? static_cast<std::size_t>(i) * nax_ + j
                     : (static_cast<std::size_t>(i) * nax_ + j) * nax_ + k;
  }
  void unflat(std::size_t f, int& i, int& j, int& k) const {
    if (p_.n == 2) {
      i = static_cast<int>(f / nax_);
      j = static_cast<int>(f % nax_);
      k = 0;
    } else {
      k = static_cast<int>(f % nax_);
      std::size_t r = f / nax_;
      j = static_cast<int>(r % nax_);
      i = static_cast<int>(r / nax_);
    }
  }
  Point point(std::size_t f) const {
    int i, j, k;
    unflat(f, i, j, k);
    return p_.n == 2 ? make_point(coord(i), coord(j)) : make_point(coord(i), coord(j), coord(k));
  }

  bool active(std::size_t f) const { return active_[f] != 0; }
  std::size_t active_count() const { return active_count_; }
  // last used axis index of the plane layer
  int plane_layer() const { return m_; }
  bool on_plane(std::size_t f) const;
  const std::vector<std::size_t>& plane_nodes() const { return plane_nodes_; }

  bool inside_ball(const Point& q) const {
    return q[0] * q[0] + q[1] * q[1] + q[2] * q[2] <= p_.R_dom * p_.R_dom * (1.0 + 1e-12);
  }
  std::size_t mirror(std::size_t f) const; // reflection x_n -> -x_n

private:
  ProblemParams p_;
  int m_ = 0;
  int nax_ = 0;
  std::size_t total_ = 0;
  std::size_t active_count_ = 0;
  std::vector<std::uint8_t> active_;
  std::vector<std::size_t> plane_nodes_;
};

struct ScalarField {
  const Grid* grid = nullptr;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid& g) : grid(&g), v(g.size(), 0.0) {}

  double& operator[](std::size_t f) { return v[f]; }
  double operator[](std::size_t f) const { return v[f]; }
};

struct VectorField {
  const Grid* grid = nullptr;
  std::vector<std::array<double, 3>> v;

  explicit VectorField(const Grid& g) : grid(&g), v(g.size(), {0.0, 0.0, 0.0}) {}
};

Grid build_grid(const ProblemParams& params);

// Samples f at every lattice node (inside and outside the ball).
ScalarField sample(const Grid& g, const std::function<double(const Point&)>& f);

bool is_symmetric(const ScalarField& f, double tol = 1e-12);
void check_finite(const ScalarField& f);

// Multilinear interpolation from the enclosing cell; p must lie in the
// lattice hull.
double interpolate(const ScalarField& f, const Point& p);

// Second-order central differences, one-sided second-order at the lattice
// boundary.
VectorField gradient(const ScalarField& f);

} // namespace oblab
