#pragma once

#include <vector>

#include <Eigen/Dense>

#include "brte/util.hpp"

namespace brte {

// Small dynamic vectors/matrices capped at dimension 3 (no heap).
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

/// Direct and dual lattice geometry. Columns of `direct` are e_j, columns of
/// `dual` are e^k with e_j . e^k = 2 pi delta_jk.
struct LatticeSpec {
  int dim = 0;
  RMat direct;
  RMat dual;
  double cell_volume = 0.0;
  double bz_volume = 0.0;

  RVec direct_vector(const IVec& n) const;
  RVec dual_vector(const IVec& m) const;
  /// Coefficients c with k = sum_j c_j e^j.
  RVec dual_coefficients(const RVec& k) const;
};

LatticeSpec build_lattice(int dim, const std::vector<RVec>& direct_basis);

struct FoldResult {
  RVec q;        // inside the half-open centered BZ cell
  IVec mu;       // integer dual coordinates with k = q + mu
  RVec mu_vec;   // mu in Cartesian form
};

/// Unique decomposition k = q + mu, q in the centered half-open cell
/// (dual-basis coefficients in [-1/2, 1/2)).
FoldResult fold_k(const RVec& k, const LatticeSpec& lat);

/// Quadrature grid over the Brillouin zone. Weights sum to bz_volume.
struct BZGrid {
  LatticeSpec lattice;
  std::array<int, 3> n_axis{1, 1, 1};
  bool structured = false;  // true for uniform() grids; enables neighbor()
  std::vector<RVec> points;
  std::vector<double> weights;

  static BZGrid uniform(const LatticeSpec& lat, int n_per_axis);
  static BZGrid uniform_anisotropic(const LatticeSpec& lat, const std::array<int, 3>& n);
  static BZGrid from_points(const LatticeSpec& lat, std::vector<RVec> pts, std::vector<double> w);

  int size() const { return static_cast<int>(points.size()); }
  /// Periodic neighbor along an axis (structured grids only).
  int neighbor(int idx, int axis, int step) const;
};

BZGrid bz_grid(const LatticeSpec& lat, int n_per_axis);

}  // namespace brte
