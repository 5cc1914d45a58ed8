#include "brte/lattice.hpp"

#include <cmath>

namespace brte {

RVec LatticeSpec::direct_vector(const IVec& n) const {
  RVec r = RVec::Zero(dim);
  for (int j = 0; j < dim; ++j) r += n[j] * direct.col(j);
  return r;
}

RVec LatticeSpec::dual_vector(const IVec& m) const {
  RVec r = RVec::Zero(dim);
  for (int j = 0; j < dim; ++j) r += m[j] * dual.col(j);
  return r;
}

RVec LatticeSpec::dual_coefficients(const RVec& k) const {
  // k = sum_j c_j e^j  =>  direct^T k = 2 pi c
  return direct.transpose() * k / two_pi;
}

LatticeSpec build_lattice(int dim, const std::vector<RVec>& direct_basis) {
  if (dim < 1 || dim > 3) throw Error("build_lattice: dimension must be 1, 2 or 3");
  if (static_cast<int>(direct_basis.size()) != dim)
    throw Error("build_lattice: need exactly dim basis vectors");

  LatticeSpec lat;
  lat.dim = dim;
  lat.direct.resize(dim, dim);
  for (int j = 0; j < dim; ++j) {
    if (direct_basis[j].size() != dim)
      throw Error("build_lattice: basis vector has wrong length");
    lat.direct.col(j) = direct_basis[j];
  }

  const double det = lat.direct.determinant();
  const double scale = lat.direct.cwiseAbs().maxCoeff();
  if (std::abs(det) <= 1e-12 * std::max(1.0, std::pow(scale, dim)))
    throw Error("build_lattice: direct basis is singular (det = " + format_double(det) + ")");

  // e_j . e^k = 2 pi delta_jk  =>  dual = 2 pi (direct^T)^{-1}
  lat.dual = two_pi * lat.direct.transpose().inverse();
  lat.cell_volume = std::abs(det);
  lat.bz_volume = std::abs(lat.dual.determinant());
  return lat;
}

FoldResult fold_k(const RVec& k, const LatticeSpec& lat) {
  // Small bias keeps exact boundary hits (coefficient -1/2) stable.
  constexpr double boundary_eps = 1e-12;
  const RVec c = lat.dual_coefficients(k);
  FoldResult out;
  for (int j = 0; j < lat.dim; ++j) out.mu[j] = static_cast<int>(std::floor(c[j] + 0.5 + boundary_eps));
  out.mu_vec = lat.dual_vector(out.mu);
  out.q = k - out.mu_vec;
  return out;
}

BZGrid BZGrid::uniform(const LatticeSpec& lat, int n_per_axis) {
  std::array<int, 3> n{1, 1, 1};
  for (int j = 0; j < lat.dim; ++j) n[static_cast<size_t>(j)] = n_per_axis;
  return uniform_anisotropic(lat, n);
}

BZGrid BZGrid::uniform_anisotropic(const LatticeSpec& lat, const std::array<int, 3>& n) {
  for (int j = 0; j < lat.dim; ++j)
    if (n[static_cast<size_t>(j)] < 1) throw Error("bz_grid: need at least one point per axis");

  BZGrid g;
  g.lattice = lat;
  g.n_axis = n;
  g.structured = true;
  int total = 1;
  for (int j = 0; j < lat.dim; ++j) total *= n[static_cast<size_t>(j)];
  g.points.reserve(static_cast<size_t>(total));

  std::array<int, 3> idx{0, 0, 0};
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    for (int j = 0; j < lat.dim; ++j) {
      idx[static_cast<size_t>(j)] = rem % n[static_cast<size_t>(j)];
      rem /= n[static_cast<size_t>(j)];
    }
    RVec k = RVec::Zero(lat.dim);
    for (int j = 0; j < lat.dim; ++j)
      k += (static_cast<double>(idx[static_cast<size_t>(j)]) / n[static_cast<size_t>(j)]) * lat.dual.col(j);
    g.points.push_back(fold_k(k, lat).q);
  }
  g.weights.assign(static_cast<size_t>(total), lat.bz_volume / total);
  return g;
}

BZGrid BZGrid::from_points(const LatticeSpec& lat, std::vector<RVec> pts, std::vector<double> w) {
  if (pts.size() != w.size()) throw Error("BZGrid: points/weights size mismatch");
  for (double x : w)
    if (x <= 0) throw Error("BZGrid: weights must be positive");
  BZGrid g;
  g.lattice = lat;
  g.structured = false;
  g.points = std::move(pts);
  g.weights = std::move(w);
  return g;
}

int BZGrid::neighbor(int idx, int axis, int step) const {
  if (!structured) throw Error("BZGrid::neighbor: grid is not structured");
  std::array<int, 3> multi{0, 0, 0};
  int rem = idx;
  for (int j = 0; j < lattice.dim; ++j) {
    multi[static_cast<size_t>(j)] = rem % n_axis[static_cast<size_t>(j)];
    rem /= n_axis[static_cast<size_t>(j)];
  }
  const int n = n_axis[static_cast<size_t>(axis)];
  multi[static_cast<size_t>(axis)] = ((multi[static_cast<size_t>(axis)] + step) % n + n) % n;
  int flat = 0;
  for (int j = lattice.dim - 1; j >= 0; --j)
    flat = flat * n_axis[static_cast<size_t>(j)] + multi[static_cast<size_t>(j)];
  return flat;
}

BZGrid bz_grid(const LatticeSpec& lat, int n_per_axis) { return BZGrid::uniform(lat, n_per_axis); }

}  // namespace brte
