#include "brte/bloch.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace brte {

void PlaneWaveBasis::finalize() {
  lookup_.clear();
  lookup_.reserve(coords.size() * 2);
  for (int i = 0; i < size(); ++i) lookup_[coords[static_cast<size_t>(i)]] = i;
  differences_.clear();
  differences_.reserve(coords.size() * coords.size());
  for (const IVec& a : coords)
    for (const IVec& b : coords) differences_.insert(a - b);
  vectors.clear();
  vectors.reserve(coords.size());
  for (const IVec& c : coords) vectors.push_back(lattice.dual_vector(c));
}

PlaneWaveBasis PlaneWaveBasis::make(const LatticeSpec& lat, double cutoff_radius) {
  if (cutoff_radius < 0) throw Error("PlaneWaveBasis: cutoff must be nonnegative");
  std::array<int, 3> bound{0, 0, 0};
  for (int j = 0; j < lat.dim; ++j) {
    const double len = lat.direct.col(j).norm();
    bound[static_cast<size_t>(j)] = static_cast<int>(std::floor(len * cutoff_radius / two_pi)) + 1;
  }
  std::vector<IVec> coords;
  IVec m;
  for (m[0] = -bound[0]; m[0] <= bound[0]; ++m[0])
    for (m[1] = -bound[1]; m[1] <= bound[1]; ++m[1])
      for (m[2] = -bound[2]; m[2] <= bound[2]; ++m[2]) {
        bool in_dim = true;
        for (int j = lat.dim; j < 3; ++j)
          if (m[j] != 0) in_dim = false;
        if (!in_dim) continue;
        if (lat.dual_vector(m).norm() <= cutoff_radius * (1.0 + 1e-12) + 1e-12)
          coords.push_back(m);
      }

  PlaneWaveBasis b;
  b.lattice = lat;
  b.cutoff_radius = cutoff_radius;
  b.coords = std::move(coords);
  std::sort(b.coords.begin(), b.coords.end(), [&lat](const IVec& a, const IVec& c) {
    const double na = lat.dual_vector(a).squaredNorm();
    const double nc = lat.dual_vector(c).squaredNorm();
    if (na != nc) return na < nc;
    return a < c;
  });
  b.finalize();
  return b;
}

PlaneWaveBasis PlaneWaveBasis::from_coords(const LatticeSpec& lat, std::vector<IVec> coords,
                                           bool require_symmetric) {
  PlaneWaveBasis b;
  b.lattice = lat;
  b.cutoff_radius = 0.0;
  b.coords = std::move(coords);
  std::sort(b.coords.begin(), b.coords.end(), [&lat](const IVec& a, const IVec& c) {
    const double na = lat.dual_vector(a).squaredNorm();
    const double nc = lat.dual_vector(c).squaredNorm();
    if (na != nc) return na < nc;
    return a < c;
  });
  b.coords.erase(std::unique(b.coords.begin(), b.coords.end()), b.coords.end());
  b.finalize();
  if (require_symmetric) {
    if (b.find(IVec{}) < 0) throw Error("PlaneWaveBasis: mu = 0 missing");
    for (const IVec& c : b.coords)
      if (b.find(-c) < 0) throw Error("PlaneWaveBasis: not closed under negation");
  }
  return b;
}

PlaneWaveBasis PlaneWaveBasis::translated(const IVec& shift) const {
  std::vector<IVec> shifted;
  shifted.reserve(coords.size());
  for (const IVec& c : coords) shifted.push_back(c + shift);
  return from_coords(lattice, std::move(shifted), /*require_symmetric=*/false);
}

void PeriodicPotential::set(const IVec& mu, cplx value) {
  if (mu.is_zero()) {
    if (value.imag() != 0.0)
      throw Error("PeriodicPotential: coefficient at mu = 0 must be real");
    coeffs_[mu] = value;
    return;
  }
  coeffs_[mu] = value;
  coeffs_[-mu] = std::conj(value);
}

CellVectorPotential CellVectorPotential::zero(int dim) {
  CellVectorPotential a;
  a.uniform = RVec::Zero(dim);
  return a;
}

void CellVectorPotential::set_periodic(const IVec& mu, const Eigen::VectorXcd& value) {
  if (mu.is_zero())
    throw Error("CellVectorPotential: the mu = 0 component belongs to the uniform part");
  periodic_[mu] = value;
  periodic_[-mu] = value.conjugate();
}

bool CellVectorPotential::is_zero() const {
  return periodic_.empty() && (uniform.size() == 0 || uniform.norm() == 0.0);
}

int BandSolution::group_of(int band) const {
  for (int g = 0; g < static_cast<int>(groups.size()); ++g) {
    const auto& gr = groups[static_cast<size_t>(g)];
    if (band >= gr.first_band && band < gr.first_band + gr.size) return g;
  }
  throw Error("BandSolution: band index out of range");
}

double BandSolution::group_energy(int g) const {
  const auto& gr = groups.at(static_cast<size_t>(g));
  double e = 0;
  for (int b = gr.first_band; b < gr.first_band + gr.size; ++b) e += energies[b];
  return e / gr.size;
}

Eigen::MatrixXcd assemble_hamiltonian(const RVec& q, const CellVectorPotential& A,
                                      const PeriodicPotential& U, const PlaneWaveBasis& basis) {
  const int n = basis.size();
  const int dim = basis.lattice.dim;

  for (const auto& [mu, val] : U.entries())
    if (!basis.difference_in_closure(mu))
      throw Error("assemble_hamiltonian: potential coefficient outside basis closure");
  for (const auto& [mu, val] : A.periodic())
    if (!basis.difference_in_closure(mu))
      throw Error("assemble_hamiltonian: vector-potential coefficient outside basis closure");

  RVec a0 = A.uniform.size() == dim ? RVec(A.uniform) : RVec(RVec::Zero(dim));
  const RVec qa = q + a0;  // summed once so E(q; A0) == E(q + A0; 0) bit-exactly

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    const RVec kc = basis.vectors[static_cast<size_t>(col)] + qa;
    for (int row = 0; row <= col; ++row) {
      const IVec nu = basis.coords[static_cast<size_t>(row)] - basis.coords[static_cast<size_t>(col)];
      cplx val = U.coeff(nu);
      if (row == col) val += 0.5 * kc.squaredNorm();
      if (A.has_periodic()) {
        const RVec kr = basis.vectors[static_cast<size_t>(row)] + qa;
        auto it = A.periodic().find(nu);
        if (it != A.periodic().end()) {
          // symmetrized cross term (p.A + A.p) / 2m
          for (int l = 0; l < dim; ++l) val += 0.5 * (kr[l] + kc[l]) * it->second[l];
        }
        // quadratic convolution (A*A)(nu) / 2m
        for (const auto& [nup, ap] : A.periodic()) {
          auto jt = A.periodic().find(nu - nup);
          if (jt != A.periodic().end()) val += 0.5 * ap.cwiseProduct(jt->second).sum();
        }
      }
      h(row, col) = val;
      if (row != col) h(col, row) = std::conj(val);
    }
  }
  return h;
}

BandSolution solve_bands(const Eigen::MatrixXcd& H, const RVec& q, const PlaneWaveBasis& basis,
                         int n_bands, double tol_degeneracy) {
  const int n = static_cast<int>(H.rows());
  if (n != basis.size()) throw Error("solve_bands: matrix size does not match basis");
  if (n_bands < 1 || n_bands > n) throw Error("solve_bands: n_bands must be in [1, N_pw]");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success)
    throw Error("solve_bands: eigensolver failed (||H|| = " + format_double(H.norm()) +
                ", max |H| = " + format_double(H.cwiseAbs().maxCoeff()) + ")");

  BandSolution sol;
  sol.q = q;
  sol.energies = es.eigenvalues().head(n_bands);
  sol.coeffs = es.eigenvectors().leftCols(n_bands);

  const double width = es.eigenvalues()[n - 1] - es.eigenvalues()[0];
  sol.degeneracy_tol = tol_degeneracy > 0 ? tol_degeneracy : 1e-8 * width;

  // largest-magnitude coefficient made real positive (lowest index on ties)
  for (int b = 0; b < n_bands; ++b) {
    int best = 0;
    double mag = std::abs(sol.coeffs(0, b));
    for (int g = 1; g < n; ++g) {
      const double m = std::abs(sol.coeffs(g, b));
      if (m > mag) {
        mag = m;
        best = g;
      }
    }
    sol.coeffs.col(b) *= std::conj(sol.coeffs(best, b)) / mag;
  }

  DegenerateGroup cur{0, 1};
  for (int b = 1; b < n_bands; ++b) {
    if (sol.energies[b] - sol.energies[b - 1] > sol.degeneracy_tol) {
      sol.groups.push_back(cur);
      cur = DegenerateGroup{b, 1};
    } else {
      cur.size += 1;
    }
  }
  sol.groups.push_back(cur);
  if (n_bands < n && es.eigenvalues()[n_bands] - es.eigenvalues()[n_bands - 1] <= sol.degeneracy_tol)
    sol.truncated_group = true;
  return sol;
}

std::vector<Eigen::MatrixXcd> velocity_matrix(const BandSolution& sol, int group,
                                              const CellVectorPotential& A,
                                              const PlaneWaveBasis& basis) {
  const int dim = basis.lattice.dim;
  const auto& gr = sol.groups.at(static_cast<size_t>(group));
  const auto cg = sol.coeffs.middleCols(gr.first_band, gr.size);
  const int n = basis.size();
  RVec a0 = A.uniform.size() == dim ? RVec(A.uniform) : RVec(RVec::Zero(dim));

  std::vector<Eigen::MatrixXcd> v;
  v.reserve(static_cast<size_t>(dim));
  for (int l = 0; l < dim; ++l) {
    Eigen::MatrixXcd dh = Eigen::MatrixXcd::Zero(n, n);
    for (int g = 0; g < n; ++g) dh(g, g) = sol.q[l] + basis.vectors[static_cast<size_t>(g)][l] + a0[l];
    if (A.has_periodic()) {
      for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row) {
          auto it = A.periodic().find(basis.coords[static_cast<size_t>(row)] -
                                      basis.coords[static_cast<size_t>(col)]);
          if (it != A.periodic().end()) dh(row, col) += it->second[l];
        }
    }
    v.push_back(cg.adjoint() * dh * cg);
  }
  return v;
}

RVec group_velocity(const BandSolution& sol, int band, const CellVectorPotential& A,
                    const PlaneWaveBasis& basis, double scalar_tol) {
  const int group = sol.group_of(band);
  const auto vm = velocity_matrix(sol, group, A, basis);
  const int r = sol.groups[static_cast<size_t>(group)].size;
  RVec v = RVec::Zero(basis.lattice.dim);
  for (int l = 0; l < basis.lattice.dim; ++l) {
    const cplx mean = vm[static_cast<size_t>(l)].trace() / static_cast<double>(r);
    const double dev =
        (vm[static_cast<size_t>(l)] - mean * Eigen::MatrixXcd::Identity(r, r)).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, std::abs(mean));
    if (r > 1 && dev > scalar_tol * scale)
      throw Error("group_velocity: velocity matrix of degenerate group " + std::to_string(group) +
                  " is not scalar (deviation " + format_double(dev) + ")");
    v[l] = mean.real();
  }
  return v;
}

RVec group_velocity_mean(const BandSolution& sol, int group, const CellVectorPotential& A,
                         const PlaneWaveBasis& basis) {
  const auto vm = velocity_matrix(sol, group, A, basis);
  const int r = sol.groups.at(static_cast<size_t>(group)).size;
  RVec v = RVec::Zero(basis.lattice.dim);
  for (int l = 0; l < basis.lattice.dim; ++l)
    v[l] = (vm[static_cast<size_t>(l)].trace() / static_cast<double>(r)).real();
  return v;
}

OrthogonalityReport bloch_orthogonality_check(const BandSolution& sol, const PlaneWaveBasis& basis,
                                              int oversample) {
  const int dim = basis.lattice.dim;
  const int nb = sol.n_bands();
  const int npw = basis.size();

  std::array<int, 3> maxidx{0, 0, 0};
  for (const IVec& c : basis.coords)
    for (int j = 0; j < dim; ++j)
      maxidx[static_cast<size_t>(j)] = std::max(maxidx[static_cast<size_t>(j)], std::abs(c[j]));
  std::array<int, 3> nz{1, 1, 1};
  int total = 1;
  for (int j = 0; j < dim; ++j) {
    nz[static_cast<size_t>(j)] = oversample * (2 * maxidx[static_cast<size_t>(j)] + 1);
    total *= nz[static_cast<size_t>(j)];
  }

  // plane waves sampled on fractional coordinates: mu . z = 2 pi sum_a m_a t_a
  Eigen::MatrixXcd pw(total, npw);
  for (int flat = 0; flat < total; ++flat) {
    std::array<int, 3> zi{0, 0, 0};
    int rem = flat;
    for (int j = 0; j < dim; ++j) {
      zi[static_cast<size_t>(j)] = rem % nz[static_cast<size_t>(j)];
      rem /= nz[static_cast<size_t>(j)];
    }
    for (int g = 0; g < npw; ++g) {
      double phase = 0;
      for (int j = 0; j < dim; ++j)
        phase += two_pi * basis.coords[static_cast<size_t>(g)][j] * zi[static_cast<size_t>(j)] /
                 nz[static_cast<size_t>(j)];
      pw(flat, g) = std::polar(1.0, phase);
    }
  }

  const Eigen::MatrixXcd phi = pw * sol.coeffs;  // z-samples x bands
  const Eigen::MatrixXcd gram = phi.adjoint() * phi / static_cast<double>(total);

  OrthogonalityReport rep;
  rep.max_orthonormality_residual =
      (gram - Eigen::MatrixXcd::Identity(nb, nb)).cwiseAbs().maxCoeff();

  const Eigen::MatrixXcd kernel_full = pw * pw.adjoint();
  const double full_norm = kernel_full.norm();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(total, total);
  rep.completeness_residual.reserve(static_cast<size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    acc.noalias() += phi.col(b) * phi.col(b).adjoint();
    rep.completeness_residual.push_back((acc - kernel_full).norm() / full_norm);
  }
  return rep;
}

BandTable BandTable::solve(const BZGrid& grid, const PlaneWaveBasis& basis,
                           const PeriodicPotential& U, const CellVectorPotential& A, int n_bands,
                           double tol_degeneracy) {
  BandTable table;
  table.grid = grid;
  table.basis = basis;
  table.n_bands = n_bands;
  table.at.resize(static_cast<size_t>(grid.size()));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < grid.size(); ++i) {
    const auto h = assemble_hamiltonian(grid.points[static_cast<size_t>(i)], A, U, basis);
    table.at[static_cast<size_t>(i)] =
        solve_bands(h, grid.points[static_cast<size_t>(i)], basis, n_bands, tol_degeneracy);
  }
  return table;
}

bool BandTable::uniform_grouping() const {
  if (at.empty()) return true;
  const auto& ref = at.front().groups;
  for (const auto& sol : at) {
    if (sol.groups.size() != ref.size()) return false;
    for (size_t g = 0; g < ref.size(); ++g)
      if (sol.groups[g].first_band != ref[g].first_band || sol.groups[g].size != ref[g].size)
        return false;
  }
  return true;
}

}  // namespace brte
