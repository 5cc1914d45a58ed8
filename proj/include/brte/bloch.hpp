#pragma once

#include <map>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "brte/lattice.hpp"

namespace brte {

/// Plane-wave expansion basis: dual vectors mu with |mu| <= cutoff_radius,
/// ordered by |mu|^2 then lexicographic integer coordinates.
struct PlaneWaveBasis {
  LatticeSpec lattice;
  double cutoff_radius = 0.0;
  std::vector<IVec> coords;
  std::vector<RVec> vectors;

  static PlaneWaveBasis make(const LatticeSpec& lat, double cutoff_radius);
  /// Explicit coordinate list; `require_symmetric` enforces closure under
  /// negation and presence of mu = 0.
  static PlaneWaveBasis from_coords(const LatticeSpec& lat, std::vector<IVec> coords,
                                    bool require_symmetric = true);
  /// Relabeled copy mu -> mu + shift (used by the q -> q + mu0 gauge checks;
  /// not symmetric under negation in general).
  PlaneWaveBasis translated(const IVec& shift) const;

  int size() const { return static_cast<int>(coords.size()); }
  int find(const IVec& c) const {
    auto it = lookup_.find(c);
    return it == lookup_.end() ? -1 : it->second;
  }
  /// True if nu is representable as a difference mu - mu' of basis vectors.
  bool difference_in_closure(const IVec& nu) const {
    return differences_.count(nu) > 0;
  }

 private:
  std::unordered_map<IVec, int, IVecHash> lookup_;
  std::unordered_set<IVec, IVecHash> differences_;
  void finalize();
};

/// Fourier coefficients of a real periodic potential, keyed by integer dual
/// coordinates. set() maintains U(-mu) = conj(U(mu)).
struct PeriodicPotential {
  void set(const IVec& mu, cplx value);
  cplx coeff(const IVec& mu) const {
    auto it = coeffs_.find(mu);
    return it == coeffs_.end() ? cplx{0.0, 0.0} : it->second;
  }
  const std::map<IVec, cplx>& entries() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

 private:
  std::map<IVec, cplx> coeffs_;
};

/// Vector potential sampled at one macroscopic point: a uniform part plus an
/// optional cell-periodic part with A(-mu) = conj(A(mu)) componentwise.
struct CellVectorPotential {
  RVec uniform;  // size = lattice dimension

  static CellVectorPotential zero(int dim);
  void set_periodic(const IVec& mu, const Eigen::VectorXcd& value);
  const std::map<IVec, Eigen::VectorXcd>& periodic() const { return periodic_; }
  bool has_periodic() const { return !periodic_.empty(); }
  bool is_zero() const;

 private:
  std::map<IVec, Eigen::VectorXcd> periodic_;
};

struct DegenerateGroup {
  int first_band = 0;  // 0-based index of first band in the group
  int size = 1;
};

/// Eigen-decomposition of the cell Hamiltonian at one q.
struct BandSolution {
  RVec q;
  Eigen::VectorXd energies;   // ascending
  Eigen::MatrixXcd coeffs;    // N_pw x n_bands, orthonormal columns, phases fixed
  std::vector<DegenerateGroup> groups;
  double degeneracy_tol = 0.0;
  bool truncated_group = false;  // last solved band is degenerate with the next one

  int n_bands() const { return static_cast<int>(energies.size()); }
  int group_of(int band) const;
  double group_energy(int g) const;
};

/// H(mu,mu') in the plane-wave basis: kinetic diagonal, potential convolution,
/// and the symmetrized cross/quadratic terms of a cell-periodic A.
/// Internal units hbar = m_e = e = 1.
Eigen::MatrixXcd assemble_hamiltonian(const RVec& q, const CellVectorPotential& A,
                                      const PeriodicPotential& U, const PlaneWaveBasis& basis);

/// tol_degeneracy <= 0 selects 1e-8 x spectral width of the solved bands.
BandSolution solve_bands(const Eigen::MatrixXcd& H, const RVec& q, const PlaneWaveBasis& basis,
                         int n_bands, double tol_degeneracy = -1.0);

/// Hellmann-Feynman velocity matrices dH/dq_l projected on one degeneracy
/// group; d matrices of shape r x r.
std::vector<Eigen::MatrixXcd> velocity_matrix(const BandSolution& sol, int group,
                                              const CellVectorPotential& A,
                                              const PlaneWaveBasis& basis);

/// Scalar group velocity. Throws if the group's velocity matrix is not
/// proportional to the identity within tolerance.
RVec group_velocity(const BandSolution& sol, int band, const CellVectorPotential& A,
                    const PlaneWaveBasis& basis, double scalar_tol = 1e-8);

/// Group-mean velocity (trace/r); defined for any group.
RVec group_velocity_mean(const BandSolution& sol, int group, const CellVectorPotential& A,
                         const PlaneWaveBasis& basis);

struct OrthogonalityReport {
  double max_orthonormality_residual = 0.0;
  /// RMS completeness residual of the band projector against the full
  /// plane-wave reproducing kernel, for n = 1..n_bands solved bands.
  std::vector<double> completeness_residual;
};

OrthogonalityReport bloch_orthogonality_check(const BandSolution& sol, const PlaneWaveBasis& basis,
                                              int oversample = 4);

/// Band solutions over a BZ grid (solved in parallel; immutable afterwards).
struct BandTable {
  BZGrid grid;
  PlaneWaveBasis basis;
  int n_bands = 0;
  std::vector<BandSolution> at;

  static BandTable solve(const BZGrid& grid, const PlaneWaveBasis& basis,
                         const PeriodicPotential& U, const CellVectorPotential& A, int n_bands,
                         double tol_degeneracy = -1.0);
  bool uniform_grouping() const;
};

}  // namespace brte
