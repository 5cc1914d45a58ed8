#pragma once

#include <atomic>
#include <memory>
#include <vector>

#include "brte/bloch.hpp"

namespace brte {

/// T_{jm}^{ab}(q, q' - mu') reduced to plane-wave coefficients. Rows index the
/// states at q (conjugated side), columns the states at q'. Coefficients whose
/// shifted index leaves the basis are dropped and counted.
Eigen::MatrixXcd compute_T(const BandSolution& at_q, const BandSolution& at_qp,
                           const IVec& mu_offset, const PlaneWaveBasis& basis,
                           long* truncation_counter = nullptr);

/// Overlap blocks for every ordered grid pair and dual offset in the window.
/// Flat storage: block(i, k, l) = T(q_i, q_k - window[l]).
struct CouplingTensor {
  int n_states = 0;
  std::vector<IVec> window;
  long truncation_events = 0;

  static CouplingTensor build(const BandTable& bands, const std::vector<IVec>& window);

  Eigen::Map<const Eigen::MatrixXcd> block(int i, int k, int l) const {
    return {data.data() + offset(i, k, l), n_states, n_states};
  }
  int n_grid = 0;
  std::vector<cplx> data;

 private:
  size_t offset(int i, int k, int l) const {
    return ((static_cast<size_t>(i) * n_grid + k) * window.size() + l) *
           static_cast<size_t>(n_states) * n_states;
  }
};

/// Symmetric dual-vector window |mu'| <= radius.
std::vector<IVec> dual_window(const LatticeSpec& lat, double radius);

/// Cell-periodic kernel function of the cell-scale Liouvillian, in plane-wave
/// coefficients over harmonics nu = mu - G'.
struct QFunction {
  IVec mu;
  std::vector<IVec> harmonics;
  Eigen::VectorXcd coeffs;  // aligned with harmonics
};

QFunction compute_Q(const BandSolution& sol, int band_m, int band_n, const IVec& mu,
                    const PlaneWaveBasis& basis);

/// f(z, q + mu) = sum_nu fhat(nu, mu) e^{i nu . z}, on explicit index lists.
struct TwoScaleField {
  std::vector<IVec> nu_list;
  std::vector<IVec> mu_list;
  Eigen::MatrixXcd values;  // nu x mu

  int find_nu(const IVec& c) const;
  int find_mu(const IVec& c) const;
};

/// Spectral application of the cell-scale Liouvillian (advection + kinetic +
/// potential hopping) at fixed q. Entries read outside the lists are zero.
TwoScaleField apply_L(const TwoScaleField& f, const RVec& q, const RVec& a0,
                      const PeriodicPotential& U, const LatticeSpec& lat);

/// M_j from the cell inner products of v_j . A; anti-Hermitian part returned,
/// symmetrization residual reported through *residual if non-null.
Eigen::MatrixXcd compute_lorentz_matrix(const BandSolution& sol, int group, const RVec& v,
                                        const CellVectorPotential& A, const PlaneWaveBasis& basis,
                                        double* residual = nullptr);

}  // namespace brte
