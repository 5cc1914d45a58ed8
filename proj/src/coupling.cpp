#include "brte/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace brte {

namespace {

double t_normalization(int dim) { return std::pow(two_pi, -0.5 * (dim - 1)); }

}  // namespace

Eigen::MatrixXcd compute_T(const BandSolution& at_q, const BandSolution& at_qp,
                           const IVec& mu_offset, const PlaneWaveBasis& basis,
                           long* truncation_counter) {
  const int npw = basis.size();
  const int nb_row = at_q.n_bands();
  const double norm = t_normalization(basis.lattice.dim);

  // T_{jm} = norm * sum_G  c^{(m, q')}_G  conj(c^{(j, q)}_{G + mu'})
  Eigen::MatrixXcd row_shifted = Eigen::MatrixXcd::Zero(npw, nb_row);
  long missing = 0;
  for (int g = 0; g < npw; ++g) {
    const int gs = basis.find(basis.coords[static_cast<size_t>(g)] + mu_offset);
    if (gs < 0) {
      ++missing;
      continue;
    }
    row_shifted.row(g) = at_q.coeffs.row(gs);
  }
  if (truncation_counter && missing > 0) *truncation_counter += missing;
  return norm * row_shifted.adjoint() * at_qp.coeffs;
}

std::vector<IVec> dual_window(const LatticeSpec& lat, double radius) {
  return PlaneWaveBasis::make(lat, radius).coords;
}

CouplingTensor CouplingTensor::build(const BandTable& bands, const std::vector<IVec>& window) {
  CouplingTensor t;
  t.n_states = bands.n_bands;
  t.window = window;
  t.n_grid = bands.grid.size();
  const size_t block_sz = static_cast<size_t>(t.n_states) * t.n_states;
  t.data.assign(static_cast<size_t>(t.n_grid) * t.n_grid * window.size() * block_sz, cplx{0, 0});

  std::atomic<long> truncations{0};
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int i = 0; i < t.n_grid; ++i)
    for (int k = 0; k < t.n_grid; ++k) {
      long local = 0;
      for (int l = 0; l < static_cast<int>(window.size()); ++l) {
        const auto blk = compute_T(bands.at[static_cast<size_t>(i)], bands.at[static_cast<size_t>(k)],
                                   window[static_cast<size_t>(l)], bands.basis, &local);
        Eigen::Map<Eigen::MatrixXcd>(t.data.data() + t.offset(i, k, l), t.n_states, t.n_states) = blk;
      }
      if (local > 0) truncations += local;
    }
  t.truncation_events = truncations.load();
  return t;
}

QFunction compute_Q(const BandSolution& sol, int band_m, int band_n, const IVec& mu,
                    const PlaneWaveBasis& basis) {
  QFunction q;
  q.mu = mu;
  const int npw = basis.size();
  q.harmonics.reserve(static_cast<size_t>(npw));
  q.coeffs = Eigen::VectorXcd::Zero(npw);
  const int mu_idx = basis.find(mu);
  // Q(z, mu) = c^{(m)}_mu sum_{G'} conj(c^{(n)}_{G'}) e^{i (mu - G') . z}
  for (int g = 0; g < npw; ++g) {
    q.harmonics.push_back(mu - basis.coords[static_cast<size_t>(g)]);
    if (mu_idx >= 0)
      q.coeffs[g] = sol.coeffs(mu_idx, band_m) * std::conj(sol.coeffs(g, band_n));
  }
  return q;
}

int TwoScaleField::find_nu(const IVec& c) const {
  auto it = std::find(nu_list.begin(), nu_list.end(), c);
  return it == nu_list.end() ? -1 : static_cast<int>(it - nu_list.begin());
}

int TwoScaleField::find_mu(const IVec& c) const {
  auto it = std::find(mu_list.begin(), mu_list.end(), c);
  return it == mu_list.end() ? -1 : static_cast<int>(it - mu_list.begin());
}

TwoScaleField apply_L(const TwoScaleField& f, const RVec& q, const RVec& a0,
                      const PeriodicPotential& U, const LatticeSpec& lat) {
  TwoScaleField out;
  out.nu_list = f.nu_list;
  out.mu_list = f.mu_list;
  out.values = Eigen::MatrixXcd::Zero(f.values.rows(), f.values.cols());

  std::unordered_map<IVec, int, IVecHash> nu_index, mu_index;
  for (int i = 0; i < static_cast<int>(f.nu_list.size()); ++i) nu_index[f.nu_list[static_cast<size_t>(i)]] = i;
  for (int i = 0; i < static_cast<int>(f.mu_list.size()); ++i) mu_index[f.mu_list[static_cast<size_t>(i)]] = i;

  for (int im = 0; im < static_cast<int>(f.mu_list.size()); ++im) {
    const RVec kvec = q + lat.dual_vector(f.mu_list[static_cast<size_t>(im)]) + a0;
    for (int in = 0; in < static_cast<int>(f.nu_list.size()); ++in) {
      const RVec nu = lat.dual_vector(f.nu_list[static_cast<size_t>(in)]);
      // advection + kinetic: i [ (k + A0) . nu - |nu|^2 / 2 ] f
      cplx acc = iu * (kvec.dot(nu) - 0.5 * nu.squaredNorm()) * f.values(in, im);
      // potential hopping: +i sum_{mu''} U(mu'') [ f(nu-mu'', mu-mu'') - f(nu-mu'', mu) ]
      for (const auto& [mupp, uval] : U.entries()) {
        const auto nit = nu_index.find(f.nu_list[static_cast<size_t>(in)] - mupp);
        if (nit == nu_index.end()) continue;
        cplx hop{0, 0};
        const auto mit = mu_index.find(f.mu_list[static_cast<size_t>(im)] - mupp);
        if (mit != mu_index.end()) hop += f.values(nit->second, mit->second);
        hop -= f.values(nit->second, im);
        acc += iu * uval * hop;
      }
      out.values(in, im) = acc;
    }
  }
  return out;
}

Eigen::MatrixXcd compute_lorentz_matrix(const BandSolution& sol, int group, const RVec& v,
                                        const CellVectorPotential& A, const PlaneWaveBasis& basis,
                                        double* residual) {
  const int dim = basis.lattice.dim;
  const auto& gr = sol.groups.at(static_cast<size_t>(group));
  const auto cg = sol.coeffs.middleCols(gr.first_band, gr.size);
  const int npw = basis.size();

  RVec a0 = A.uniform.size() == dim ? RVec(A.uniform) : RVec(RVec::Zero(dim));

  // X_{ab} = (v . A  Phi_b, Phi_a) in plane-wave coefficients
  Eigen::MatrixXcd va = Eigen::MatrixXcd::Zero(npw, npw);
  for (int g = 0; g < npw; ++g) va(g, g) = v.dot(a0);
  for (int col = 0; col < npw; ++col)
    for (int row = 0; row < npw; ++row) {
      auto it = A.periodic().find(basis.coords[static_cast<size_t>(row)] -
                                  basis.coords[static_cast<size_t>(col)]);
      if (it == A.periodic().end()) continue;
      cplx x{0, 0};
      for (int l = 0; l < dim; ++l) x += v[l] * it->second[l];
      va(row, col) += x;
    }

  Eigen::MatrixXcd m = iu * (cg.adjoint() * va * cg);
  const Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  if (residual) *residual = sym.cwiseAbs().maxCoeff();
  return m - sym;  // exact anti-Hermitian part
}

}  // namespace brte
