#include "brte/reference.hpp"

#include <cmath>

namespace brte::reference {

Eigen::MatrixXcd coupling_block_quadrature(const BandSolution& at_q, const BandSolution& at_qp,
                                           const IVec& mu_offset, const PlaneWaveBasis& basis,
                                           int oversample) {
  const LatticeSpec& lat = basis.lattice;
  const int dim = lat.dim;
  const int npw = basis.size();

  std::array<int, 3> maxidx{0, 0, 0};
  for (const IVec& c : basis.coords)
    for (int j = 0; j < dim; ++j)
      maxidx[static_cast<size_t>(j)] = std::max(maxidx[static_cast<size_t>(j)],
                                                std::abs(c[j]) + std::abs(mu_offset[j]));
  std::array<int, 3> nz{1, 1, 1};
  int total = 1;
  for (int j = 0; j < dim; ++j) {
    nz[static_cast<size_t>(j)] = oversample * (2 * maxidx[static_cast<size_t>(j)] + 1);
    total *= nz[static_cast<size_t>(j)];
  }

  const RVec q = at_qp.q;   // second argument, extended periodically
  const RVec qp = at_q.q;   // first argument (conjugated side)
  const RVec shift = lat.dual_vector(mu_offset);

  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(at_q.n_bands(), at_qp.n_bands());
  for (int flat = 0; flat < total; ++flat) {
    std::array<int, 3> zi{0, 0, 0};
    int rem = flat;
    for (int j = 0; j < dim; ++j) {
      zi[static_cast<size_t>(j)] = rem % nz[static_cast<size_t>(j)];
      rem /= nz[static_cast<size_t>(j)];
    }
    RVec y = RVec::Zero(dim);
    for (int j = 0; j < dim; ++j)
      y += (static_cast<double>(zi[static_cast<size_t>(j)]) / nz[static_cast<size_t>(j)]) *
           lat.direct.col(j);

    Eigen::VectorXcd phi_col(at_qp.n_bands()), phi_row(at_q.n_bands());
    for (int b = 0; b < at_qp.n_bands(); ++b) {
      cplx acc{0, 0};
      for (int g = 0; g < npw; ++g)
        acc += at_qp.coeffs(g, b) *
               std::polar(1.0, (q + basis.vectors[static_cast<size_t>(g)]).dot(y));
      phi_col[b] = acc;
    }
    for (int b = 0; b < at_q.n_bands(); ++b) {
      cplx acc{0, 0};
      for (int g = 0; g < npw; ++g)
        acc += at_q.coeffs(g, b) *
               std::polar(1.0, (qp + basis.vectors[static_cast<size_t>(g)]).dot(y));
      phi_row[b] = acc;
    }
    // e^{i (q' - (q - mu')) . y} Phi_col(y, q) conj(Phi_row(y, q'))
    const cplx phase = std::polar(1.0, (qp - q + shift).dot(y));
    for (int jr = 0; jr < at_q.n_bands(); ++jr)
      for (int mc = 0; mc < at_qp.n_bands(); ++mc)
        t(jr, mc) += phase * phi_col[mc] * std::conj(phi_row[jr]);
  }
  return t * std::pow(two_pi, -0.5 * (dim - 1)) / static_cast<double>(total);
}

namespace {

RVec spectrum_argument(const BZGrid& grid, int i, int k, const RVec& muv,
                       SpectrumArgConvention convention) {
  if (convention == SpectrumArgConvention::paper_literal)
    return -(grid.points[static_cast<size_t>(k)] + muv);
  return grid.points[static_cast<size_t>(i)] - grid.points[static_cast<size_t>(k)] - muv;
}

}  // namespace

Eigen::MatrixXcd gamma_golden_rule(const BandTable& bands, int grid_i, int group,
                                   const CorrelationModel& model, double eta,
                                   SpectrumArgConvention convention,
                                   const std::vector<IVec>& window) {
  const auto& sol_i = bands.at[static_cast<size_t>(grid_i)];
  const auto& grp_j = sol_i.groups.at(static_cast<size_t>(group));
  Eigen::MatrixXcd gamma = Eigen::MatrixXcd::Zero(grp_j.size, grp_j.size);

  for (int k = 0; k < bands.grid.size(); ++k) {
    const auto& sol_k = bands.at[static_cast<size_t>(k)];
    const double wk = bands.grid.weights[static_cast<size_t>(k)];
    for (const IVec& mu : window) {
      const double r = model.spectrum(
          spectrum_argument(bands.grid, grid_i, k, bands.grid.lattice.dual_vector(mu), convention));
      if (r == 0.0) continue;
      const auto t_full = coupling_block_quadrature(sol_i, sol_k, mu, bands.basis);
      for (int gm = 0; gm < static_cast<int>(sol_k.groups.size()); ++gm) {
        const auto& grp_m = sol_k.groups[static_cast<size_t>(gm)];
        const double de = sol_i.group_energy(group) - sol_k.group_energy(gm);
        const double delta = delta_broadened(de, eta);
        const auto t = t_full.block(grp_j.first_band, grp_m.first_band, grp_j.size, grp_m.size);
        gamma += (wk * delta * r) * (t * t.adjoint());
      }
    }
  }
  return gamma;
}

FieldSlice apply_gain_direct(const BandTable& bands, const FieldSlice& u,
                             const CorrelationModel& model, double eta,
                             SpectrumArgConvention convention, const std::vector<IVec>& window) {
  FieldSlice out = FieldSlice::zeros(bands);
  for (int i = 0; i < bands.grid.size(); ++i) {
    const auto& sol_i = bands.at[static_cast<size_t>(i)];
    for (int k = 0; k < bands.grid.size(); ++k) {
      const auto& sol_k = bands.at[static_cast<size_t>(k)];
      const double wk = bands.grid.weights[static_cast<size_t>(k)];
      for (const IVec& mu : window) {
        const double r = model.spectrum(spectrum_argument(
            bands.grid, i, k, bands.grid.lattice.dual_vector(mu), convention));
        if (r == 0.0) continue;
        const auto t_full = coupling_block_quadrature(sol_i, sol_k, mu, bands.basis);
        for (int gj = 0; gj < static_cast<int>(sol_i.groups.size()); ++gj) {
          const auto& grp_j = sol_i.groups[static_cast<size_t>(gj)];
          for (int gm = 0; gm < static_cast<int>(sol_k.groups.size()); ++gm) {
            const auto& grp_m = sol_k.groups[static_cast<size_t>(gm)];
            const double de = sol_i.group_energy(gj) - sol_k.group_energy(gm);
            const double delta = delta_broadened(de, eta);
            const auto t = t_full.block(grp_j.first_band, grp_m.first_band, grp_j.size, grp_m.size);
            out.blocks[static_cast<size_t>(i)][static_cast<size_t>(gj)] +=
                (wk * delta * r) *
                (t * u.blocks[static_cast<size_t>(k)][static_cast<size_t>(gm)] * t.adjoint());
          }
        }
      }
    }
  }
  return out;
}

}  // namespace brte::reference
