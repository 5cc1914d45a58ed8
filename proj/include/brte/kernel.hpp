#pragma once

#include <memory>
#include <vector>

#include "brte/coupling.hpp"
#include "brte/disorder.hpp"
#include "brte/field.hpp"

namespace brte {

/// Argument of the disorder spectrum inside the collision sums:
/// paper_literal uses -(q' + mu'), momentum_transfer uses q - q' - mu'.
enum class SpectrumArgConvention { paper_literal, momentum_transfer };

SpectrumArgConvention convention_from_string(const std::string& s);
std::string to_string(SpectrumArgConvention c);

struct KernelOptions {
  double eta_E = -1.0;  // <= 0: 4 x median adjacent |dE| on the grid
  double xi = -1.0;     // <= 0: equal to eta_E
  SpectrumArgConvention convention = SpectrumArgConvention::paper_literal;
  bool shift_enabled = true;
  /// Gain entries with delta weight below this fraction of the on-shell peak
  /// are dropped from storage (loss keeps the full sum).
  double delta_rel_threshold = 1e-13;
};

/// Normalized Gaussian of width eta.
double delta_broadened(double de, double eta);
/// Lorentzian-regularized principal value de / (de^2 + xi^2).
double principal_value_regularized(double de, double xi);

struct GainEntry {
  int k = 0;        // source grid point
  int m_group = 0;  // source band group at k
  double factor = 0;  // quadrature weight x delta_eta(dE) / hbar
  double scalar_weight = 0;  // factor x sum_l R(l) |T_l|^2 when both blocks are 1x1
};

/// Discretized collision data: gain rows (sparse in energy), the loss blocks
/// Gamma_j(q) and the level-shift blocks S_j(q).
struct ScatteringKernel {
  std::shared_ptr<const BandTable> bands;
  std::shared_ptr<const CouplingTensor> coupling;
  double eta_E = 0;
  double xi = 0;
  SpectrumArgConvention convention = SpectrumArgConvention::paper_literal;
  bool shift_enabled = true;

  std::vector<double> spectrum_table;                      // R~(arg(i,k,l)), flat over (i,k,l)
  std::vector<std::vector<Eigen::MatrixXcd>> gamma;        // [i][group], Hermitian PSD
  std::vector<std::vector<Eigen::MatrixXcd>> shift;        // [i][group], Hermitian
  std::vector<std::vector<std::vector<GainEntry>>> rows;   // [i][group]

  int empty_shell_warnings = 0;

  double spectrum_at(int i, int k, int l) const {
    return spectrum_table[(static_cast<size_t>(i) * coupling->n_grid + k) * coupling->window.size() + l];
  }
  bool all_scalar() const;
};

double auto_broadening(const BandTable& bands);

ScatteringKernel assemble_kernel(std::shared_ptr<const BandTable> bands,
                                 std::shared_ptr<const CouplingTensor> coupling,
                                 const CorrelationModel& model, const KernelOptions& opt);

/// sum_k w_k delta_eta R~ T u T^dagger, Hermiticity-preserving sandwich.
FieldSlice apply_gain(const ScatteringKernel& kernel, const FieldSlice& u);

/// 1/2 {Gamma, u} + i [S, u] (shift part only when enabled).
FieldSlice apply_loss(const ScatteringKernel& kernel, const FieldSlice& u);

}  // namespace brte
