#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brte/bloch.hpp"
#include "brte/disorder.hpp"

namespace brte {

/// Wavefunction on a periodic 1D grid.
struct WaveState {
  double length = 0.0;
  Eigen::VectorXcd psi;

  int n() const { return static_cast<int>(psi.size()); }
  double dx() const { return length / n(); }
  double norm2() const { return psi.squaredNorm() * dx(); }
};

/// Bloch state of one band, normalized over the box.
WaveState make_bloch_state(const BandSolution& sol, int band, const PlaneWaveBasis& basis,
                           int n_cells, int pts_per_cell);

struct SchrodingerRun {
  WaveState final_state;
  std::vector<double> snapshot_times;
  std::vector<WaveState> snapshots;
  double norm_drift = 0.0;  // max |norm2 - initial| seen at snapshots
};

/// Split-step spectral evolution of the scaled equation
/// i dpsi/dt = [-(eps/2) d2/dx2 + U(x/eps)/eps + V(x)/sqrt(eps)] psi.
/// V is pre-sampled on the state's grid. Rejects dt when the kinetic phase at
/// the grid Nyquist exceeds pi.
SchrodingerRun evolve_schrodinger(const WaveState& psi0, const LatticeSpec& lat,
                                  const PeriodicPotential& U, const std::vector<double>& V,
                                  double epsilon, double dt, long n_steps, int snapshot_every = 0);

/// Continuum-normalized transform psi_hat(k_j) = dx sum_i psi_i e^{-i k_j x_i}.
Eigen::VectorXcd continuum_fourier(const WaveState& psi);

/// Band populations p_m(q) over the box-allowed q set. The band table grid
/// must be commensurate with the box (n grid points = number of cells).
Eigen::MatrixXd project_bands(const WaveState& psi, const BandTable& bands);

/// Population of a single (band, q) state.
double band_population(const WaveState& psi, const BandSolution& sol, int band,
                       const PlaneWaveBasis& basis);

struct DecayFit {
  double rate = 0.0;
  double rate_stderr = 0.0;
  double r_squared = 1.0;
  int n_points = 0;
  bool no_decay = false;
};

/// Exponential fit of a population series on the window [0.5, 0.9] x p(0).
/// A series that never leaves p > 0.9 p0 reports rate 0; a non-monotone
/// series beyond noise is rejected.
DecayFit measure_decay_rate(const std::vector<double>& times, const std::vector<double>& populations);

struct WignerGrid {
  double epsilon = 1.0;
  std::vector<double> x;
  std::vector<double> k;
  Eigen::MatrixXd w;  // x rows, k columns (real part)
  double max_imag_residual = 0.0;
};

/// Discrete non-symmetrized Wigner transform of psi at scale epsilon.
WignerGrid wigner_transform(const WaveState& psi, double epsilon);

struct SeedFit {
  uint64_t seed = 0;
  DecayFit fit;
  bool ok = false;
  std::string message;
};

struct OracleSettings {
  int box_cells = 0;
  int pts_per_cell = 0;
  int n_seeds = 0;
  uint64_t seed_base = 0;
  std::vector<double> sigma2_list;
  int bz_points = 0;  // kernel-side grid resolution
  int q_index = 0;    // index into the kernel grid
  int band = 0;       // 0-based
  double dt = 0.0;
  double t_final = 0.0;
  int record_every = 1;
  double epsilon = 1.0;
  double pw_cutoff = 0.0;
  int n_bands = 1;
  bool include_potential = false;
  double window_radius = -1.0;  // <= 0: one dual shell
};

struct GoldenRuleStudy {
  double q0 = 0.0;
  int band = 0;
  std::vector<double> kernel_rate;  // per sigma2 entry
  struct PerSigma {
    double sigma2 = 0.0;
    std::vector<SeedFit> fits;
    double mean_rate = 0.0;
    double stderr_mean = 0.0;
    double ratio_to_kernel = 0.0;
    int n_ok = 0;
  };
  std::vector<PerSigma> runs;
  double born_ratio = 0.0;  // mean_rate[1] / mean_rate[0] when two sigmas given
};

GoldenRuleStudy run_golden_rule_study(const LatticeSpec& lat, const PeriodicPotential& U,
                                      const CorrelationModel& model_template,
                                      const OracleSettings& settings);

}  // namespace brte
