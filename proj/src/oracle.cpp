#include "brte/oracle.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "brte/coupling.hpp"
#include "brte/fft.hpp"
#include "brte/kernel.hpp"

namespace brte {

WaveState make_bloch_state(const BandSolution& sol, int band, const PlaneWaveBasis& basis,
                           int n_cells, int pts_per_cell) {
  if (basis.lattice.dim != 1) throw Error("make_bloch_state: 1D only");
  const double a = basis.lattice.direct(0, 0);
  WaveState w;
  w.length = n_cells * a;
  const int n = n_cells * pts_per_cell;
  w.psi = Eigen::VectorXcd::Zero(n);
  const double root_l = std::sqrt(w.length);
  for (int i = 0; i < n; ++i) {
    const double x = w.length * i / n;
    cplx acc{0, 0};
    for (int g = 0; g < basis.size(); ++g) {
      const double k = sol.q[0] + basis.vectors[static_cast<size_t>(g)][0];
      acc += sol.coeffs(g, band) * std::polar(1.0, k * x);
    }
    w.psi[i] = acc / root_l;
  }
  return w;
}

SchrodingerRun evolve_schrodinger(const WaveState& psi0, const LatticeSpec& lat,
                                  const PeriodicPotential& U, const std::vector<double>& V,
                                  double epsilon, double dt, long n_steps, int snapshot_every) {
  const int n = psi0.n();
  if (lat.dim != 1) throw Error("evolve_schrodinger: 1D only");
  if (static_cast<int>(V.size()) != n)
    throw Error("evolve_schrodinger: disorder samples do not match the grid");
  if (dt <= 0 || epsilon <= 0) throw Error("evolve_schrodinger: dt and epsilon must be positive");

  const double dx = psi0.dx();
  const double k_nyq = pi / dx;
  if (0.5 * epsilon * k_nyq * k_nyq * dt > pi)
    throw Error("evolve_schrodinger: kinetic phase at the grid Nyquist exceeds pi per step; "
                "reduce dt below " + format_double(two_pi / (epsilon * k_nyq * k_nyq)));

  // total potential (1/eps) U(x/eps) + (1/sqrt(eps)) V
  const double dual_unit = lat.dual(0, 0);
  Eigen::VectorXd vtot(n);
  for (int i = 0; i < n; ++i) {
    const double y = psi0.length * i / n / epsilon;
    double uval = 0;
    for (const auto& [mu, c] : U.entries())
      uval += (c * std::polar(1.0, mu[0] * dual_unit * y)).real();
    vtot[i] = uval / epsilon + V[static_cast<size_t>(i)] / std::sqrt(epsilon);
  }

  Eigen::VectorXcd phase_half(n), phase_kin(n);
  for (int i = 0; i < n; ++i) phase_half[i] = std::polar(1.0, -0.5 * dt * vtot[i]);
  for (int j = 0; j < n; ++j) {
    const int jj = j <= n / 2 ? j : j - n;
    const double k = two_pi * jj / psi0.length;
    phase_kin[j] = std::polar(1.0, -0.5 * epsilon * k * k * dt);
  }

  Fft1d fft(n);
  SchrodingerRun run;
  Eigen::VectorXcd psi = psi0.psi;
  const double norm0 = psi0.norm2();

  for (long step = 1; step <= n_steps; ++step) {
    psi.array() *= phase_half.array();
    fft.forward(psi);
    psi.array() *= phase_kin.array();
    fft.inverse(psi);
    psi.array() *= phase_half.array();
    if (snapshot_every > 0 && step % snapshot_every == 0) {
      WaveState w{psi0.length, psi};
      run.norm_drift = std::max(run.norm_drift, std::abs(w.norm2() - norm0));
      run.snapshot_times.push_back(step * dt);
      run.snapshots.push_back(std::move(w));
    }
  }
  run.final_state = WaveState{psi0.length, std::move(psi)};
  run.norm_drift = std::max(run.norm_drift, std::abs(run.final_state.norm2() - norm0));
  return run;
}

Eigen::VectorXcd continuum_fourier(const WaveState& psi) {
  Fft1d fft(psi.n());
  Eigen::VectorXcd v = psi.psi;
  fft.forward(v);
  return v * psi.dx();
}

namespace {

int momentum_bin(double k, double length, int n) {
  const double raw = k * length / two_pi;
  const int j = static_cast<int>(std::lround(raw));
  if (std::abs(raw - j) > 1e-8) return INT_MIN;  // not a box momentum
  if (j < -n / 2 || j >= (n + 1) / 2) return INT_MIN;
  return (j % n + n) % n;
}

cplx bloch_amplitude(const Eigen::VectorXcd& psi_hat, const BandSolution& sol, int band,
                     const PlaneWaveBasis& basis, double length) {
  const int n = static_cast<int>(psi_hat.size());
  cplx amp{0, 0};
  for (int g = 0; g < basis.size(); ++g) {
    const double k = sol.q[0] + basis.vectors[static_cast<size_t>(g)][0];
    const int bin = momentum_bin(k, length, n);
    if (bin == INT_MIN) continue;  // beyond the box Nyquist
    amp += std::conj(sol.coeffs(g, band)) * psi_hat[bin];
  }
  return amp / std::sqrt(length);
}

}  // namespace

Eigen::MatrixXd project_bands(const WaveState& psi, const BandTable& bands) {
  if (bands.grid.lattice.dim != 1) throw Error("project_bands: 1D only");
  const double a = bands.grid.lattice.direct(0, 0);
  const double cells = psi.length / a;
  const int n_cells = static_cast<int>(std::lround(cells));
  if (std::abs(cells - n_cells) > 1e-9 * n_cells)
    throw Error("project_bands: box is not commensurate with the lattice");
  if (!bands.grid.structured || bands.grid.n_axis[0] != n_cells)
    throw Error("project_bands: band table grid must have one q per box cell (" +
                std::to_string(n_cells) + " points)");

  const Eigen::VectorXcd psi_hat = continuum_fourier(psi);
  Eigen::MatrixXd p(bands.n_bands, bands.grid.size());
  for (int i = 0; i < bands.grid.size(); ++i)
    for (int b = 0; b < bands.n_bands; ++b)
      p(b, i) = std::norm(bloch_amplitude(psi_hat, bands.at[static_cast<size_t>(i)], b,
                                          bands.basis, psi.length));
  return p;
}

double band_population(const WaveState& psi, const BandSolution& sol, int band,
                       const PlaneWaveBasis& basis) {
  return std::norm(bloch_amplitude(continuum_fourier(psi), sol, band, basis, psi.length));
}

DecayFit measure_decay_rate(const std::vector<double>& times,
                            const std::vector<double>& populations) {
  if (times.size() != populations.size() || times.empty())
    throw Error("measure_decay_rate: empty or mismatched series");
  const double p0 = populations.front();
  if (p0 <= 0) throw Error("measure_decay_rate: nonpositive initial population");

  double pmin = p0;
  for (double p : populations) pmin = std::min(pmin, p);
  DecayFit fit;
  if (pmin > 0.9 * p0) {
    fit.no_decay = true;
    return fit;
  }

  std::vector<double> t, lp;
  for (size_t i = 0; i < times.size(); ++i) {
    const double p = populations[i];
    if (p <= 0.9 * p0 && p >= 0.5 * p0) {
      t.push_back(times[i]);
      lp.push_back(std::log(p / p0));
    }
    if (p < 0.5 * p0) break;  // leave the Born window once
  }
  if (t.size() < 4)
    throw Error("measure_decay_rate: fewer than 4 samples in the (0.5, 0.9) p0 window");

  const int m = static_cast<int>(t.size());
  double tbar = 0, ybar = 0;
  for (int i = 0; i < m; ++i) {
    tbar += t[static_cast<size_t>(i)];
    ybar += lp[static_cast<size_t>(i)];
  }
  tbar /= m;
  ybar /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < m; ++i) {
    const double dt = t[static_cast<size_t>(i)] - tbar;
    const double dy = lp[static_cast<size_t>(i)] - ybar;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  double ss_res = 0;
  for (int i = 0; i < m; ++i) {
    const double pred = ybar + slope * (t[static_cast<size_t>(i)] - tbar);
    const double r = lp[static_cast<size_t>(i)] - pred;
    ss_res += r * r;
  }
  fit.rate = -slope;
  fit.n_points = m;
  fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  fit.rate_stderr = m > 2 ? std::sqrt(ss_res / (m - 2) / sxx) : 0.0;
  if (slope >= 0)
    throw Error("measure_decay_rate: population series is not decaying in the fit window");
  if (fit.r_squared < 0.8)
    throw Error("measure_decay_rate: series is non-monotone beyond noise (R^2 = " +
                format_double(fit.r_squared) + ")");
  return fit;
}

WignerGrid wigner_transform(const WaveState& psi, double epsilon) {
  const int n = psi.n();
  const Eigen::VectorXcd psi_hat = continuum_fourier(psi);

  WignerGrid w;
  w.epsilon = epsilon;
  w.x.resize(static_cast<size_t>(n));
  w.k.resize(static_cast<size_t>(n));
  w.w.resize(n, n);
  for (int i = 0; i < n; ++i) w.x[static_cast<size_t>(i)] = psi.length * i / n;
  // ascending box momenta scaled by epsilon
  for (int j = 0; j < n; ++j) {
    const int jj = j - n / 2;
    w.k[static_cast<size_t>(j)] = epsilon * two_pi * jj / psi.length;
  }
  for (int i = 0; i < n; ++i) {
    const double x = psi.length * i / n;
    const cplx pc = std::conj(psi.psi[i]) / (two_pi * epsilon);
    for (int j = 0; j < n; ++j) {
      const int jj = j - n / 2;
      const double kbin = two_pi * jj / psi.length;
      const int bin = (jj % n + n) % n;
      const cplx val = pc * std::polar(1.0, kbin * x) * psi_hat[bin];
      w.w(i, j) = val.real();
      w.max_imag_residual = std::max(w.max_imag_residual, std::abs(val.imag()));
    }
  }
  return w;
}

GoldenRuleStudy run_golden_rule_study(const LatticeSpec& lat, const PeriodicPotential& U,
                                      const CorrelationModel& model_template,
                                      const OracleSettings& s) {
  if (lat.dim != 1) throw Error("run_golden_rule_study: 1D only");
  if (s.bz_points <= 0 || s.box_cells % s.bz_points != 0)
    throw Error("run_golden_rule_study: box_cells must be a multiple of bz_points so the "
                "probe q is box-allowed");

  const PeriodicPotential u_used = s.include_potential ? U : PeriodicPotential{};
  const auto basis = PlaneWaveBasis::make(lat, s.pw_cutoff);
  const auto a_zero = CellVectorPotential::zero(lat.dim);

  // kernel side
  auto bands = std::make_shared<BandTable>(
      BandTable::solve(BZGrid::uniform(lat, s.bz_points), basis, u_used, a_zero, s.n_bands));
  const double wrad = s.window_radius > 0 ? s.window_radius : 1.1 * lat.dual.col(0).norm();
  auto coupling = std::make_shared<CouplingTensor>(
      CouplingTensor::build(*bands, dual_window(lat, wrad)));

  GoldenRuleStudy study;
  study.band = s.band;
  study.q0 = bands->grid.points[static_cast<size_t>(s.q_index)][0];

  // Schrodinger side shares one band solution at q0 for projections
  const auto& sol_q0 = bands->at[static_cast<size_t>(s.q_index)];
  const WaveState psi0 = make_bloch_state(sol_q0, s.band, basis, s.box_cells, s.pts_per_cell);
  const long n_steps = std::lround(s.t_final / s.dt);
  const int n_grid = psi0.n();

  for (double sigma2 : s.sigma2_list) {
    CorrelationModel model = model_template;
    model.sigma2 = sigma2;

    KernelOptions kopt;
    kopt.convention = SpectrumArgConvention::momentum_transfer;
    const ScatteringKernel kernel = assemble_kernel(bands, coupling, model, kopt);
    const int group = sol_q0.group_of(s.band);
    study.kernel_rate.push_back(
        kernel.gamma[static_cast<size_t>(s.q_index)][static_cast<size_t>(group)](0, 0).real());

    GoldenRuleStudy::PerSigma run;
    run.sigma2 = sigma2;
    run.fits.resize(static_cast<size_t>(s.n_seeds));

#pragma omp parallel for schedule(dynamic)
    for (int seed_idx = 0; seed_idx < s.n_seeds; ++seed_idx) {
      SeedFit out;
      out.seed = s.seed_base + static_cast<uint64_t>(seed_idx);
      try {
        const auto v = sample_realization(model, psi0.length, n_grid, out.seed);
        Eigen::VectorXcd psi = psi0.psi;
        WaveState state{psi0.length, psi};

        std::vector<double> times{0.0}, pops{band_population(state, sol_q0, s.band, basis)};
        long done = 0;
        while (done < n_steps) {
          const long chunk = std::min<long>(s.record_every, n_steps - done);
          const auto r = evolve_schrodinger(state, lat, u_used, v, s.epsilon, s.dt, chunk, 0);
          state = r.final_state;
          done += chunk;
          times.push_back(done * s.dt);
          pops.push_back(band_population(state, sol_q0, s.band, basis));
          if (pops.back() < 0.4 * pops.front()) break;  // window fully covered
        }
        out.fit = measure_decay_rate(times, pops);
        out.ok = true;
      } catch (const std::exception& e) {
        out.ok = false;
        out.message = e.what();
      }
      run.fits[static_cast<size_t>(seed_idx)] = std::move(out);
    }

    double sum = 0, sum2 = 0;
    int n_ok = 0;
    for (const auto& f : run.fits) {
      if (!f.ok || f.fit.no_decay) continue;
      sum += f.fit.rate;
      sum2 += f.fit.rate * f.fit.rate;
      ++n_ok;
    }
    run.n_ok = n_ok;
    if (n_ok > 0) {
      run.mean_rate = sum / n_ok;
      if (n_ok > 1)
        run.stderr_mean = std::sqrt(std::max(0.0, (sum2 / n_ok - run.mean_rate * run.mean_rate) /
                                                      (n_ok - 1)));
      run.ratio_to_kernel = run.mean_rate / study.kernel_rate.back();
    }
    study.runs.push_back(std::move(run));
  }
  if (study.runs.size() >= 2 && study.runs[0].mean_rate > 0)
    study.born_ratio = study.runs[1].mean_rate / study.runs[0].mean_rate;
  return study;
}

}  // namespace brte
