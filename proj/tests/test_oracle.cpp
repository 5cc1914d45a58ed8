#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brte/oracle.hpp"

using namespace brte;

namespace {

LatticeSpec lat1d() { return build_lattice(1, {RVec::Constant(1, 1.0)}); }

RVec q1(double x) { return RVec::Constant(1, x); }

PeriodicPotential cosine(double u1) {
  PeriodicPotential u;
  u.set(IVec{1, 0, 0}, cplx{u1, 0.0});
  return u;
}

BandSolution solve_at(const RVec& q, const PeriodicPotential& u, const PlaneWaveBasis& basis,
                      int n_bands) {
  const auto a = CellVectorPotential::zero(1);
  return solve_bands(assemble_hamiltonian(q, a, u, basis), q, basis, n_bands);
}

}  // namespace

TEST_CASE("free plane wave evolves by a pure kinetic phase") {
  const auto lat = lat1d();
  const int n = 64;
  const double box = 16.0;
  WaveState psi0;
  psi0.length = box;
  psi0.psi = Eigen::VectorXcd::Zero(n);
  const double k0 = two_pi * 3 / box;
  for (int i = 0; i < n; ++i) psi0.psi[i] = std::polar(1.0 / std::sqrt(box), k0 * box * i / n);

  const PeriodicPotential u;
  const std::vector<double> v(static_cast<size_t>(n), 0.0);
  const double dt = 0.01;
  const long steps = 100;
  const auto run = evolve_schrodinger(psi0, lat, u, v, 1.0, dt, steps);
  const cplx expected_phase = std::polar(1.0, -0.5 * k0 * k0 * dt * steps);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(run.final_state.psi[i] - expected_phase * psi0.psi[i]) < 1e-12);
}

TEST_CASE("Bloch state is stationary under its own potential") {
  const auto lat = lat1d();
  const auto basis = PlaneWaveBasis::make(lat, 5.2 * two_pi);
  const auto u = cosine(0.3);
  const int cells = 8, ppc = 8;
  const auto sol = solve_at(q1(two_pi / 8), u, basis, 2);
  const auto psi0 = make_bloch_state(sol, 0, basis, cells, ppc);
  CHECK(psi0.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(band_population(psi0, sol, 0, basis) == doctest::Approx(1.0).epsilon(1e-10));

  const std::vector<double> v(static_cast<size_t>(psi0.n()), 0.0);
  const auto run = evolve_schrodinger(psi0, lat, u, v, 1.0, 0.005, 2000);
  CHECK(band_population(run.final_state, sol, 0, basis) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("split-step conserves the norm over 1e4 steps") {
  const auto lat = lat1d();
  const auto basis = PlaneWaveBasis::make(lat, 4.2 * two_pi);
  const auto u = cosine(0.2);
  const auto sol = solve_at(q1(0.4), u, basis, 1);
  auto psi0 = make_bloch_state(sol, 0, basis, 8, 8);
  CorrelationModel m;
  m.dim = 1;
  m.sigma2 = 0.01;
  m.corr_length = 1.0;
  const auto v = sample_realization(m, psi0.length, psi0.n(), 4);
  const auto run = evolve_schrodinger(psi0, lat, u, v, 1.0, 0.005, 10000, 2000);
  CHECK(run.norm_drift < 1e-10);
}

TEST_CASE("too-large kinetic phase per step is rejected") {
  const auto lat = lat1d();
  WaveState psi0;
  psi0.length = 8.0;
  psi0.psi = Eigen::VectorXcd::Ones(64);
  const std::vector<double> v(64, 0.0);
  // Nyquist k = pi n / L = 8 pi: phase = eps k^2 dt / 2 > pi for dt = 0.05
  CHECK_THROWS_AS(evolve_schrodinger(psi0, lat, PeriodicPotential{}, v, 1.0, 0.05, 1), Error);
}

TEST_CASE("band projections resolve superpositions and completeness") {
  const auto lat = lat1d();
  const auto basis = PlaneWaveBasis::make(lat, 5.2 * two_pi);
  const auto u = cosine(0.3);
  const int cells = 8, ppc = 8;
  const auto a = CellVectorPotential::zero(1);
  const auto bands = BandTable::solve(BZGrid::uniform(lat, cells), basis, u, a,
                                      /*n_bands=*/basis.size());

  SUBCASE("single Bloch state projects onto itself") {
    const int iq = 3;
    const auto psi = make_bloch_state(bands.at[iq], 1, basis, cells, ppc);
    const auto p = project_bands(psi, bands);
    CHECK(p(1, iq) == doctest::Approx(1.0).epsilon(1e-10));
    double rest = 0;
    for (int b = 0; b < p.rows(); ++b)
      for (int i = 0; i < p.cols(); ++i)
        if (!(b == 1 && i == iq)) rest = std::max(rest, p(b, i));
    CHECK(rest < 1e-10);
  }

  SUBCASE("two-state superposition reproduces its weights") {
    const auto psi_a = make_bloch_state(bands.at[2], 0, basis, cells, ppc);
    const auto psi_b = make_bloch_state(bands.at[5], 1, basis, cells, ppc);
    WaveState psi;
    psi.length = psi_a.length;
    psi.psi = 0.6 * psi_a.psi + 0.8 * psi_b.psi;
    const auto p = project_bands(psi, bands);
    CHECK(p(0, 2) == doctest::Approx(0.36).epsilon(1e-9));
    CHECK(p(1, 5) == doctest::Approx(0.64).epsilon(1e-9));
  }

  SUBCASE("random band-limited state: populations sum to the norm") {
    // random superposition of Bloch states stays within the projection basis
    WaveState psi;
    psi.length = cells * 1.0;
    psi.psi = Eigen::VectorXcd::Zero(cells * ppc);
    const CounterRng rng(9);
    uint64_t ctr = 0;
    for (int iq = 0; iq < cells; ++iq)
      for (int b = 0; b < 3; ++b) {
        const auto state = make_bloch_state(bands.at[iq], b, basis, cells, ppc);
        psi.psi += cplx{rng.uniform(ctr++) - 0.5, rng.uniform(ctr++) - 0.5} * state.psi;
      }
    const auto p = project_bands(psi, bands);
    CHECK(std::abs(p.sum() - psi.norm2()) < 1e-6 * psi.norm2());
  }

  SUBCASE("incommensurate table is rejected") {
    const auto psi = make_bloch_state(bands.at[0], 0, basis, cells, ppc);
    const auto bands_bad = BandTable::solve(BZGrid::uniform(lat, cells + 1), basis, u, a, 2);
    CHECK_THROWS_AS(project_bands(psi, bands_bad), Error);
  }
}

TEST_CASE("decay fitting: flat series, synthetic exponential, rising series") {
  SUBCASE("no decay reports rate zero") {
    std::vector<double> t, p;
    for (int i = 0; i < 50; ++i) {
      t.push_back(i * 0.1);
      p.push_back(1.0 - 1e-6 * i);
    }
    const auto fit = measure_decay_rate(t, p);
    CHECK(fit.no_decay);
    CHECK(fit.rate == 0.0);
  }
  SUBCASE("synthetic exponential with small noise is recovered") {
    const double rate = 0.23;
    const CounterRng rng(55);
    std::vector<double> t, p;
    for (int i = 0; i < 400; ++i) {
      t.push_back(i * 0.05);
      p.push_back(std::exp(-rate * t.back()) * (1.0 + 0.002 * (rng.uniform(static_cast<uint64_t>(i)) - 0.5)));
    }
    const auto fit = measure_decay_rate(t, p);
    CHECK(fit.rate == doctest::Approx(rate).epsilon(2e-3));
    CHECK(fit.n_points >= 4);
    CHECK(fit.r_squared > 0.99);
  }
  SUBCASE("non-monotone series beyond noise is rejected") {
    std::vector<double> t, p;
    for (int i = 0; i < 150; ++i) {
      t.push_back(i * 0.1);
      p.push_back(0.75 + 0.25 * std::cos(0.05 * i));  // dips through the window and returns
    }
    CHECK_THROWS_AS(measure_decay_rate(t, p), Error);
  }
}

TEST_CASE("Wigner transform of a plane wave concentrates on one momentum column") {
  const int n = 64;
  const double box = 16.0;
  WaveState psi;
  psi.length = box;
  psi.psi = Eigen::VectorXcd::Zero(n);
  const double k0 = two_pi * 5 / box;
  for (int i = 0; i < n; ++i) psi.psi[i] = std::polar(1.0 / std::sqrt(box), k0 * box * i / n);
  const auto w = wigner_transform(psi, 1.0);
  for (int j = 0; j < n; ++j) {
    const bool on_column = std::abs(w.k[static_cast<size_t>(j)] - k0) < 1e-12;
    for (int i = 0; i < n; ++i) {
      if (on_column) CHECK(w.w(i, j) == doctest::Approx(1.0 / two_pi).epsilon(1e-10));
      else CHECK(std::abs(w.w(i, j)) < 1e-12);
    }
  }
}

TEST_CASE("Wigner transform of a gaussian packet matches the closed form") {
  const int n = 512;
  const double box = 51.2;
  const double s = 2.0, x0 = 25.6, k0 = 1.0;
  WaveState psi;
  psi.length = box;
  psi.psi = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double x = box * i / n;
    psi.psi[i] = std::pow(pi * s * s, -0.25) *
                 std::exp(-0.5 * (x - x0) * (x - x0) / (s * s)) * std::polar(1.0, k0 * x);
  }
  const auto w = wigner_transform(psi, 1.0);

  // closed form of the one-sided transform:
  // (1/2pi) conj(psi(x)) e^{ikx} psihat(k) with gaussian psihat
  double worst = 0;
  for (int i = 0; i < n; i += 7) {
    const double x = box * i / n;
    for (int j = 0; j < n; j += 7) {
      const double k = w.k[static_cast<size_t>(j)];
      if (std::abs(k - k0) > 3.0 / s) continue;
      const cplx psihat = std::pow(4 * pi * s * s, 0.25) *
                          std::exp(-0.5 * s * s * (k - k0) * (k - k0)) *
                          std::polar(1.0, -(k - k0) * x0);
      const cplx want = std::conj(psi.psi[i]) * std::polar(1.0, k * x) * psihat / two_pi;
      worst = std::max(worst, std::abs(w.w(i, j) - want.real()));
    }
  }
  CHECK(worst < 1e-10);

  // marginals
  Eigen::VectorXd kmarg = Eigen::VectorXd::Zero(n);
  const double dk = w.k[1] - w.k[0];
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) kmarg[j] += w.w(i, j) * box / n;
  const auto psihat_all = continuum_fourier(psi);
  double marg_err = 0;
  for (int j = 0; j < n; ++j) {
    const int jj = j - n / 2;
    const int bin = (jj % n + n) % n;
    marg_err = std::max(marg_err, std::abs(kmarg[j] * two_pi - std::norm(psihat_all[bin])));
  }
  CHECK(marg_err < 1e-6);

  // x marginal: sum_k W dk = |psi(x)|^2
  for (int i = 0; i < n; i += 31) {
    double acc = 0;
    for (int j = 0; j < n; ++j) acc += w.w(i, j) * dk;
    CHECK(acc == doctest::Approx(std::norm(psi.psi[i])).epsilon(1e-8));
  }
}

TEST_CASE("golden-rule smoke study at reduced size") {
  const auto lat = lat1d();
  CorrelationModel model;
  model.dim = 1;
  model.sigma2 = 2e-3;
  model.corr_length = 1.0;

  OracleSettings s;
  s.box_cells = 512;
  s.pts_per_cell = 2;
  s.n_seeds = 6;
  s.seed_base = 1234;
  s.sigma2_list = {2e-3};
  s.bz_points = 128;
  s.q_index = 16;  // q = 2 pi / 8
  s.band = 0;
  s.dt = 0.1;
  s.t_final = 140.0;
  s.record_every = 10;
  s.pw_cutoff = 3.2 * two_pi;
  s.n_bands = 1;
  s.include_potential = false;

  const auto study = run_golden_rule_study(lat, PeriodicPotential{}, model, s);
  REQUIRE(study.runs.size() == 1);
  CHECK(study.runs[0].n_ok >= 5);
  // loose smoke tolerance; the acceptance suite runs the full-size ensemble
  CHECK(std::abs(study.runs[0].ratio_to_kernel - 1.0) < 0.4);
}
