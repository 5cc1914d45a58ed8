#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brte/io.hpp"
#include "brte/transport.hpp"

#include <filesystem>

using namespace brte;

namespace {

LatticeSpec lat1d() { return build_lattice(1, {RVec::Constant(1, 1.0)}); }

struct TwoPointSystem {
  std::shared_ptr<BandTable> bands;
  std::shared_ptr<ScatteringKernel> kernel;
  double g = 0;  // off-diagonal relaxation weight
};

TwoPointSystem make_two_point(double q0, double sigma2, double eta) {
  TwoPointSystem sys;
  const auto lat = lat1d();
  const auto basis = PlaneWaveBasis::make(lat, 2.2 * two_pi);
  RVec qa(1), qb(1);
  qa << q0;
  qb << -q0;
  const auto grid = BZGrid::from_points(lat, {qa, qb}, {lat.bz_volume / 2, lat.bz_volume / 2});
  const auto a = CellVectorPotential::zero(1);
  sys.bands = std::make_shared<BandTable>(
      BandTable::solve(grid, basis, PeriodicPotential{}, a, 1));
  auto coupling = std::make_shared<CouplingTensor>(
      CouplingTensor::build(*sys.bands, dual_window(lat, 1.1 * two_pi)));
  CorrelationModel model;
  model.dim = 1;
  model.sigma2 = sigma2;
  model.corr_length = 1.0;
  KernelOptions opt;
  opt.eta_E = eta;
  opt.xi = eta;
  opt.convention = SpectrumArgConvention::momentum_transfer;
  sys.kernel = std::make_shared<ScatteringKernel>(assemble_kernel(sys.bands, coupling, model, opt));
  sys.g = (lat.bz_volume / 2) * delta_broadened(0.0, eta) * model.spectrum_abs(2 * q0);
  return sys;
}

struct DeskRun {
  std::shared_ptr<BandTable> bands;
  std::shared_ptr<ScatteringKernel> kernel;
};

DeskRun make_desk_run(int nq, double sigma2, double a0 = 0.0) {
  DeskRun d;
  const auto lat = lat1d();
  const auto basis = PlaneWaveBasis::make(lat, 6.2 * two_pi);
  PeriodicPotential u;
  u.set(IVec{1, 0, 0}, cplx{0.15, 0.0});
  CellVectorPotential a = CellVectorPotential::zero(1);
  a.uniform[0] = a0;
  d.bands = std::make_shared<BandTable>(BandTable::solve(BZGrid::uniform(lat, nq), basis, u, a, 2));
  auto coupling = std::make_shared<CouplingTensor>(
      CouplingTensor::build(*d.bands, dual_window(lat, 3.2 * two_pi)));
  CorrelationModel model;
  model.dim = 1;
  model.sigma2 = sigma2;
  model.corr_length = 0.8;
  KernelOptions opt;
  opt.convention = SpectrumArgConvention::momentum_transfer;
  d.kernel = std::make_shared<ScatteringKernel>(assemble_kernel(d.bands, coupling, model, opt));
  return d;
}

DistributionField shell_field(const BandTable& bands, double e0, double width, double aniso,
                              const TransportContext& ctx) {
  const SpatialGrid xg{1, 1.0};
  DistributionField u = DistributionField::zeros(xg, bands);
  for (int i = 0; i < bands.grid.size(); ++i) {
    const auto& sol = bands.at[static_cast<size_t>(i)];
    const double de = sol.energies[0] - e0;
    double val = std::exp(-0.5 * de * de / (width * width));
    const double v = ctx.velocity[static_cast<size_t>(i)][0][0];
    if (v != 0) val *= 1.0 + aniso * (v > 0 ? 1.0 : -1.0);
    u.slices[0].blocks[static_cast<size_t>(i)][0](0, 0) = val;
  }
  return u;
}

}  // namespace

TEST_CASE("zero right-hand side keeps the field bit-identical") {
  auto d = make_desk_run(16, 0.0, 0.3);  // sigma2 = 0: kernel empty; uniform A: Lorentz commutes
  TransportOptions topt;
  topt.advection = false;
  FieldConfig fields = FieldConfig::none(1);
  fields.a_static.uniform[0] = 0.3;
  auto ctx = TransportContext::build(d.bands, d.kernel, fields, topt);

  const SpatialGrid xg{1, 1.0};
  DistributionField u0 = DistributionField::zeros(xg, *d.bands);
  for (int i = 0; i < d.bands->grid.size(); ++i)
    u0.slices[0].blocks[static_cast<size_t>(i)][0](0, 0) = 0.5 + 0.01 * i;

  const auto rhs = rte_rhs(u0, ctx);
  for (const auto& row : rhs.slices[0].blocks)
    for (const auto& b : row) CHECK(b.cwiseAbs().maxCoeff() == 0.0);

  EvolveOptions eopt;
  eopt.dt = 0.1;
  eopt.t_final = 1.0;
  auto traj = evolve(u0, ctx, eopt);
  for (int i = 0; i < d.bands->grid.size(); ++i)
    CHECK(traj.snapshots.back().slices[0].blocks[static_cast<size_t>(i)][0](0, 0) ==
          u0.slices[0].blocks[static_cast<size_t>(i)][0](0, 0));
}

TEST_CASE("two-point system matches the closed-form matrix exponential") {
  auto sys = make_two_point(0.25 * pi, 0.01, 0.1);
  TransportOptions topt;
  topt.advection = false;
  topt.lorentz = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(sys.bands, sys.kernel, nofields, topt);

  const SpatialGrid xg{1, 1.0};
  DistributionField u0 = DistributionField::zeros(xg, *sys.bands);
  u0.slices[0].blocks[0][0](0, 0) = 1.0;
  u0.slices[0].blocks[1][0](0, 0) = 0.2;

  EvolveOptions eopt;
  eopt.dt = 0.01;
  eopt.t_final = 10.0;
  const auto traj = evolve(u0, ctx, eopt);

  const double mean = 0.6, diff = 0.4;
  const double decay = std::exp(-2 * sys.g * eopt.t_final);
  CHECK(std::abs(traj.snapshots.back().slices[0].blocks[0][0](0, 0).real() - (mean + diff * decay)) <
        1e-8);
  CHECK(std::abs(traj.snapshots.back().slices[0].blocks[1][0](0, 0).real() - (mean - diff * decay)) <
        1e-8);
}

TEST_CASE("rk4 and euler self-convergence orders") {
  // 2 g ~ 0.9 so the solution is still evolving at t_final and the dt error
  // ladder sits between roundoff and the fixed point
  auto sys = make_two_point(0.25 * pi, 0.05, 0.1);
  TransportOptions topt;
  topt.advection = false;
  topt.lorentz = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(sys.bands, sys.kernel, nofields, topt);
  const SpatialGrid xg{1, 1.0};
  DistributionField u0 = DistributionField::zeros(xg, *sys.bands);
  u0.slices[0].blocks[0][0](0, 0) = 1.0;

  auto final_value = [&](TimeMethod method, double dt) {
    EvolveOptions eopt;
    eopt.dt = dt;
    eopt.t_final = 2.0;
    eopt.method = method;
    const auto traj = evolve(u0, ctx, eopt);
    return traj.snapshots.back().slices[0].blocks[0][0](0, 0).real();
  };

  SUBCASE("rk4 is fourth order") {
    const double ref = final_value(TimeMethod::rk4, 0.003125);
    const double e1 = std::abs(final_value(TimeMethod::rk4, 0.2) - ref);
    const double e2 = std::abs(final_value(TimeMethod::rk4, 0.1) - ref);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.5);
    CHECK(order < 4.5);
  }
  SUBCASE("euler is first order") {
    const double ref = final_value(TimeMethod::rk4, 0.003125);
    const double e1 = std::abs(final_value(TimeMethod::euler, 0.05) - ref);
    const double e2 = std::abs(final_value(TimeMethod::euler, 0.025) - ref);
    const double order = std::log2(e1 / e2);
    CHECK(order > 0.8);
    CHECK(order < 1.2);
  }
}

TEST_CASE("pure advection translates a pulse at the group velocity") {
  const auto lat = lat1d();
  const auto basis = PlaneWaveBasis::make(lat, 3.2 * two_pi);
  const auto a = CellVectorPotential::zero(1);
  auto bands = std::make_shared<BandTable>(
      BandTable::solve(BZGrid::uniform(lat, 8), basis, PeriodicPotential{}, a, 1));
  TransportOptions topt;
  topt.collisions = false;
  topt.lorentz = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(bands, nullptr, nofields, topt);

  const int nx = 128;
  const SpatialGrid xg{nx, 12.8};
  DistributionField u0 = DistributionField::zeros(xg, *bands);
  for (int x = 0; x < nx; ++x) {
    const double dx = xg.length * x / nx - 0.5 * xg.length;
    const double val = std::exp(-0.5 * dx * dx / (0.64 * 0.64));
    for (int i = 0; i < bands->grid.size(); ++i)
      u0.slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)][0](0, 0) = val;
  }

  EvolveOptions eopt;
  eopt.dt = 0.02;
  eopt.t_final = 6.0;
  const auto traj = evolve(u0, ctx, eopt);

  // circular center of mass per q node, tracked through the first Fourier mode
  for (int i = 0; i < bands->grid.size(); ++i) {
    const double v = ctx.velocity[static_cast<size_t>(i)][0][0];
    if (std::abs(v) < 0.3) continue;  // too slow to measure in one run
    cplx m0{0, 0}, m1{0, 0};
    for (int x = 0; x < nx; ++x) {
      const double phase = two_pi * x / nx;
      m0 += u0.slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)][0](0, 0) *
            std::polar(1.0, phase);
      m1 += traj.snapshots.back().slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)][0](0, 0) *
            std::polar(1.0, phase);
    }
    double dtheta = std::arg(m1 / m0);
    const double expected = two_pi * v * eopt.t_final / xg.length;
    // unwrap to the nearest branch of the expected displacement
    while (dtheta - expected > pi) dtheta -= two_pi;
    while (expected - dtheta > pi) dtheta += two_pi;
    const double v_measured = dtheta * xg.length / (two_pi * eopt.t_final);
    CHECK(std::abs(v_measured - v) / std::abs(v) < 0.01);
  }
}

TEST_CASE("CFL violations are rejected unless overridden") {
  const auto lat = lat1d();
  const auto basis = PlaneWaveBasis::make(lat, 3.2 * two_pi);
  const auto a = CellVectorPotential::zero(1);
  auto bands = std::make_shared<BandTable>(
      BandTable::solve(BZGrid::uniform(lat, 8), basis, PeriodicPotential{}, a, 1));
  TransportOptions topt;
  topt.collisions = false;
  topt.lorentz = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(bands, nullptr, nofields, topt);
  const SpatialGrid xg{32, 3.2};
  DistributionField u0 = DistributionField::zeros(xg, *bands);
  EvolveOptions eopt;
  eopt.dt = 1.0;  // CFL = v dt / dx >> 1
  eopt.t_final = 1.0;
  CHECK_THROWS_AS(evolve(u0, ctx, eopt), Error);
  eopt.allow_cfl_violation = true;
  CHECK_NOTHROW(evolve(u0, ctx, eopt));  // zero data stays finite

  // overridden instability on spatially varying data aborts with the step index
  for (int x = 0; x < xg.n; ++x)
    for (auto& row : u0.slices[static_cast<size_t>(x)].blocks)
      for (auto& b : row) b(0, 0) = 1.0 + 0.5 * std::sin(two_pi * x / xg.n);
  eopt.t_final = 400.0;
  bool aborted = false;
  try {
    evolve(u0, ctx, eopt);
  } catch (const Error& e) {
    aborted = true;
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  CHECK(aborted);
}

TEST_CASE("observables: zeros, single node, symmetric shell current") {
  auto d = make_desk_run(16, 0.0);
  TransportOptions topt;
  topt.advection = false;
  topt.collisions = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(d.bands, nullptr, nofields, topt);
  const SpatialGrid xg{1, 1.0};

  SUBCASE("zero field") {
    const auto obs = observables(DistributionField::zeros(xg, *d.bands), ctx);
    CHECK(obs.total_trace == 0.0);
    CHECK(obs.band_population.cwiseAbs().maxCoeff() == 0.0);
    CHECK(obs.current.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single occupied node integrates to its weight") {
    DistributionField u = DistributionField::zeros(xg, *d.bands);
    u.slices[0].blocks[3][0](0, 0) = 1.0;
    const auto obs = observables(u, ctx);
    CHECK(obs.total_trace == doctest::Approx(d.bands->grid.weights[3]).epsilon(1e-14));
    CHECK(obs.band_population[0] == doctest::Approx(d.bands->grid.weights[3]));
    CHECK(obs.band_population[1] == 0.0);
  }
  SUBCASE("isotropic occupation carries no current") {
    auto u = shell_field(*d.bands, 1.5, 0.3, 0.0, ctx);
    const auto obs = observables(u, ctx);
    CHECK(std::abs(obs.current[0]) < 1e-12 * obs.total_trace);
  }
}

TEST_CASE("equilibrium shell distribution has a stationary total trace") {
  auto d = make_desk_run(48, 2e-3);
  TransportOptions topt;
  topt.advection = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(d.bands, d.kernel, nofields, topt);
  auto u = shell_field(*d.bands, 1.5, 0.3, 0.0, ctx);
  const auto rhs = rte_rhs(u, ctx);
  double rate = 0, scale = 0;
  for (int i = 0; i < d.bands->grid.size(); ++i) {
    const double w = d.bands->grid.weights[static_cast<size_t>(i)];
    for (size_t g = 0; g < rhs.slices[0].blocks[static_cast<size_t>(i)].size(); ++g) {
      rate += w * rhs.slices[0].blocks[static_cast<size_t>(i)][g](0, 0).real();
      scale += w * std::abs(u.slices[0].blocks[static_cast<size_t>(i)][g](0, 0).real()) *
               d.kernel->gamma[static_cast<size_t>(i)][g](0, 0).real();
    }
  }
  CHECK(std::abs(rate) < 1e-8 * scale);
}

TEST_CASE("conservation, Hermiticity and Lorentz trace over a homogeneous run") {
  auto d = make_desk_run(32, 2e-3, 0.3);
  TransportOptions topt;
  topt.advection = false;
  FieldConfig fields = FieldConfig::none(1);
  fields.a_static.uniform[0] = 0.3;
  auto ctx = TransportContext::build(d.bands, d.kernel, fields, topt);
  auto u0 = shell_field(*d.bands, 1.5, 0.3, 0.6, ctx);

  EvolveOptions eopt;
  eopt.dt = 0.05;
  eopt.t_final = 5.0;  // 100 steps
  const auto traj = evolve(u0, ctx, eopt);
  const double n0 = observables(traj.snapshots.front(), ctx).total_trace;
  const double n1 = observables(traj.snapshots.back(), ctx).total_trace;
  CHECK(std::abs(n1 - n0) / n0 < 1e-9);
  CHECK(traj.diag.max_lorentz_trace == 0.0);
  CHECK(traj.diag.max_herm_residual < 1e-10);
}

TEST_CASE("binary field round trip is bit exact") {
  auto d = make_desk_run(8, 0.0);
  TransportOptions topt;
  topt.advection = false;
  topt.collisions = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(d.bands, nullptr, nofields, topt);
  const SpatialGrid xg{4, 2.0};
  DistributionField u0 = DistributionField::zeros(xg, *d.bands);
  const CounterRng rng(31);
  uint64_t ctr = 0;
  for (auto& s : u0.slices)
    for (auto& row : s.blocks)
      for (auto& b : row) b(0, 0) = rng.uniform(ctr++);

  Trajectory traj;
  traj.times = {0.0};
  traj.snapshots = {u0};
  const std::string path = (std::filesystem::temp_directory_path() / "brte_fields_test.bin").string();
  write_fields_binary(path, traj);
  const auto back = read_fields_binary(path, *d.bands, xg.n, 1);
  for (int x = 0; x < xg.n; ++x)
    for (int i = 0; i < d.bands->grid.size(); ++i)
      for (size_t g = 0; g < back[0][static_cast<size_t>(x)][static_cast<size_t>(i)].size(); ++g)
        CHECK(back[0][static_cast<size_t>(x)][static_cast<size_t>(i)][g] ==
              u0.slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)][g]);
  std::filesystem::remove(path);
}

TEST_CASE("drifting A rebuilds the coefficients and keeps the trace conserved") {
  const auto lat = lat1d();
  const auto j = nlohmann::json::parse(R"({
    "seed": 1,
    "lattice": {"dimension": 1, "basis": [[1.0]]},
    "potential": {"coefficients": [{"mu": [1], "re": 0.15, "im": 0.0}]},
    "fields": {"e": [0.05]},
    "disorder": {"model": "gaussian", "sigma2": 2e-3, "corr_length": 0.8},
    "grid": {"bz_points": 16, "pw_cutoff": 20.0, "n_bands": 2,
             "spatial_points": 1, "box_length": 1.0},
    "kernel": {"convention": "momentum_transfer"},
    "units": {"system": "internal"}
  })");
  RunSetup setup = RunSetup::geometry_only(parse_config(j));
  setup.build_kernel();
  TransportOptions topt;
  topt.advection = false;
  auto ctx = build_transport_context(setup, topt);
  const double gamma_before = setup.kernel->gamma[2][0](0, 0).real();

  const SpatialGrid xg{1, 1.0};
  DistributionField u0 = DistributionField::zeros(xg, *setup.bands);
  for (auto& row : u0.slices[0].blocks)
    for (auto& b : row) b(0, 0) = 0.4;

  EvolveOptions eopt;
  eopt.dt = 0.05;
  eopt.t_final = 10.0;  // A drifts by 0.5
  eopt.rebuild_threshold = 0.1;
  eopt.rebuild = make_rebuild_hook(setup, topt);
  const auto traj = evolve(u0, ctx, eopt);
  CHECK(traj.diag.rebuilds == 4);
  // the rebuilt kernel follows the shifted spectrum
  const double gamma_after = ctx.kernel->gamma[2][0](0, 0).real();
  CHECK(gamma_after != gamma_before);
  const double n0 = observables(traj.snapshots.front(), ctx).total_trace;
  const double n1 = observables(traj.snapshots.back(), ctx).total_trace;
  CHECK(std::abs(n1 - n0) / n0 < 1e-9);
}

TEST_CASE("uniform magnetic field is rejected at this scale") {
  auto d = make_desk_run(8, 0.0);
  TransportOptions topt;
  topt.collisions = false;
  FieldConfig fields = FieldConfig::none(1);
  fields.b_uniform = RVec::Zero(3);
  fields.b_uniform[2] = 0.1;
  CHECK_THROWS_AS(TransportContext::build(d.bands, nullptr, fields, topt), Error);
}
