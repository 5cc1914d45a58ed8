#include "brte/setup.hpp"

#include <cmath>

namespace brte {

RunSetup RunSetup::geometry_only(RunConfig cfg) {
  RunSetup s;
  s.lattice = build_lattice(cfg.dimension, cfg.basis);
  s.basis = PlaneWaveBasis::make(s.lattice, cfg.pw_cutoff);
  s.grid = BZGrid::uniform(s.lattice, cfg.bz_points);
  s.fields.e_uniform = cfg.e_field;
  s.fields.b_uniform = cfg.b_field;
  s.fields.a_static = cfg.a_static;
  s.cfg = std::move(cfg);
  return s;
}

void RunSetup::build_bands() {
  if (bands) return;
  bands = std::make_shared<BandTable>(
      BandTable::solve(grid, basis, cfg.potential, fields.a_at(0.0), cfg.n_bands));
}

std::vector<IVec> RunSetup::window() const {
  const double radius = cfg.window_radius > 0 ? cfg.window_radius : cfg.pw_cutoff;
  return dual_window(lattice, radius);
}

void RunSetup::build_coupling() {
  if (coupling) return;
  build_bands();
  coupling = std::make_shared<CouplingTensor>(CouplingTensor::build(*bands, window()));
}

void RunSetup::build_kernel() {
  if (kernel) return;
  build_coupling();
  kernel = std::make_shared<ScatteringKernel>(
      assemble_kernel(bands, coupling, cfg.disorder, cfg.kernel));
}

DistributionField build_initial_field(const RunSetup& setup, const SpatialGrid& xgrid,
                                      const InitialCondition& init) {
  const BandTable& bt = *setup.bands;
  DistributionField u = DistributionField::zeros(xgrid, bt);
  const auto a0 = setup.fields.a_at(0.0);

  for (int i = 0; i < bt.grid.size(); ++i) {
    const auto& sol = bt.at[static_cast<size_t>(i)];
    const int g = sol.group_of(init.band);
    const auto& grp = sol.groups[static_cast<size_t>(g)];
    double value = 0.0;
    if (init.type == "uniform") {
      value = init.amplitude;
    } else if (init.type == "gaussian_q") {
      RVec center = RVec::Zero(bt.grid.lattice.dim);
      for (int l = 0; l < bt.grid.lattice.dim && l < static_cast<int>(init.center.size()); ++l)
        center[l] = init.center[static_cast<size_t>(l)];
      // distance measured through the folded difference, so the profile is periodic
      const RVec dq = fold_k(RVec(bt.grid.points[static_cast<size_t>(i)] - center), bt.grid.lattice).q;
      value = init.amplitude * std::exp(-0.5 * dq.squaredNorm() / (init.width * init.width));
    } else if (init.type == "shell") {
      const double de = sol.energies[init.band] - init.energy;
      value = init.amplitude * std::exp(-0.5 * de * de / (init.width * init.width));
      if (init.anisotropy != 0.0) {
        const RVec v = group_velocity_mean(sol, g, a0, bt.basis);
        const double vn = v.norm();
        if (vn > 0) value *= 1.0 + init.anisotropy * v[0] / vn;
      }
    } else {
      throw Error("build_initial_field: unknown initial type '" + init.type + "'");
    }
    if (value < 0) value = 0;  // physical initial data stays positive semidefinite
    for (auto& slice : u.slices)
      slice.blocks[static_cast<size_t>(i)][static_cast<size_t>(g)] =
          value * Eigen::MatrixXcd::Identity(grp.size, grp.size);
  }

  // spatial profile: a gaussian pulse for inhomogeneous boxes
  if (!xgrid.homogeneous()) {
    const double x0 = 0.5 * xgrid.length;
    const double w = 0.05 * xgrid.length;
    for (int x = 0; x < xgrid.n; ++x) {
      const double dx = xgrid.length * x / xgrid.n - x0;
      const double envelope = std::exp(-0.5 * dx * dx / (w * w));
      u.slices[static_cast<size_t>(x)].scale(envelope);
    }
  }
  return u;
}

TransportContext build_transport_context(const RunSetup& setup, const TransportOptions& opt) {
  return TransportContext::build(setup.bands, setup.kernel, setup.fields, opt);
}

std::function<void(TransportContext&, const CellVectorPotential&)> make_rebuild_hook(
    RunSetup& setup, TransportOptions opt) {
  return [&setup, opt](TransportContext& ctx, const CellVectorPotential& a_now) {
    auto bands = std::make_shared<BandTable>(
        BandTable::solve(setup.grid, setup.basis, setup.cfg.potential, a_now, setup.cfg.n_bands));
    std::shared_ptr<const ScatteringKernel> kernel;
    if (opt.collisions) {
      auto coupling = std::make_shared<CouplingTensor>(CouplingTensor::build(*bands, setup.window()));
      kernel = std::make_shared<ScatteringKernel>(
          assemble_kernel(bands, coupling, setup.cfg.disorder, setup.cfg.kernel));
    }
    // coefficients sampled at a_now; the live field protocol stays untouched
    FieldConfig sampled = FieldConfig::none(setup.lattice.dim);
    sampled.a_static = a_now;
    TransportContext fresh = TransportContext::build(bands, kernel, sampled, opt);
    fresh.fields = ctx.fields;
    ctx = std::move(fresh);
  };
}

}  // namespace brte
