#include "brte/transport.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace brte {

DistributionField DistributionField::zeros(const SpatialGrid& xg, const BandTable& bands) {
  DistributionField f;
  f.xgrid = xg;
  f.slices.assign(static_cast<size_t>(std::max(1, xg.n)), FieldSlice::zeros(bands));
  return f;
}

void DistributionField::add_scaled(const DistributionField& other, double a) {
  for (size_t x = 0; x < slices.size(); ++x) slices[x].add_scaled(other.slices[x], a);
}

double DistributionField::max_hermiticity_residual() const {
  double m = 0;
  for (const auto& s : slices) m = std::max(m, s.max_hermiticity_residual());
  return m;
}

void DistributionField::symmetrize() {
  for (auto& s : slices) s.symmetrize();
}

bool DistributionField::all_finite() const {
  for (const auto& s : slices)
    if (!s.all_finite()) return false;
  return true;
}

FieldConfig FieldConfig::none(int dim) {
  FieldConfig f;
  f.e_uniform = RVec::Zero(dim);
  f.b_uniform = RVec::Zero(dim);
  f.a_static = CellVectorPotential::zero(dim);
  return f;
}

CellVectorPotential FieldConfig::a_at(double t) const {
  CellVectorPotential a = a_static;
  if (e_uniform.size() > 0) a.uniform = a_static.uniform - t * e_uniform;
  return a;
}

TransportContext TransportContext::build(std::shared_ptr<const BandTable> bands,
                                         std::shared_ptr<const ScatteringKernel> kernel,
                                         const FieldConfig& fields, const TransportOptions& opt) {
  if (!bands->uniform_grouping())
    throw Error("TransportContext: degeneracy grouping varies across the grid; "
                "the matrix-valued field needs a uniform band-group structure");
  if (fields.b_uniform.size() > 0 && fields.b_uniform.norm() > 0)
    throw Error("TransportContext: a uniform B needs a linear-in-x vector potential, "
                "which the periodic desk-scale box cannot represent");

  TransportContext ctx;
  ctx.bands = bands;
  ctx.kernel = opt.collisions ? kernel : nullptr;
  ctx.opt = opt;
  ctx.fields = fields;
  if (opt.collisions && !ctx.kernel) throw Error("TransportContext: collisions enabled without a kernel");

  const auto a0 = fields.a_at(0.0);
  const int nq = bands->grid.size();
  ctx.velocity.resize(static_cast<size_t>(nq));
  for (int i = 0; i < nq; ++i) {
    const auto& sol = bands->at[static_cast<size_t>(i)];
    for (int g = 0; g < static_cast<int>(sol.groups.size()); ++g)
      ctx.velocity[static_cast<size_t>(i)].push_back(
          group_velocity_mean(sol, g, a0, bands->basis));
  }

  const bool need_lorentz = opt.lorentz && !a0.is_zero();
  if (need_lorentz) {
    ctx.lorentz.resize(static_cast<size_t>(nq));
    for (int i = 0; i < nq; ++i) {
      const auto& sol = bands->at[static_cast<size_t>(i)];
      for (int g = 0; g < static_cast<int>(sol.groups.size()); ++g) {
        // M_j needs the scalar band velocity; degenerate groups must be scalar
        const RVec v = group_velocity(sol, sol.groups[static_cast<size_t>(g)].first_band, a0,
                                      bands->basis);
        ctx.lorentz[static_cast<size_t>(i)].push_back(
            compute_lorentz_matrix(sol, g, v, a0, bands->basis));
      }
    }
  }
  return ctx;
}

double TransportContext::max_velocity() const {
  double m = 0;
  for (const auto& row : velocity)
    for (const auto& v : row) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

DistributionField rte_rhs(const DistributionField& u, const TransportContext& ctx) {
  const BandTable& bt = *ctx.bands;
  DistributionField rhs = DistributionField::zeros(u.xgrid, bt);
  const int nx = static_cast<int>(u.slices.size());

  for (int x = 0; x < nx; ++x) {
    if (ctx.opt.collisions) {
      FieldSlice gain = apply_gain(*ctx.kernel, u.slices[static_cast<size_t>(x)]);
      FieldSlice loss = apply_loss(*ctx.kernel, u.slices[static_cast<size_t>(x)]);
      gain.add_scaled(loss, -1.0);
      rhs.slices[static_cast<size_t>(x)] = std::move(gain);
    }
    if (!ctx.lorentz.empty()) {
      auto& dst = rhs.slices[static_cast<size_t>(x)];
      const auto& us = u.slices[static_cast<size_t>(x)];
#pragma omp parallel for schedule(static)
      for (int i = 0; i < bt.grid.size(); ++i)
        for (size_t g = 0; g < dst.blocks[static_cast<size_t>(i)].size(); ++g) {
          const auto& m = ctx.lorentz[static_cast<size_t>(i)][g];
          const auto& ub = us.blocks[static_cast<size_t>(i)][g];
          dst.blocks[static_cast<size_t>(i)][g] -= m * ub - ub * m;
        }
    }
  }

  if (!u.xgrid.homogeneous() && ctx.opt.advection) {
    const double dx = u.xgrid.dx();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < bt.grid.size(); ++i) {
      for (size_t g = 0; g < rhs.slices[0].blocks[static_cast<size_t>(i)].size(); ++g) {
        const double v = ctx.velocity[static_cast<size_t>(i)][g][0];
        for (int x = 0; x < nx; ++x) {
          const int xm = (x + nx - 1) % nx;
          const int xp = (x + 1) % nx;
          const auto& here = u.slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)][g];
          const auto& prev = u.slices[static_cast<size_t>(xm)].blocks[static_cast<size_t>(i)][g];
          const auto& next = u.slices[static_cast<size_t>(xp)].blocks[static_cast<size_t>(i)][g];
          auto& dst = rhs.slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)][g];
          if (ctx.opt.stencil == Stencil::centered) {
            dst -= (v / (2 * dx)) * (next - prev);
          } else if (v > 0) {
            dst -= (v / dx) * (here - prev);
          } else if (v < 0) {
            dst -= (v / dx) * (next - here);
          }
        }
      }
    }
  }
  return rhs;
}

namespace {

// Commutator trace with (a,b)/(b,a) terms paired so cancellation is exact in
// floating point; a nonzero value means the Lorentz term lost its commutator
// structure.
double paired_commutator_trace(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& u) {
  const int r = static_cast<int>(m.rows());
  double acc = 0;
  for (int a = 0; a < r; ++a)
    for (int b = a; b < r; ++b) {
      const cplx s = m(a, b) * u(b, a) - u(a, b) * m(b, a);
      const cplx sp = (a == b) ? cplx{0, 0} : m(b, a) * u(a, b) - u(b, a) * m(a, b);
      acc += (s + sp).real();
    }
  return acc;
}

double min_eigenvalue(const FieldSlice& s) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : s.blocks)
    for (const auto& b : row) {
      if (b.rows() == 1) {
        m = std::min(m, b(0, 0).real());
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b, Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues().minCoeff());
      }
    }
  return m;
}

}  // namespace

Trajectory evolve(const DistributionField& u0, TransportContext& ctx, const EvolveOptions& opt) {
  if (opt.dt <= 0) throw Error("evolve: dt must be positive");
  const long steps = std::lround(opt.t_final / opt.dt);

  if (!u0.xgrid.homogeneous() && ctx.opt.advection) {
    const double cfl = ctx.max_velocity() * opt.dt / u0.xgrid.dx();
    if (cfl > 1.0 && !opt.allow_cfl_violation)
      throw Error("evolve: advective CFL number " + format_double(cfl) +
                  " exceeds 1; reduce dt or set the override");
  }

  Trajectory traj;
  traj.diag.min_block_eigenvalue = std::numeric_limits<double>::infinity();
  DistributionField u = u0;
  traj.times.push_back(u.time);
  traj.snapshots.push_back(u);
  for (const auto& s : u0.slices) traj.diag.min_block_eigenvalue =
      std::min(traj.diag.min_block_eigenvalue, min_eigenvalue(s));

  RVec a_built = ctx.fields.a_at(u0.time).uniform;
  for (long step = 1; step <= steps; ++step) {
    if (opt.rebuild_threshold >= 0 && opt.rebuild && ctx.fields.time_dependent()) {
      const auto a_now = ctx.fields.a_at(u.time);
      if ((a_now.uniform - a_built).norm() > opt.rebuild_threshold) {
        opt.rebuild(ctx, a_now);
        a_built = a_now.uniform;
        ++traj.diag.rebuilds;
      }
    }

    if (opt.method == TimeMethod::euler) {
      DistributionField k1 = rte_rhs(u, ctx);
      u.add_scaled(k1, opt.dt);
    } else {
      DistributionField k1 = rte_rhs(u, ctx);
      DistributionField u2 = u;
      u2.add_scaled(k1, 0.5 * opt.dt);
      DistributionField k2 = rte_rhs(u2, ctx);
      DistributionField u3 = u;
      u3.add_scaled(k2, 0.5 * opt.dt);
      DistributionField k3 = rte_rhs(u3, ctx);
      DistributionField u4 = u;
      u4.add_scaled(k3, opt.dt);
      DistributionField k4 = rte_rhs(u4, ctx);
      u.add_scaled(k1, opt.dt / 6.0);
      u.add_scaled(k2, opt.dt / 3.0);
      u.add_scaled(k3, opt.dt / 3.0);
      u.add_scaled(k4, opt.dt / 6.0);
    }
    u.time = u0.time + step * opt.dt;

    if (!u.all_finite())
      throw Error("evolve: non-finite values at step " + std::to_string(step));
    traj.diag.max_herm_residual = std::max(traj.diag.max_herm_residual, u.max_hermiticity_residual());
    u.symmetrize();

    if (!ctx.lorentz.empty()) {
      double tr = 0;
      for (const auto& s : u.slices)
        for (int i = 0; i < ctx.bands->grid.size(); ++i)
          for (size_t g = 0; g < s.blocks[static_cast<size_t>(i)].size(); ++g)
            tr += ctx.bands->grid.weights[static_cast<size_t>(i)] *
                  paired_commutator_trace(ctx.lorentz[static_cast<size_t>(i)][g],
                                          s.blocks[static_cast<size_t>(i)][g]);
      traj.diag.max_lorentz_trace = std::max(traj.diag.max_lorentz_trace, std::abs(tr));
    }

    const bool record = (opt.snapshot_every > 0 && step % opt.snapshot_every == 0) || step == steps;
    if (record) {
      for (const auto& s : u.slices)
        traj.diag.min_block_eigenvalue = std::min(traj.diag.min_block_eigenvalue, min_eigenvalue(s));
      traj.times.push_back(u.time);
      traj.snapshots.push_back(u);
    }
  }
  traj.diag.steps = steps;
  return traj;
}

Observables observables(const DistributionField& u, const TransportContext& ctx) {
  const BandTable& bt = *ctx.bands;
  const int nx = static_cast<int>(u.slices.size());
  const double wx = u.xgrid.node_weight();

  Observables obs;
  obs.band_population = Eigen::VectorXd::Zero(bt.n_bands);
  obs.current = RVec::Zero(bt.grid.lattice.dim);
  obs.density = Eigen::VectorXd::Zero(nx);

  // deterministic reduction: per-node values first, serial accumulation after
  std::vector<double> node_trace(static_cast<size_t>(nx) * bt.grid.size(), 0.0);
#pragma omp parallel for schedule(static) collapse(2)
  for (int x = 0; x < nx; ++x)
    for (int i = 0; i < bt.grid.size(); ++i) {
      double tr = 0;
      for (const auto& b : u.slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)])
        tr += b.trace().real();
      node_trace[static_cast<size_t>(x) * bt.grid.size() + i] = tr;
    }

  for (int x = 0; x < nx; ++x) {
    double nx_acc = 0;
    for (int i = 0; i < bt.grid.size(); ++i) {
      const double w = bt.grid.weights[static_cast<size_t>(i)];
      nx_acc += w * node_trace[static_cast<size_t>(x) * bt.grid.size() + i];
      const auto& blocks = u.slices[static_cast<size_t>(x)].blocks[static_cast<size_t>(i)];
      const auto& groups = bt.at[static_cast<size_t>(i)].groups;
      for (size_t g = 0; g < blocks.size(); ++g) {
        obs.current += (wx * w * blocks[g].trace().real()) * ctx.velocity[static_cast<size_t>(i)][g];
        for (int a = 0; a < groups[g].size; ++a)
          obs.band_population[groups[g].first_band + a] += wx * w * blocks[g](a, a).real();
      }
    }
    obs.density[x] = nx_acc;
    obs.total_trace += wx * nx_acc;
  }
  return obs;
}

}  // namespace brte
