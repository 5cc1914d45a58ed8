#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "brte/kernel.hpp"

namespace brte {

/// Periodic spatial box (n = 1 means homogeneous, no x dependence).
struct SpatialGrid {
  int n = 1;
  double length = 1.0;
  bool homogeneous() const { return n <= 1; }
  double dx() const { return length / n; }
  double node_weight() const { return homogeneous() ? 1.0 : dx(); }
};

struct DistributionField {
  double time = 0.0;
  SpatialGrid xgrid;
  std::vector<FieldSlice> slices;  // one per x node

  static DistributionField zeros(const SpatialGrid& xg, const BandTable& bands);

  void add_scaled(const DistributionField& other, double a);
  double max_hermiticity_residual() const;
  void symmetrize();
  bool all_finite() const;
};

/// Uniform fields or an explicit vector-potential protocol,
/// A_uniform(t) = a_static.uniform - E t.
struct FieldConfig {
  RVec e_uniform;
  RVec b_uniform;
  CellVectorPotential a_static;

  static FieldConfig none(int dim);
  CellVectorPotential a_at(double t) const;
  bool time_dependent() const { return e_uniform.size() > 0 && e_uniform.norm() > 0; }
};

enum class Stencil { upwind, centered };
enum class TimeMethod { rk4, euler };

struct TransportOptions {
  bool advection = true;
  bool collisions = true;
  bool lorentz = true;
  Stencil stencil = Stencil::upwind;
};

struct TransportContext {
  std::shared_ptr<const BandTable> bands;
  std::shared_ptr<const ScatteringKernel> kernel;  // null if collisions disabled
  std::vector<std::vector<Eigen::MatrixXcd>> lorentz;  // [i][group]; empty if unused
  std::vector<std::vector<RVec>> velocity;             // [i][group] group-mean velocity
  TransportOptions opt;
  FieldConfig fields;

  static TransportContext build(std::shared_ptr<const BandTable> bands,
                                std::shared_ptr<const ScatteringKernel> kernel,
                                const FieldConfig& fields, const TransportOptions& opt);
  double max_velocity() const;
};

DistributionField rte_rhs(const DistributionField& u, const TransportContext& ctx);

struct EvolveOptions {
  double dt = 0.0;
  double t_final = 0.0;
  TimeMethod method = TimeMethod::rk4;
  int snapshot_every = 0;  // 0: first and last only
  bool allow_cfl_violation = false;
  /// Rebuild hook fired when |A_uniform(t) - A_built| exceeds the threshold.
  double rebuild_threshold = -1.0;
  std::function<void(TransportContext&, const CellVectorPotential&)> rebuild;
};

struct EvolveDiagnostics {
  double max_herm_residual = 0.0;    // before per-step re-symmetrization
  double max_lorentz_trace = 0.0;    // pairwise commutator trace, stays exactly 0
  double min_block_eigenvalue = 0.0; // most negative eigenvalue seen at snapshots
  bool cfl_warned = false;
  long steps = 0;
  int rebuilds = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DistributionField> snapshots;
  EvolveDiagnostics diag;
};

Trajectory evolve(const DistributionField& u0, TransportContext& ctx, const EvolveOptions& opt);

struct Observables {
  double total_trace = 0.0;              // N
  Eigen::VectorXd band_population;       // per band, diagonal occupation
  RVec current;                          // sum_j tr(u_j) v_j integrated
  Eigen::VectorXd density;               // n(x)
};

Observables observables(const DistributionField& u, const TransportContext& ctx);

}  // namespace brte
