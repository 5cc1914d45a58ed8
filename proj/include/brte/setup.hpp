#pragma once

#include <memory>

#include "brte/config.hpp"

namespace brte {

/// Everything a run needs, built lazily from a parsed configuration.
struct RunSetup {
  RunConfig cfg;
  LatticeSpec lattice;
  PlaneWaveBasis basis;
  BZGrid grid;
  FieldConfig fields;

  std::shared_ptr<const BandTable> bands;
  std::shared_ptr<const CouplingTensor> coupling;
  std::shared_ptr<const ScatteringKernel> kernel;

  static RunSetup geometry_only(RunConfig cfg);
  void build_bands();
  void build_coupling();
  void build_kernel();
  std::vector<IVec> window() const;
};

DistributionField build_initial_field(const RunSetup& setup, const SpatialGrid& xgrid,
                                      const InitialCondition& init);

TransportContext build_transport_context(const RunSetup& setup, const TransportOptions& opt);

/// Rebuild hook for drifting A(t): re-solves bands, coupling, kernel and the
/// context coefficients at the sampled potential. The setup must outlive the
/// evolve call.
std::function<void(TransportContext&, const CellVectorPotential&)> make_rebuild_hook(
    RunSetup& setup, TransportOptions opt);

}  // namespace brte
