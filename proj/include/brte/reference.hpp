#pragma once

#include "brte/kernel.hpp"

namespace brte::reference {

/// Coupling block by direct cell quadrature of the defining integral on an
/// oversampled z grid. Independent of the coefficient-space reduction.
Eigen::MatrixXcd coupling_block_quadrature(const BandSolution& at_q, const BandSolution& at_qp,
                                           const IVec& mu_offset, const PlaneWaveBasis& basis,
                                           int oversample = 4);

/// Golden-rule loss block by plain dense sums, with T recomputed by
/// quadrature. Serial on purpose.
Eigen::MatrixXcd gamma_golden_rule(const BandTable& bands, int grid_i, int group,
                                   const CorrelationModel& model, double eta,
                                   SpectrumArgConvention convention,
                                   const std::vector<IVec>& window);

/// Gain application by direct sums over the defining formula, serial,
/// T recomputed by quadrature.
FieldSlice apply_gain_direct(const BandTable& bands, const FieldSlice& u,
                             const CorrelationModel& model, double eta,
                             SpectrumArgConvention convention, const std::vector<IVec>& window);

}  // namespace brte::reference
