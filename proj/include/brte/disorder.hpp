#pragma once

#include <string>
#include <vector>

#include "brte/lattice.hpp"

namespace brte {

enum class CorrelationKind { gaussian, exponential, white_cutoff };

CorrelationKind correlation_kind_from_string(const std::string& s);
std::string to_string(CorrelationKind k);

/// Stationary random-potential statistics: correlation R(x) and power
/// spectrum R~(k), nonnegative and even by construction.
struct CorrelationModel {
  CorrelationKind kind = CorrelationKind::gaussian;
  int dim = 1;
  double sigma2 = 0.0;       // R(0), energy^2
  double corr_length = 1.0;  // length
  double cutoff = 0.0;       // white model: spectral support |k| <= cutoff

  double spectrum(const RVec& k) const { return spectrum_abs(k.norm()); }
  double spectrum_abs(double kmag) const;
  /// Closed-form R(|x|). The white model is available in 1D only.
  double correlation_abs(double xmag) const;
};

/// Spectral synthesis of a 1D stationary Gaussian field on a periodic grid of
/// n points spanning domain_length. Deterministic per seed (counter RNG).
std::vector<double> sample_realization(const CorrelationModel& model, double domain_length, int n,
                                       uint64_t seed);

}  // namespace brte
