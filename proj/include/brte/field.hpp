#pragma once

#include <vector>

#include "brte/bloch.hpp"

namespace brte {

/// Coherence blocks on the BZ grid at one spatial node: blocks[i][g] is the
/// Hermitian r_g x r_g matrix of band group g at grid point i.
struct FieldSlice {
  std::vector<std::vector<Eigen::MatrixXcd>> blocks;

  static FieldSlice zeros(const BandTable& bands);

  void add_scaled(const FieldSlice& other, double a);
  void scale(double a);
  double max_abs() const;
  double max_hermiticity_residual() const;
  void symmetrize();
  bool all_finite() const;
};

}  // namespace brte
