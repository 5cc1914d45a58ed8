#include "brte/field.hpp"

#include <cmath>

namespace brte {

FieldSlice FieldSlice::zeros(const BandTable& bands) {
  FieldSlice s;
  s.blocks.resize(static_cast<size_t>(bands.grid.size()));
  for (int i = 0; i < bands.grid.size(); ++i) {
    const auto& groups = bands.at[static_cast<size_t>(i)].groups;
    s.blocks[static_cast<size_t>(i)].reserve(groups.size());
    for (const auto& g : groups)
      s.blocks[static_cast<size_t>(i)].push_back(Eigen::MatrixXcd::Zero(g.size, g.size));
  }
  return s;
}

void FieldSlice::add_scaled(const FieldSlice& other, double a) {
  for (size_t i = 0; i < blocks.size(); ++i)
    for (size_t g = 0; g < blocks[i].size(); ++g) blocks[i][g] += a * other.blocks[i][g];
}

void FieldSlice::scale(double a) {
  for (auto& row : blocks)
    for (auto& b : row) b *= a;
}

double FieldSlice::max_abs() const {
  double m = 0;
  for (const auto& row : blocks)
    for (const auto& b : row) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double FieldSlice::max_hermiticity_residual() const {
  double m = 0;
  for (const auto& row : blocks)
    for (const auto& b : row) m = std::max(m, (b - b.adjoint().eval()).cwiseAbs().maxCoeff());
  return m;
}

void FieldSlice::symmetrize() {
  for (auto& row : blocks)
    for (auto& b : row) b = 0.5 * (b + b.adjoint().eval());
}

bool FieldSlice::all_finite() const {
  for (const auto& row : blocks)
    for (const auto& b : row)
      if (!b.allFinite()) return false;
  return true;
}

}  // namespace brte
