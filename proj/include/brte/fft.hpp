#pragma once

#include <Eigen/Dense>

#include "brte/util.hpp"

namespace brte {

/// 1D complex FFT pair for a fixed size. Plan creation is serialized
/// internally; execution is safe from concurrent instances.
class Fft1d {
 public:
  explicit Fft1d(int n);
  ~Fft1d();
  Fft1d(const Fft1d&) = delete;
  Fft1d& operator=(const Fft1d&) = delete;

  int size() const { return n_; }
  /// In-place, unnormalized: X_k = sum_j x_j e^{-2 pi i j k / n}.
  void forward(Eigen::VectorXcd& v) const;
  /// In-place, normalized inverse of forward().
  void inverse(Eigen::VectorXcd& v) const;

 private:
  int n_ = 0;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
  mutable Eigen::VectorXcd buf_;
};

}  // namespace brte
