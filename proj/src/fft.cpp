#include "brte/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace brte {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft1d::Fft1d(int n) : n_(n), buf_(n) {
  if (n < 1) throw Error("Fft1d: size must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* in = reinterpret_cast<fftw_complex*>(buf_.data());
  plan_fwd_ = fftw_plan_dft_1d(n, in, in, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_1d(n, in, in, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw Error("Fft1d: plan creation failed");
}

Fft1d::~Fft1d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Fft1d::forward(Eigen::VectorXcd& v) const {
  if (static_cast<int>(v.size()) != n_) throw Error("Fft1d: size mismatch");
  buf_ = v;
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  v = buf_;
}

void Fft1d::inverse(Eigen::VectorXcd& v) const {
  if (static_cast<int>(v.size()) != n_) throw Error("Fft1d: size mismatch");
  buf_ = v;
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  v = buf_ / static_cast<double>(n_);
}

}  // namespace brte
