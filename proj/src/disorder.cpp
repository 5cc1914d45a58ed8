#include "brte/disorder.hpp"

#include <cmath>

namespace brte {

CorrelationKind correlation_kind_from_string(const std::string& s) {
  if (s == "gaussian") return CorrelationKind::gaussian;
  if (s == "exponential") return CorrelationKind::exponential;
  if (s == "white_cutoff") return CorrelationKind::white_cutoff;
  throw Error("unknown correlation model '" + s + "'");
}

std::string to_string(CorrelationKind k) {
  switch (k) {
    case CorrelationKind::gaussian: return "gaussian";
    case CorrelationKind::exponential: return "exponential";
    case CorrelationKind::white_cutoff: return "white_cutoff";
  }
  return "?";
}

namespace {

double ball_volume(int d, double r) {
  switch (d) {
    case 1: return 2.0 * r;
    case 2: return pi * r * r;
    default: return 4.0 / 3.0 * pi * r * r * r;
  }
}

// Fourier transform of exp(-|x|/l): c_d l^d (1 + k^2 l^2)^{-(d+1)/2}
double exponential_prefactor(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    default: return 8.0 * pi;
  }
}

}  // namespace

double CorrelationModel::spectrum_abs(double kmag) const {
  const double l = corr_length;
  switch (kind) {
    case CorrelationKind::gaussian:
      return sigma2 * std::pow(two_pi * l * l, 0.5 * dim) * std::exp(-0.5 * kmag * kmag * l * l);
    case CorrelationKind::exponential: {
      const double u = 1.0 + kmag * kmag * l * l;
      return sigma2 * exponential_prefactor(dim) * std::pow(l, dim) * std::pow(u, -0.5 * (dim + 1));
    }
    case CorrelationKind::white_cutoff: {
      if (cutoff <= 0) throw Error("white_cutoff model needs a positive cutoff");
      const double s0 = sigma2 * std::pow(two_pi, dim) / ball_volume(dim, cutoff);
      return kmag <= cutoff ? s0 : 0.0;
    }
  }
  return 0.0;
}

double CorrelationModel::correlation_abs(double xmag) const {
  const double l = corr_length;
  switch (kind) {
    case CorrelationKind::gaussian:
      return sigma2 * std::exp(-0.5 * xmag * xmag / (l * l));
    case CorrelationKind::exponential:
      return sigma2 * std::exp(-xmag / l);
    case CorrelationKind::white_cutoff: {
      if (dim != 1) throw Error("white_cutoff correlation implemented in 1D only");
      if (xmag == 0.0) return sigma2;
      return sigma2 * std::sin(cutoff * xmag) / (cutoff * xmag);
    }
  }
  return 0.0;
}

std::vector<double> sample_realization(const CorrelationModel& model, double domain_length, int n,
                                       uint64_t seed) {
  if (model.dim != 1) throw Error("sample_realization: 1D fields only");
  if (n < 2) throw Error("sample_realization: need at least 2 grid points");
  if (domain_length < 8.0 * model.corr_length)
    throw Error("sample_realization: domain shorter than 8 correlation lengths (" +
                format_double(domain_length) + " < " + format_double(8.0 * model.corr_length) + ")");

  std::vector<double> field(static_cast<size_t>(n), 0.0);
  if (model.sigma2 == 0.0) return field;

  const double dk = two_pi / domain_length;
  const CounterRng rng(seed);
  const int n_half = n / 2;

  // V(x) = sum_j c_j (a_j cos k_j x + b_j sin k_j x) reproducing
  // <V V> = (1/pi) int_0^inf R~(k) cos(k r) dk on the discrete modes.
  for (int j = 0; j <= n_half; ++j) {
    const double k = j * dk;
    const double weight = (j == 0 || (j == n_half && n % 2 == 0)) ? dk / two_pi : dk / pi;
    const double amp = std::sqrt(model.spectrum_abs(k) * weight);
    if (amp == 0.0) continue;
    double g0, g1;
    rng.normal_pair(static_cast<uint64_t>(j), g0, g1);
    const cplx rot = std::polar(1.0, k * domain_length / n);
    cplx z{1.0, 0.0};
    for (int i = 0; i < n; ++i) {
      field[static_cast<size_t>(i)] += amp * (g0 * z.real() + g1 * z.imag());
      z *= rot;
    }
  }
  return field;
}

}  // namespace brte
