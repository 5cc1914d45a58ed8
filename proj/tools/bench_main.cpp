// Timing comparison of the OpenMP kernels against single-thread runs and the
// direct-sum reference implementations.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "brte/reference.hpp"
#include "brte/setup.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace brte;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel timing of the transport kernels"};
  int nq = 64;
  int n_bands = 2;
  int repeats = 3;
  bool quick = false;
  app.add_option("--nq", nq, "BZ grid points");
  app.add_option("--bands", n_bands, "bands");
  app.add_option("--repeats", repeats, "repetitions per measurement");
  app.add_flag("--quick", quick, "small smoke-test sizes");
  CLI11_PARSE(app, argc, argv);
  if (quick) {
    nq = 16;
    repeats = 1;
  }

  int max_threads = 1;
#ifdef _OPENMP
  max_threads = omp_get_max_threads();
#endif

  const auto lat = build_lattice(1, {RVec::Constant(1, 1.0)});
  const auto basis = PlaneWaveBasis::make(lat, 10.2 * lat.dual(0, 0));
  PeriodicPotential u;
  u.set(IVec{1, 0, 0}, cplx{0.15, 0.0});
  const auto a0 = CellVectorPotential::zero(1);

  CorrelationModel model;
  model.dim = 1;
  model.sigma2 = 1e-3;
  model.corr_length = 1.0;

  std::cout << "nq = " << nq << ", bands = " << n_bands << ", N_pw = " << basis.size()
            << ", threads = 1 vs " << max_threads << "\n\n";
  std::cout << "kernel                     serial ms   parallel ms   speedup\n";

  const auto grid = BZGrid::uniform(lat, nq);

  auto bench = [&](const char* name, const std::function<void()>& fn) {
    set_threads(1);
    const double t1 = time_ms(fn, repeats);
    set_threads(max_threads);
    const double tn = time_ms(fn, repeats);
    std::printf("%-26s %9.2f    %9.2f    %6.2fx\n", name, t1, tn, t1 / tn);
  };

  std::shared_ptr<BandTable> bands;
  bench("band table solve", [&] {
    bands = std::make_shared<BandTable>(BandTable::solve(grid, basis, u, a0, n_bands));
  });

  const auto window = dual_window(lat, 10.2 * lat.dual(0, 0));
  std::shared_ptr<CouplingTensor> coupling;
  bench("coupling tensor build", [&] {
    coupling = std::make_shared<CouplingTensor>(CouplingTensor::build(*bands, window));
  });

  KernelOptions kopt;
  kopt.convention = SpectrumArgConvention::momentum_transfer;
  std::shared_ptr<ScatteringKernel> kernel;
  bench("kernel assembly", [&] {
    kernel = std::make_shared<ScatteringKernel>(assemble_kernel(bands, coupling, model, kopt));
  });

  FieldSlice slice = FieldSlice::zeros(*bands);
  for (auto& row : slice.blocks)
    for (auto& b : row) b.setIdentity();
  bench("gain application", [&] { auto out = apply_gain(*kernel, slice); });

  TransportOptions topt;
  topt.advection = false;
  FieldConfig nofields = FieldConfig::none(1);
  auto ctx = TransportContext::build(bands, kernel, nofields, topt);
  SpatialGrid xg{1, 1.0};
  DistributionField uf = DistributionField::zeros(xg, *bands);
  for (auto& s : uf.slices)
    for (auto& row : s.blocks)
      for (auto& b : row) b.setIdentity();
  bench("transport rhs", [&] { auto out = rte_rhs(uf, ctx); });

  // direct-sum reference, serial by construction
  set_threads(1);
  const int ref_nq = std::min(nq, 16);
  const auto ref_grid = BZGrid::uniform(lat, ref_nq);
  const auto ref_bands = BandTable::solve(ref_grid, basis, u, a0, n_bands);
  FieldSlice ref_slice = FieldSlice::zeros(ref_bands);
  for (auto& row : ref_slice.blocks)
    for (auto& b : row) b.setIdentity();
  const double tref = time_ms(
      [&] {
        auto out = reference::apply_gain_direct(ref_bands, ref_slice, model, kernel->eta_E,
                                                kopt.convention, window);
      },
      1);
  std::printf("\nreference gain (direct sums, nq = %d): %.2f ms\n", ref_nq, tref);
  return 0;
}
