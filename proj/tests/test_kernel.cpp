#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brte/kernel.hpp"
#include "brte/reference.hpp"

using namespace brte;

namespace {

struct DeskKernel {
  LatticeSpec lat;
  PlaneWaveBasis basis;
  std::shared_ptr<BandTable> bands;
  std::shared_ptr<CouplingTensor> coupling;
  CorrelationModel model;
  std::vector<IVec> window;
};

DeskKernel make_desk(int nq, double u1, double sigma2, double corr_length, int n_bands,
                     double pw_cut = 6.2, double window_cut = 6.2) {
  DeskKernel d;
  d.lat = build_lattice(1, {RVec::Constant(1, 1.0)});
  d.basis = PlaneWaveBasis::make(d.lat, pw_cut * two_pi);
  PeriodicPotential u;
  if (u1 != 0) u.set(IVec{1, 0, 0}, cplx{u1, 0.0});
  const auto a = CellVectorPotential::zero(1);
  d.bands = std::make_shared<BandTable>(
      BandTable::solve(BZGrid::uniform(d.lat, nq), d.basis, u, a, n_bands));
  d.window = dual_window(d.lat, window_cut * two_pi);
  d.coupling = std::make_shared<CouplingTensor>(CouplingTensor::build(*d.bands, d.window));
  d.model.kind = CorrelationKind::gaussian;
  d.model.dim = 1;
  d.model.sigma2 = sigma2;
  d.model.corr_length = corr_length;
  return d;
}

FieldSlice random_hermitian_slice(const BandTable& bands, uint64_t seed) {
  FieldSlice s = FieldSlice::zeros(bands);
  const CounterRng rng(seed);
  uint64_t ctr = 0;
  for (auto& row : s.blocks)
    for (auto& b : row) {
      for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c) b(r, c) = cplx{rng.uniform(ctr++), rng.uniform(ctr++)};
      b = (0.5 * (b + b.adjoint().eval())).eval();
    }
  return s;
}

}  // namespace

TEST_CASE("zero disorder gives an identically zero kernel") {
  auto d = make_desk(16, 0.15, 0.0, 1.0, 2);
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, {});
  for (const auto& row : ker.gamma)
    for (const auto& g : row) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  const auto out = apply_gain(ker, random_hermitian_slice(*d.bands, 1));
  CHECK(out.max_abs() == 0.0);
}

TEST_CASE("free-band gain entries live on the elastic shell") {
  auto d = make_desk(64, 0.0, 1e-3, 1.0, 1, 3.2, 1.2);
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, {});
  for (int i = 0; i < d.bands->grid.size(); ++i) {
    const double ei = d.bands->at[static_cast<size_t>(i)].energies[0];
    for (const auto& e : ker.rows[static_cast<size_t>(i)][0]) {
      const double ek = d.bands->at[static_cast<size_t>(e.k)].energies[0];
      CHECK(std::abs(ei - ek) <= 8.0 * ker.eta_E);
    }
  }
}

TEST_CASE("auto broadening is 4 x median adjacent energy gap") {
  auto d = make_desk(32, 0.15, 1e-3, 1.0, 2);
  std::vector<double> gaps;
  for (int i = 0; i < d.bands->grid.size(); ++i) {
    const int j = d.bands->grid.neighbor(i, 0, 1);
    for (int b = 0; b < 2; ++b)
      gaps.push_back(std::abs(d.bands->at[static_cast<size_t>(j)].energies[b] -
                              d.bands->at[static_cast<size_t>(i)].energies[b]));
  }
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  CHECK(auto_broadening(*d.bands) == doctest::Approx(4.0 * gaps[gaps.size() / 2]));
}

TEST_CASE("explicit grids demand an explicit broadening") {
  auto d = make_desk(8, 0.0, 1e-3, 1.0, 1);
  RVec qa(1), qb(1);
  qa << 0.5;
  qb << -0.5;
  const auto grid = BZGrid::from_points(d.lat, {qa, qb}, {pi, pi});
  const auto a = CellVectorPotential::zero(1);
  auto bands = std::make_shared<BandTable>(
      BandTable::solve(grid, d.basis, PeriodicPotential{}, a, 1));
  auto coupling = std::make_shared<CouplingTensor>(CouplingTensor::build(*bands, d.window));
  CHECK_THROWS_AS(assemble_kernel(bands, coupling, d.model, {}), Error);
}

TEST_CASE("two-band loss matches the dense-quadrature golden rule") {
  auto d = make_desk(48, 0.15, 2e-3, 0.8, 2);
  KernelOptions opt;
  opt.convention = SpectrumArgConvention::paper_literal;
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
  for (int i : {2, 19}) {
    for (int g = 0; g < 2; ++g) {
      const auto ref = reference::gamma_golden_rule(*d.bands, i, g, d.model, ker.xi,
                                                    opt.convention, d.window);
      const auto& fast = ker.gamma[static_cast<size_t>(i)][static_cast<size_t>(g)];
      CHECK((fast - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("scalar loss equals the integrated gain row") {
  auto d = make_desk(48, 0.15, 2e-3, 0.8, 2);
  for (auto conv : {SpectrumArgConvention::paper_literal, SpectrumArgConvention::momentum_transfer}) {
    KernelOptions opt;
    opt.convention = conv;
    const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
    REQUIRE(ker.all_scalar());
    for (int i = 0; i < d.bands->grid.size(); ++i)
      for (size_t g = 0; g < ker.gamma[static_cast<size_t>(i)].size(); ++g) {
        double row = 0;
        for (const auto& e : ker.rows[static_cast<size_t>(i)][g]) row += e.scalar_weight;
        const double gamma = ker.gamma[static_cast<size_t>(i)][g](0, 0).real();
        CHECK(std::abs(row - gamma) <= 1e-6 * gamma);
      }
  }
}

TEST_CASE("detailed balance holds entrywise under momentum transfer") {
  auto d = make_desk(32, 0.15, 2e-3, 0.8, 2);
  KernelOptions opt;
  opt.convention = SpectrumArgConvention::momentum_transfer;
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
  for (int i = 0; i < d.bands->grid.size(); ++i)
    for (size_t g = 0; g < ker.rows[static_cast<size_t>(i)].size(); ++g)
      for (const auto& e : ker.rows[static_cast<size_t>(i)][g]) {
        // find the reverse entry (e.k, e.m_group) -> (i, g)
        bool found = false;
        for (const auto& rev : ker.rows[static_cast<size_t>(e.k)][static_cast<size_t>(e.m_group)])
          if (rev.k == i && rev.m_group == static_cast<int>(g)) {
            CHECK(std::abs(rev.scalar_weight - e.scalar_weight) <=
                  1e-14 * std::max(1e-300, e.scalar_weight));
            found = true;
          }
        CHECK(found);
      }
}

TEST_CASE("conventions differ for correlated disorder") {
  auto d = make_desk(32, 0.15, 2e-3, 1.0, 1);
  KernelOptions lit, mt;
  lit.convention = SpectrumArgConvention::paper_literal;
  mt.convention = SpectrumArgConvention::momentum_transfer;
  const auto klit = assemble_kernel(d.bands, d.coupling, d.model, lit);
  const auto kmt = assemble_kernel(d.bands, d.coupling, d.model, mt);
  double max_rel = 0;
  for (int i = 0; i < d.bands->grid.size(); ++i) {
    const double a = klit.gamma[static_cast<size_t>(i)][0](0, 0).real();
    const double b = kmt.gamma[static_cast<size_t>(i)][0](0, 0).real();
    if (b > 0) max_rel = std::max(max_rel, std::abs(a - b) / b);
  }
  CHECK(max_rel > 0.01);
}

TEST_CASE("gain of zero is zero; Hermiticity preserved; PSD preserved") {
  auto d = make_desk(24, 0.15, 2e-3, 0.8, 2);
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, {});
  SUBCASE("zero in, zero out") {
    const auto out = apply_gain(ker, FieldSlice::zeros(*d.bands));
    CHECK(out.max_abs() == 0.0);
  }
  SUBCASE("Hermitian in, Hermitian out") {
    const auto out = apply_gain(ker, random_hermitian_slice(*d.bands, 5));
    CHECK(out.max_hermiticity_residual() < 1e-14);
  }
  SUBCASE("positive semidefinite in, positive semidefinite out") {
    FieldSlice u = random_hermitian_slice(*d.bands, 9);
    for (auto& row : u.blocks)
      for (auto& b : row) b = (b * b.adjoint()).eval();  // PSD
    const auto out = apply_gain(ker, u);
    for (const auto& row : out.blocks)
      for (const auto& b : row) {
        if (b.rows() == 1) {
          CHECK(b(0, 0).real() >= -1e-14);
        } else {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b, Eigen::EigenvaluesOnly);
          CHECK(es.eigenvalues().minCoeff() >= -1e-12 * b.cwiseAbs().maxCoeff());
        }
      }
  }
}

TEST_CASE("gain on a shell-uniform population approximates Gamma times the value") {
  auto d = make_desk(96, 0.0, 1e-3, 1.0, 1, 3.2, 1.2);
  KernelOptions opt;
  opt.convention = SpectrumArgConvention::momentum_transfer;
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);

  // occupy one elastic shell uniformly
  const double e0 = d.bands->at[12].energies[0];
  FieldSlice u = FieldSlice::zeros(*d.bands);
  for (int i = 0; i < d.bands->grid.size(); ++i)
    if (std::abs(d.bands->at[static_cast<size_t>(i)].energies[0] - e0) < 3.0 * ker.eta_E)
      u.blocks[static_cast<size_t>(i)][0](0, 0) = 0.7;

  const auto gain = apply_gain(ker, u);
  for (int i = 0; i < d.bands->grid.size(); ++i) {
    if (std::abs(d.bands->at[static_cast<size_t>(i)].energies[0] - e0) > 0.5 * ker.eta_E) continue;
    const double got = gain.blocks[static_cast<size_t>(i)][0](0, 0).real();
    const double want = ker.gamma[static_cast<size_t>(i)][0](0, 0).real() * 0.7;
    CHECK(std::abs(got - want) / want < 0.05);
  }
}

TEST_CASE("apply_gain agrees with the direct-sum reference") {
  auto d = make_desk(16, 0.15, 2e-3, 0.8, 2);
  KernelOptions opt;
  opt.convention = SpectrumArgConvention::momentum_transfer;
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
  const auto u = random_hermitian_slice(*d.bands, 21);
  const auto fast = apply_gain(ker, u);
  const auto slow = reference::apply_gain_direct(*d.bands, u, d.model, ker.eta_E, opt.convention,
                                                 d.window);
  double worst = 0;
  for (size_t i = 0; i < fast.blocks.size(); ++i)
    for (size_t g = 0; g < fast.blocks[i].size(); ++g)
      worst = std::max(worst, (fast.blocks[i][g] - slow.blocks[i][g]).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-10 * slow.max_abs());
}

TEST_CASE("loss is the anticommutator plus a traceless shift") {
  auto d = make_desk(24, 0.15, 2e-3, 0.8, 2);
  KernelOptions opt;
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
  const auto u = random_hermitian_slice(*d.bands, 33);
  const auto loss = apply_loss(ker, u);
  SUBCASE("scalar case reduces to Gamma u") {
    for (int i = 0; i < d.bands->grid.size(); ++i)
      for (size_t g = 0; g < loss.blocks[static_cast<size_t>(i)].size(); ++g) {
        const cplx got = loss.blocks[static_cast<size_t>(i)][g](0, 0);
        const cplx want = ker.gamma[static_cast<size_t>(i)][g](0, 0) *
                          u.blocks[static_cast<size_t>(i)][g](0, 0);
        CHECK(std::abs(got - want) < 1e-14 * std::max(1.0, std::abs(want)));
      }
  }
  SUBCASE("Gamma is PSD and the shift Hermitian") {
    for (int i = 0; i < d.bands->grid.size(); ++i)
      for (size_t g = 0; g < ker.gamma[static_cast<size_t>(i)].size(); ++g) {
        CHECK(ker.gamma[static_cast<size_t>(i)][g](0, 0).real() >= 0.0);
        CHECK(std::abs(ker.gamma[static_cast<size_t>(i)][g](0, 0).imag()) < 1e-16);
        CHECK(std::abs(ker.shift[static_cast<size_t>(i)][g](0, 0).imag()) < 1e-16);
      }
  }
}

TEST_CASE("collision operator conserves the total trace (scalar, momentum transfer)") {
  auto d = make_desk(48, 0.15, 2e-3, 0.8, 2);
  KernelOptions opt;
  opt.convention = SpectrumArgConvention::momentum_transfer;
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
  const auto u = random_hermitian_slice(*d.bands, 77);
  const auto gain = apply_gain(ker, u);
  const auto loss = apply_loss(ker, u);
  double rate = 0, scale = 0;
  for (int i = 0; i < d.bands->grid.size(); ++i) {
    const double w = d.bands->grid.weights[static_cast<size_t>(i)];
    for (size_t g = 0; g < gain.blocks[static_cast<size_t>(i)].size(); ++g) {
      rate += w * (gain.blocks[static_cast<size_t>(i)][g](0, 0).real() -
                   loss.blocks[static_cast<size_t>(i)][g](0, 0).real());
      scale += w * std::abs(loss.blocks[static_cast<size_t>(i)][g](0, 0).real());
    }
  }
  CHECK(std::abs(rate) < 1e-8 * scale);
}

TEST_CASE("kernel entries converge under grid refinement with auto broadening") {
  // Gamma at a fixed q present on every refinement, far from band-edge shells
  // so the broadened integral is in its asymptotic regime
  std::vector<double> gammas;
  for (int nq : {64, 128, 256, 512}) {
    auto d = make_desk(nq, 0.15, 2e-3, 0.8, 1, 4.2, 1.2);
    KernelOptions opt;
    opt.convention = SpectrumArgConvention::momentum_transfer;
    const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
    const int idx = nq / 16 * 5;  // q = 2 pi (5/16) on every grid
    CHECK(std::abs(d.bands->grid.points[static_cast<size_t>(idx)][0] - two_pi * 5 / 16) < 1e-12);
    gammas.push_back(ker.gamma[static_cast<size_t>(idx)][0](0, 0).real());
  }
  std::vector<double> diffs;
  for (size_t i = 0; i + 1 < gammas.size(); ++i) diffs.push_back(std::abs(gammas[i + 1] - gammas[i]));
  CHECK(diffs[1] < diffs[0]);
  CHECK(diffs[2] < diffs[1]);
}

TEST_CASE("2D square lattice kernel conserves the trace and balances loss with gain") {
  RVec e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  const auto lat = build_lattice(2, {e1, e2});
  const auto basis = PlaneWaveBasis::make(lat, 1.2 * two_pi);
  const auto a = CellVectorPotential::zero(2);
  PeriodicPotential u;
  u.set(IVec{1, 0, 0}, cplx{0.2, 0.0});
  u.set(IVec{0, 1, 0}, cplx{0.2, 0.0});
  auto bands = std::make_shared<BandTable>(
      BandTable::solve(BZGrid::uniform(lat, 8), basis, u, a, 1));
  auto coupling = std::make_shared<CouplingTensor>(
      CouplingTensor::build(*bands, dual_window(lat, 1.2 * two_pi)));
  CorrelationModel model;
  model.kind = CorrelationKind::gaussian;
  model.dim = 2;
  model.sigma2 = 1e-2;
  model.corr_length = 0.6;
  KernelOptions opt;
  opt.convention = SpectrumArgConvention::momentum_transfer;
  const auto ker = assemble_kernel(bands, coupling, model, opt);

  const auto uf = random_hermitian_slice(*bands, 3);
  const auto gain = apply_gain(ker, uf);
  const auto loss = apply_loss(ker, uf);
  double rate = 0, scale = 0;
  for (int i = 0; i < bands->grid.size(); ++i) {
    const double w = bands->grid.weights[static_cast<size_t>(i)];
    rate += w * (gain.blocks[static_cast<size_t>(i)][0](0, 0).real() -
                 loss.blocks[static_cast<size_t>(i)][0](0, 0).real());
    scale += w * std::abs(loss.blocks[static_cast<size_t>(i)][0](0, 0).real());
  }
  CHECK(std::abs(rate) < 1e-8 * scale);

  for (int i = 0; i < bands->grid.size(); ++i) {
    double row = 0;
    for (const auto& e : ker.rows[static_cast<size_t>(i)][0]) row += e.scalar_weight;
    const double gamma = ker.gamma[static_cast<size_t>(i)][0](0, 0).real();
    CHECK(std::abs(row - gamma) <= 1e-6 * gamma);
  }
}

TEST_CASE("empty shells raise the warning counter") {
  auto d = make_desk(8, 0.0, 1e-3, 1.0, 1, 3.2, 1.2);
  KernelOptions opt;
  opt.eta_E = 1e-6;  // far below the grid's energy resolution
  opt.xi = 1e-6;
  const auto ker = assemble_kernel(d.bands, d.coupling, d.model, opt);
  CHECK(ker.empty_shell_warnings > 0);
}
