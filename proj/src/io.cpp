#include "brte/io.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "binary field output assumes a little-endian host");

namespace brte {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json make_metadata(const RunSetup& setup, const std::string& subcommand) {
  json meta;
  meta["config_hash"] = setup.cfg.content_hash;
  meta["subcommand"] = subcommand;
  meta["dimension"] = setup.lattice.dim;
  meta["bz_points"] = setup.cfg.bz_points;
  meta["n_bands"] = setup.cfg.n_bands;
  meta["plane_waves"] = setup.basis.size();
  meta["units"] = {{"system", setup.cfg.units.system},
                   {"energy_scale", setup.cfg.units.energy},
                   {"length_scale", setup.cfg.units.length},
                   {"time_scale", setup.cfg.units.time}};
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  meta["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  return meta;
}

std::string format_observables(const Trajectory& traj, const TransportContext& ctx,
                               const UnitScales& units) {
  std::string out = "# t\tN\therm_residual";
  const int nb = ctx.bands->n_bands;
  const int dim = ctx.bands->grid.lattice.dim;
  for (int b = 0; b < nb; ++b) out += "\tp_" + std::to_string(b);
  for (int l = 0; l < dim; ++l) out += "\tJ_" + std::to_string(l);
  out += "\n";
  for (size_t s = 0; s < traj.snapshots.size(); ++s) {
    const auto obs = observables(traj.snapshots[s], ctx);
    out += format_double(traj.times[s] * units.time);
    out += "\t" + format_double(obs.total_trace);
    out += "\t" + format_double(traj.diag.max_herm_residual);
    for (int b = 0; b < nb; ++b) out += "\t" + format_double(obs.band_population[b]);
    for (int l = 0; l < dim; ++l)
      out += "\t" + format_double(obs.current[l] * units.length / units.time);
    out += "\n";
  }
  return out;
}

std::string format_density(const Trajectory& traj, const TransportContext& ctx,
                           const UnitScales& units) {
  std::string out = "# t then n(x) per node\n";
  for (size_t s = 0; s < traj.snapshots.size(); ++s) {
    const auto obs = observables(traj.snapshots[s], ctx);
    out += format_double(traj.times[s] * units.time);
    for (int x = 0; x < obs.density.size(); ++x) out += "\t" + format_double(obs.density[x]);
    out += "\n";
  }
  return out;
}

void write_fields_binary(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& field : traj.snapshots) {
    size_t max_groups = 0;
    for (const auto& row : field.slices[0].blocks) max_groups = std::max(max_groups, row.size());
    for (size_t g = 0; g < max_groups; ++g)
      for (const auto& slice : field.slices)
        for (const auto& row : slice.blocks) {
          if (g >= row.size()) continue;
          const auto& b = row[g];
          for (int r = 0; r < b.rows(); ++r)
            for (int col = 0; col < b.cols(); ++col) {
              const double re = b(r, col).real();
              const double im = b(r, col).imag();
              out.write(reinterpret_cast<const char*>(&re), sizeof(double));
              out.write(reinterpret_cast<const char*>(&im), sizeof(double));
            }
        }
  }
}

std::vector<std::vector<std::vector<std::vector<Eigen::MatrixXcd>>>> read_fields_binary(
    const std::string& path, const BandTable& bands, int nx, int n_snapshots) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  size_t max_groups = 0;
  for (const auto& sol : bands.at) max_groups = std::max(max_groups, sol.groups.size());

  std::vector<std::vector<std::vector<std::vector<Eigen::MatrixXcd>>>> result(
      static_cast<size_t>(n_snapshots));
  for (auto& snap : result) {
    snap.assign(static_cast<size_t>(nx), {});
    for (auto& xs : snap) {
      xs.resize(static_cast<size_t>(bands.grid.size()));
      for (int i = 0; i < bands.grid.size(); ++i)
        for (const auto& grp : bands.at[static_cast<size_t>(i)].groups)
          xs[static_cast<size_t>(i)].push_back(Eigen::MatrixXcd::Zero(grp.size, grp.size));
    }
    for (size_t g = 0; g < max_groups; ++g)
      for (auto& xs : snap)
        for (size_t i = 0; i < xs.size(); ++i) {
          if (g >= xs[i].size()) continue;
          auto& b = xs[i][g];
          for (int r = 0; r < b.rows(); ++r)
            for (int col = 0; col < b.cols(); ++col) {
              double re = 0, im = 0;
              in.read(reinterpret_cast<char*>(&re), sizeof(double));
              in.read(reinterpret_cast<char*>(&im), sizeof(double));
              b(r, col) = cplx{re, im};
            }
        }
  }
  if (!in) throw Error("binary field file '" + path + "' is shorter than the declared layout");
  return result;
}

json fields_layout_metadata(const Trajectory& traj, const BandTable& bands) {
  json layout;
  layout["value_type"] = "float64_le_interleaved_re_im";
  layout["index_order"] = "snapshot > band_group > x > q > matrix_row_major";
  layout["snapshots"] = traj.snapshots.size();
  layout["times"] = traj.times;
  layout["x_nodes"] = traj.snapshots.empty() ? 0 : traj.snapshots[0].slices.size();
  layout["q_nodes"] = bands.grid.size();
  json dims = json::array();
  for (const auto& sol : bands.at) {
    json row = json::array();
    for (const auto& g : sol.groups) row.push_back(g.size);
    dims.push_back(row);
  }
  layout["group_sizes_per_q"] = dims;
  return layout;
}

std::string format_bands_table(const RunSetup& setup) {
  const BandTable& bt = *setup.bands;
  const auto a0 = setup.fields.a_at(0.0);
  std::string out = "# q coordinates, then E_b and v_b per band (v blank for non-scalar groups)\n";
  for (int i = 0; i < bt.grid.size(); ++i) {
    const auto& sol = bt.at[static_cast<size_t>(i)];
    for (int l = 0; l < bt.grid.lattice.dim; ++l) {
      if (l) out += "\t";
      out += format_double(sol.q[l]);
    }
    for (int b = 0; b < bt.n_bands; ++b) {
      out += "\t" + format_double(sol.energies[b] * setup.cfg.units.energy);
      std::string vtxt = "nan";
      try {
        const RVec v = group_velocity(sol, b, a0, bt.basis);
        vtxt = format_double(v[0]);
        for (int l = 1; l < bt.grid.lattice.dim; ++l) vtxt += "," + format_double(v[l]);
      } catch (const Error&) {
      }
      out += "\t" + vtxt;
    }
    out += "\n";
  }
  return out;
}

json bands_report(const RunSetup& setup) {
  const BandTable& bt = *setup.bands;
  json rep;
  rep["config_hash"] = setup.cfg.content_hash;
  rep["n_bands"] = bt.n_bands;
  rep["plane_waves"] = setup.basis.size();

  json orth = json::array();
  const std::vector<int> samples = {0, bt.grid.size() / 3, (2 * bt.grid.size()) / 3};
  for (int i : samples) {
    if (i >= bt.grid.size()) continue;
    const auto r = bloch_orthogonality_check(bt.at[static_cast<size_t>(i)], setup.basis);
    json entry;
    entry["grid_index"] = i;
    entry["max_orthonormality_residual"] = r.max_orthonormality_residual;
    entry["completeness_residual"] = r.completeness_residual;
    orth.push_back(entry);
  }
  rep["orthogonality"] = orth;

  bool truncated = false;
  for (const auto& sol : bt.at) truncated = truncated || sol.truncated_group;
  rep["truncated_degenerate_group"] = truncated;
  return rep;
}

json kernel_report(const RunSetup& setup) {
  const ScatteringKernel& ker = *setup.kernel;
  const BandTable& bt = *setup.bands;
  json rep;
  rep["config_hash"] = setup.cfg.content_hash;
  rep["eta_e"] = ker.eta_E;
  rep["xi"] = ker.xi;
  rep["convention"] = to_string(ker.convention);
  rep["shift_enabled"] = ker.shift_enabled;
  rep["coupling_truncation_events"] = setup.coupling->truncation_events;
  rep["empty_shell_warnings"] = ker.empty_shell_warnings;

  json spectra = json::array();
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0, gsum = 0;
  long count = 0, entries = 0;
  for (int i = 0; i < bt.grid.size(); ++i) {
    json row;
    row["q"] = std::vector<double>(bt.grid.points[static_cast<size_t>(i)].data(),
                                   bt.grid.points[static_cast<size_t>(i)].data() +
                                       bt.grid.lattice.dim);
    json gs = json::array();
    for (size_t g = 0; g < ker.gamma[static_cast<size_t>(i)].size(); ++g) {
      const double val = ker.gamma[static_cast<size_t>(i)][g].trace().real() /
                         static_cast<double>(ker.gamma[static_cast<size_t>(i)][g].rows());
      gs.push_back(val);
      gmin = std::min(gmin, val);
      gmax = std::max(gmax, val);
      gsum += val;
      ++count;
      entries += static_cast<long>(ker.rows[static_cast<size_t>(i)][g].size());
    }
    row["gamma"] = gs;
    spectra.push_back(row);
  }
  rep["gamma_spectra"] = spectra;
  rep["shell_stats"] = {{"gamma_min", gmin},
                        {"gamma_max", gmax},
                        {"gamma_mean", count ? gsum / count : 0.0},
                        {"gain_entries", entries}};
  return rep;
}

json oracle_report(const GoldenRuleStudy& study, const RunSetup& setup) {
  json rep;
  rep["config_hash"] = setup.cfg.content_hash;
  rep["q0"] = study.q0;
  rep["band"] = study.band;
  rep["born_ratio"] = study.born_ratio;
  json runs = json::array();
  for (size_t r = 0; r < study.runs.size(); ++r) {
    const auto& run = study.runs[r];
    json jr;
    jr["sigma2"] = run.sigma2;
    jr["kernel_gamma"] = study.kernel_rate[r];
    jr["mean_rate"] = run.mean_rate;
    jr["stderr"] = run.stderr_mean;
    jr["ratio_to_kernel"] = run.ratio_to_kernel;
    jr["seeds_ok"] = run.n_ok;
    json fits = json::array();
    for (const auto& f : run.fits) {
      json jf;
      jf["seed"] = f.seed;
      jf["ok"] = f.ok;
      if (f.ok) {
        jf["rate"] = f.fit.rate;
        jf["stderr"] = f.fit.rate_stderr;
        jf["r_squared"] = f.fit.r_squared;
        jf["points"] = f.fit.n_points;
        jf["no_decay"] = f.fit.no_decay;
      } else {
        jf["message"] = f.message;
      }
      fits.push_back(jf);
    }
    jr["fits"] = fits;
    runs.push_back(jr);
  }
  rep["runs"] = runs;
  return rep;
}

std::string coupling_cache_key(const RunSetup& setup) {
  json key;
  key["dim"] = setup.lattice.dim;
  std::vector<double> basis_flat;
  for (int c = 0; c < setup.lattice.dim; ++c)
    for (int r = 0; r < setup.lattice.dim; ++r) basis_flat.push_back(setup.lattice.direct(r, c));
  key["basis"] = basis_flat;
  json pot = json::array();
  for (const auto& [mu, v] : setup.cfg.potential.entries())
    pot.push_back({mu[0], mu[1], mu[2], v.real(), v.imag()});
  key["potential"] = pot;
  key["pw_cutoff"] = setup.cfg.pw_cutoff;
  key["n_bands"] = setup.cfg.n_bands;
  key["bz_points"] = setup.cfg.bz_points;
  key["window_radius"] = setup.cfg.window_radius;
  key["a_uniform"] = std::vector<double>(setup.cfg.a_static.uniform.data(),
                                         setup.cfg.a_static.uniform.data() + setup.lattice.dim);
  return hex64(fnv1a64(key.dump()));
}

namespace {
constexpr uint64_t kCacheMagic = 0x62727465636f7570ull;  // "brtecoup"
}

void save_coupling_cache(const std::string& path, const CouplingTensor& t, const std::string& key) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write coupling cache '" + path + "'");
  out.write(reinterpret_cast<const char*>(&kCacheMagic), sizeof(kCacheMagic));
  uint64_t key_hash = fnv1a64(key);
  out.write(reinterpret_cast<const char*>(&key_hash), sizeof(key_hash));
  const int64_t dims[4] = {t.n_grid, t.n_states, static_cast<int64_t>(t.window.size()),
                           t.truncation_events};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (const IVec& w : t.window) out.write(reinterpret_cast<const char*>(w.v.data()), sizeof(int) * 3);
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(cplx)));
}

bool load_coupling_cache(const std::string& path, CouplingTensor& t, const std::string& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  uint64_t magic = 0, key_hash = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  in.read(reinterpret_cast<char*>(&key_hash), sizeof(key_hash));
  if (!in || magic != kCacheMagic || key_hash != fnv1a64(key)) return false;
  int64_t dims[4];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in) return false;
  t.n_grid = static_cast<int>(dims[0]);
  t.n_states = static_cast<int>(dims[1]);
  t.window.resize(static_cast<size_t>(dims[2]));
  t.truncation_events = dims[3];
  for (IVec& w : t.window) in.read(reinterpret_cast<char*>(w.v.data()), sizeof(int) * 3);
  t.data.resize(static_cast<size_t>(dims[0]) * dims[0] * dims[2] * dims[1] * dims[1]);
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(cplx)));
  return static_cast<bool>(in);
}

}  // namespace brte
