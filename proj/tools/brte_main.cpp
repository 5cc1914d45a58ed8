#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "brte/io.hpp"
#include "brte/validation.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace brte;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  int threads = 0;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file (JSON)")->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--set", args.overrides, "override a config entry, e.g. --set kernel.eta_e=0.05");
  cmd->add_option("--threads", args.threads, "OpenMP thread count (0 = library default)");
  cmd->add_option("--seed", args.seed, "override the configured seed");
}

RunConfig load(const CommonArgs& args) {
  auto j = load_json_file(args.config_path);
  for (const auto& ov : args.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + ov + "'");
    apply_override(j, ov.substr(0, eq), ov.substr(eq + 1));
  }
  if (args.seed >= 0) j["seed"] = args.seed;
#ifdef _OPENMP
  if (args.threads > 0) omp_set_num_threads(args.threads);
#endif
  RunConfig cfg = parse_config(j);
  fs::create_directories(args.out_dir);
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (fs::path(args.out_dir) / name).string();
}

int cmd_bands(const CommonArgs& args) {
  RunSetup setup = RunSetup::geometry_only(load(args));
  setup.build_bands();
  write_text_file(out_path(args, "bands.tsv"),
                  "# config " + setup.cfg.content_hash + "\n" + format_bands_table(setup));
  write_json_file(out_path(args, "orthogonality_report.json"), bands_report(setup));
  write_json_file(out_path(args, "metadata.json"), make_metadata(setup, "bands"));
  std::cout << "bands: wrote bands.tsv, orthogonality_report.json\n";
  return 0;
}

int cmd_kernel(const CommonArgs& args, bool use_cache) {
  RunSetup setup = RunSetup::geometry_only(load(args));
  setup.build_bands();
  const std::string key = coupling_cache_key(setup);
  const std::string cache_file = out_path(args, "coupling_cache_" + key + ".bin");
  if (use_cache) {
    auto cached = std::make_shared<CouplingTensor>();
    if (load_coupling_cache(cache_file, *cached, key)) {
      setup.coupling = cached;
      std::cout << "kernel: coupling tensor loaded from cache\n";
    }
  }
  setup.build_kernel();
  if (use_cache && !fs::exists(cache_file))
    save_coupling_cache(cache_file, *setup.coupling, key);
  write_json_file(out_path(args, "kernel_report.json"), kernel_report(setup));
  write_json_file(out_path(args, "metadata.json"), make_metadata(setup, "kernel"));
  std::cout << "kernel: eta_E = " << format_double(setup.kernel->eta_E)
            << ", entries = " << kernel_report(setup)["shell_stats"]["gain_entries"] << "\n";
  return 0;
}

int cmd_evolve(const CommonArgs& args) {
  RunSetup setup = RunSetup::geometry_only(load(args));
  const auto& cfg = setup.cfg;
  if (cfg.evolution.dt <= 0) throw Error("evolve: configuration has no evolution block");
  const bool collisions = cfg.disorder.sigma2 > 0;
  if (collisions) setup.build_kernel();
  else setup.build_bands();

  TransportOptions topt;
  topt.collisions = collisions;
  topt.stencil = cfg.evolution.stencil;
  topt.advection = cfg.spatial_points > 1;
  auto ctx = build_transport_context(setup, topt);

  const SpatialGrid xg{cfg.spatial_points, cfg.box_length};
  auto u0 = build_initial_field(setup, xg, cfg.evolution.initial);

  EvolveOptions eopt;
  eopt.dt = cfg.evolution.dt;
  eopt.t_final = cfg.evolution.t_final;
  eopt.method = cfg.evolution.method;
  eopt.snapshot_every = cfg.evolution.snapshot_every;
  eopt.allow_cfl_violation = cfg.evolution.allow_cfl_violation;
  eopt.rebuild_threshold = cfg.evolution.rebuild_threshold;
  if (eopt.rebuild_threshold >= 0) eopt.rebuild = make_rebuild_hook(setup, topt);
  const auto traj = evolve(u0, ctx, eopt);

  auto meta = make_metadata(setup, "evolve");
  meta["fields_layout"] = fields_layout_metadata(traj, *setup.bands);
  meta["diagnostics"] = {{"max_herm_residual", traj.diag.max_herm_residual},
                         {"max_lorentz_trace", traj.diag.max_lorentz_trace},
                         {"min_block_eigenvalue", traj.diag.min_block_eigenvalue},
                         {"steps", traj.diag.steps},
                         {"cfl_warned", traj.diag.cfl_warned}};
  write_json_file(out_path(args, "metadata.json"), meta);
  write_text_file(out_path(args, "observables.tsv"),
                  "# config " + cfg.content_hash + "\n" +
                      format_observables(traj, ctx, cfg.units));
  write_text_file(out_path(args, "density.tsv"),
                  "# config " + cfg.content_hash + "\n" + format_density(traj, ctx, cfg.units));
  write_fields_binary(out_path(args, "fields.bin"), traj);
  std::cout << "evolve: " << traj.diag.steps << " steps, " << traj.snapshots.size()
            << " snapshots, max Hermiticity residual "
            << format_double(traj.diag.max_herm_residual) << "\n";
  return 0;
}

int cmd_oracle(const CommonArgs& args) {
  RunSetup setup = RunSetup::geometry_only(load(args));
  if (!setup.cfg.has_oracle) throw Error("oracle: configuration has no oracle block");
  const auto study =
      run_golden_rule_study(setup.lattice, setup.cfg.potential, setup.cfg.disorder, setup.cfg.oracle);
  write_json_file(out_path(args, "oracle_report.json"), oracle_report(study, setup));
  write_json_file(out_path(args, "metadata.json"), make_metadata(setup, "oracle"));
  for (size_t r = 0; r < study.runs.size(); ++r)
    std::cout << "oracle: sigma2 = " << format_double(study.runs[r].sigma2)
              << " measured = " << format_double(study.runs[r].mean_rate)
              << " kernel = " << format_double(study.kernel_rate[r])
              << " ratio = " << format_double(study.runs[r].ratio_to_kernel) << "\n";
  return 0;
}

int cmd_validate(const CommonArgs& args) {
  RunConfig cfg = load(args);
  const auto results = run_validation(cfg, cfg.validate_include_oracle && cfg.has_oracle);
  nlohmann::json rep;
  rep["config_hash"] = cfg.content_hash;
  bool all_pass = true;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : results) {
    std::cout << format_check_line(r) << "\n";
    checks.push_back({{"criterion", r.criterion},
                      {"name", r.name},
                      {"pass", r.pass},
                      {"metric", r.metric},
                      {"threshold", r.threshold},
                      {"detail", r.detail}});
    all_pass = all_pass && r.pass;
  }
  rep["checks"] = checks;
  rep["all_pass"] = all_pass;
  write_json_file(out_path(args, "validation_report.json"), rep);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloch-electron radiative transport solver"};
  app.require_subcommand(1);

  CommonArgs args;
  bool use_cache = false;
  auto* bands = app.add_subcommand("bands", "solve the band structure and orthogonality reports");
  add_common(bands, args);
  auto* kernel = app.add_subcommand("kernel", "assemble the scattering kernel and its report");
  add_common(kernel, args);
  kernel->add_flag("--cache", use_cache, "reuse/write the coupling-tensor cache in --out");
  auto* evolve_cmd = app.add_subcommand("evolve", "time-step the transport equation");
  add_common(evolve_cmd, args);
  auto* oracle_cmd = app.add_subcommand("oracle", "run the Schrodinger decay-rate study");
  add_common(oracle_cmd, args);
  auto* validate = app.add_subcommand("validate", "run the full invariant suite");
  add_common(validate, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (bands->parsed()) return cmd_bands(args);
    if (kernel->parsed()) return cmd_kernel(args, use_cache);
    if (evolve_cmd->parsed()) return cmd_evolve(args);
    if (oracle_cmd->parsed()) return cmd_oracle(args);
    if (validate->parsed()) return cmd_validate(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
