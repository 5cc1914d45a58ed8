#pragma once

#include <string>

#include "brte/setup.hpp"

namespace brte {

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// Run metadata; the only output that carries a timestamp.
nlohmann::json make_metadata(const RunSetup& setup, const std::string& subcommand);

/// Delimited observables, one row per snapshot.
std::string format_observables(const Trajectory& traj, const TransportContext& ctx,
                               const UnitScales& units);
std::string format_density(const Trajectory& traj, const TransportContext& ctx,
                           const UnitScales& units);

/// Sidecar binary field layout: little-endian float64, interleaved re/im,
/// index order band group -> x -> q -> matrix row-major, snapshots
/// concatenated in time order.
void write_fields_binary(const std::string& path, const Trajectory& traj);
std::vector<std::vector<std::vector<std::vector<Eigen::MatrixXcd>>>> read_fields_binary(
    const std::string& path, const BandTable& bands, int nx, int n_snapshots);

nlohmann::json fields_layout_metadata(const Trajectory& traj, const BandTable& bands);

nlohmann::json bands_report(const RunSetup& setup);
std::string format_bands_table(const RunSetup& setup);
nlohmann::json kernel_report(const RunSetup& setup);
nlohmann::json oracle_report(const GoldenRuleStudy& study, const RunSetup& setup);

/// Coupling tensor cache keyed by a content hash of (lattice, potential,
/// basis, grid, window).
std::string coupling_cache_key(const RunSetup& setup);
void save_coupling_cache(const std::string& path, const CouplingTensor& t, const std::string& key);
bool load_coupling_cache(const std::string& path, CouplingTensor& t, const std::string& key);

}  // namespace brte
