#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "epidiff/grid.hpp"

namespace epidiff {

/// FNV-1a 64-bit hash of a canonical configuration string.
std::uint64_t fnv1a_hash(const std::string& payload);

/// Writes a file atomically: content goes to "<path>.tmp" first and is then
/// renamed over the destination.
void atomic_write(const std::string& path, const std::string& content);

/// Density CSV: header "t,x,value", one row per (snapshot, cell), full
/// round-trip precision.
void write_density_csv(const std::string& path, const Trajectory& traj);
Trajectory read_density_csv(const std::string& path);

/// Mass ledger CSV: header "step,t,mass".
void write_ledger_csv(const std::string& path, const Trajectory& traj);

/// Eigenvalue table CSV: header "k,lambda,asymptote,ratio".
void write_eigen_csv(const std::string& path, const std::vector<double>& lambdas,
                     const std::vector<double>& asymptotes);

/// Plain-text key/value config document ("key value" per line, '#' comments).
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Canonical serialization used for hashing: sorted "key=value" lines.
std::string canonical_config_string(const std::map<std::string, std::string>& kv);

/// Minimal standalone SVG line plot (one polyline per series).
struct SvgSeries {
  std::vector<double> x, y;
  std::string label;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series, bool log_y = false);

/// Run manifest: file names and sizes plus the config hash, JSON-formatted.
void write_manifest(const std::string& path, const std::string& subcommand,
                    std::uint64_t config_hash,
                    const std::vector<std::string>& artifact_paths);

}  // namespace epidiff
