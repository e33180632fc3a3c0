#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace epidiff {

/// Uniform cell-centered finite-volume grid on [x_lo, x_hi].
struct Grid {
  int n_cells = 0;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double dx = 0.0;
  std::vector<double> centers;  // size n_cells
  std::vector<double> faces;    // size n_cells + 1

  static std::shared_ptr<const Grid> build(int n_cells, double x_lo = 0.0, double x_hi = 1.0);
};

/// A scalar field sampled at the cell centers of a grid.
struct Field {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;
  double time = 0.0;

  Field() = default;
  Field(std::shared_ptr<const Grid> g, std::vector<double> v, double t = 0.0)
      : grid(std::move(g)), values(std::move(v)), time(t) {
    if (!grid) throw std::invalid_argument("Field: null grid");
    if (static_cast<int>(values.size()) != grid->n_cells)
      throw std::invalid_argument("Field: value count does not match grid");
  }

  static Field from_function(std::shared_ptr<const Grid> g,
                             const std::function<double(double)>& fn, double t = 0.0);
};

struct MassLedgerEntry {
  std::int64_t step;
  double t;
  double mass;
};

/// Time series of snapshots on a fixed grid plus a per-step mass ledger.
struct Trajectory {
  std::shared_ptr<const Grid> grid;
  std::vector<double> times;                   // snapshot times (includes t = 0)
  std::vector<std::vector<double>> snapshots;  // one value vector per time
  std::vector<MassLedgerEntry> mass_ledger;    // one entry per completed step + initial
  std::uint64_t config_hash = 0;
  std::string form;  // "p_form", "z_form", "symmetrized", "general"

  Field snapshot_field(int k) const {
    return Field(grid, snapshots.at(k), times.at(k));
  }
};

}  // namespace epidiff
