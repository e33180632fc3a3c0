#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "epidiff/grid.hpp"
#include "epidiff/model.hpp"
#include "epidiff/tridiag.hpp"

namespace epidiff {

enum class OperatorForm { p_form, z_form, symmetrized, general };
enum class TimeScheme { backward_euler, crank_nicolson };

inline const char* form_name(OperatorForm f) {
  switch (f) {
    case OperatorForm::p_form: return "p_form";
    case OperatorForm::z_form: return "z_form";
    case OperatorForm::symmetrized: return "symmetrized";
    case OperatorForm::general: return "general";
  }
  return "?";
}

/// Spatial operator A with du/dt = A u semantics on a fixed grid.
struct SpatialOperator {
  Tridiagonal matrix;
  OperatorForm form = OperatorForm::p_form;
  std::shared_ptr<const Grid> grid;
};

/// Conservative finite-volume operators for the model forms.
///   p_form:      flux through w = f p, faces at cell boundaries, zero-flux
///                ends; columns sum to zero so mass is conserved exactly.
///   z_form:      omega-weighted diffusion (F z_x)_x / (2N) with Dirichlet
///                half-cell closure at x = 0 and zero-flux at x = 1.
///   symmetrized: p_form extended evenly to [-1, 1] (even f, odd g).
/// Grid bounds must be [0,1] for p/z forms and [-1,1] for symmetrized.
SpatialOperator assemble_operator(const ModelParams& p, std::shared_ptr<const Grid> grid,
                                  OperatorForm form);

/// Operator for the general degenerate problem at frozen time t; also returns
/// the affine load vector (forcing + boundary data contributions) through
/// `load`.  Verifies the degeneracy/positivity sampling conditions (a0 > 0 on
/// the grid, a1 > 0 at x = 0, b1 != 0) and throws std::domain_error naming the
/// violated condition otherwise.
SpatialOperator assemble_general_operator(const GeneralCoefficients& c,
                                          std::shared_ptr<const Grid> grid, double t,
                                          std::vector<double>* load = nullptr);

/// One implicit step of du/dt = A u (+ load): backward Euler or
/// Crank-Nicolson, solved by the Thomas algorithm.
Field step(const Field& u, const SpatialOperator& op, double dt, TimeScheme scheme,
           const std::vector<double>* load = nullptr);

struct EvolveConfig {
  OperatorForm form = OperatorForm::p_form;
  double t_end = 1.0;
  double dt = 1e-3;
  int snapshot_every = 0;  // 0: first/last only
  TimeScheme scheme = TimeScheme::backward_euler;
  std::string checkpoint_path;  // empty: no checkpointing
  std::uint64_t config_hash = 0;
  std::optional<std::string> resume_from;  // checkpoint to resume from
};

/// Time-steps the initial field to t_end, recording snapshots, a per-step
/// mass ledger, and (optionally) atomic checkpoints that a later call can
/// resume from.  Aborts with std::runtime_error recording the step index if
/// the field stops being finite.
Trajectory evolve(const Field& initial, const ModelParams& p, const EvolveConfig& cfg);

/// Same driver for the general form; coefficients are re-frozen at the end of
/// each step, so time-dependent problems are handled semi-implicitly.
Trajectory evolve_general(const Field& initial, const GeneralCoefficients& coeffs,
                          const EvolveConfig& cfg);

/// Midpoint-rule mass of a density field.
double total_mass(const Field& u);

struct ConservationReport {
  double identity_residual_max = 0.0;   // x a0_xx - a1_x + 2 a0_x + a2
  double b1_residual_max = 0.0;         // b1 - l a0(l, t)
  double b2_residual_max = 0.0;         // b2 - (-a0 - l a0_x + a1)(l, t)
  double boundary_data_residual_max = 0.0;  // data + int_0^l forcing
  bool used_exact_derivatives = true;
  double tolerance = 0.0;
  bool pass = false;
};

/// Audits the algebraic compatibility conditions under which the general
/// problem conserves int_0^l u dx.  Uses exact derivative providers when the
/// coefficient set has them (tolerance 1e-8), centered differences otherwise
/// (tolerance 1e-6).
ConservationReport check_conservation_conditions(const GeneralCoefficients& c,
                                                 std::shared_ptr<const Grid> grid,
                                                 const std::vector<double>& t_samples = {0.0});

/// Checkpoint payload.
struct Checkpoint {
  int version = 1;
  std::uint64_t config_hash = 0;
  std::int64_t step = 0;
  double time = 0.0;
  std::vector<double> values;
};

void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace epidiff
