#include "epidiff/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "epidiff/io.hpp"
#include "epidiff/quadrature.hpp"

#include <json.hpp>

namespace epidiff {

namespace {

void require_bounds(const Grid& g, double lo, double hi, const char* who) {
  if (std::abs(g.x_lo - lo) > 1e-12 || std::abs(g.x_hi - hi) > 1e-12)
    throw std::invalid_argument(std::string(who) + ": grid bounds must be [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

// Flux form through w = f p at an interior face: the face value of g/f is
// applied to the average of the neighbouring w values, the diffusive part to
// their difference.  The same row/column structure keeps column sums exactly
// zero, which is what conserves mass to roundoff.
void add_pform_face(Tridiagonal& a, int face, double c_face, double f_left,
                    double f_right, double inv2n, double dx) {
  const double c_l = (-inv2n / dx - 0.5 * c_face) * f_left;
  const double c_r = (inv2n / dx - 0.5 * c_face) * f_right;
  const int i = face - 1;  // left cell
  a.diag[i] += c_l / dx;
  a.sup[i] += c_r / dx;
  a.sub[i + 1] -= c_l / dx;
  a.diag[i + 1] -= c_r / dx;
}

}  // namespace

SpatialOperator assemble_operator(const ModelParams& p, std::shared_ptr<const Grid> grid,
                                  OperatorForm form) {
  const Grid& g = *grid;
  const int n = g.n_cells;
  SpatialOperator op;
  op.form = form;
  op.grid = grid;
  op.matrix = Tridiagonal(n);
  const double inv2n = 1.0 / (2.0 * p.n);

  switch (form) {
    case OperatorForm::p_form: {
      require_bounds(g, 0.0, 1.0, "assemble_operator(p_form)");
      for (int j = 1; j < n; ++j) {
        const double xf = g.faces[j];
        add_pform_face(op.matrix, j, drift_ratio(xf, p), coeffs(g.centers[j - 1], p).f,
                       coeffs(g.centers[j], p).f, inv2n, g.dx);
      }
      break;
    }
    case OperatorForm::symmetrized: {
      require_bounds(g, -1.0, 1.0, "assemble_operator(symmetrized)");
      // Even extension of f and odd extension of g: the face ratio g/f picks
      // up the sign of x and vanishes at the centre face.
      auto f_even = [&](double x) { return coeffs(std::abs(x), p).f; };
      auto c_odd = [&](double x) {
        if (x == 0.0) return 0.0;
        return std::copysign(1.0, x) * drift_ratio(std::abs(x), p);
      };
      for (int j = 1; j < n; ++j) {
        const double xf = g.faces[j];
        add_pform_face(op.matrix, j, c_odd(xf), f_even(g.centers[j - 1]),
                       f_even(g.centers[j]), inv2n, g.dx);
      }
      break;
    }
    case OperatorForm::z_form: {
      require_bounds(g, 0.0, 1.0, "assemble_operator(z_form)");
      // dz/dt = omega (F z_x)_x / (2N); Dirichlet z(0)=0 closed with a half
      // cell, zero flux at x = 1.
      std::vector<double> face_f(n + 1);
      for (int j = 0; j <= n; ++j) face_f[j] = big_f(g.faces[j], p);
      for (int i = 0; i < n; ++i) {
        const double w = omega(g.centers[i], p) * inv2n / (g.dx * g.dx);
        if (i < n - 1) {
          op.matrix.diag[i] -= w * face_f[i + 1];
          op.matrix.sup[i] += w * face_f[i + 1];
        }
        if (i > 0) {
          op.matrix.diag[i] -= w * face_f[i];
          op.matrix.sub[i] += w * face_f[i];
        } else {
          op.matrix.diag[i] -= w * 2.0 * face_f[0];
        }
      }
      break;
    }
    case OperatorForm::general:
      throw std::invalid_argument(
          "assemble_operator: use assemble_general_operator for the general form");
  }
  return op;
}

SpatialOperator assemble_general_operator(const GeneralCoefficients& c,
                                          std::shared_ptr<const Grid> grid, double t,
                                          std::vector<double>* load) {
  const Grid& g = *grid;
  const int n = g.n_cells;
  require_bounds(g, 0.0, c.domain_length, "assemble_general_operator");

  // Well-posedness sampling: strictly positive diffusion factor on the grid,
  // inward drift at the degenerate end, usable boundary row.
  for (int i = 0; i < n; ++i) {
    if (!(c.a0(g.centers[i], t) > 0.0))
      throw std::domain_error("general operator: a0 <= 0 at x = " +
                              std::to_string(g.centers[i]) + ", t = " + std::to_string(t));
  }
  if (!(c.a1(0.0, t) > 0.0))
    throw std::domain_error("general operator: a1(0, t) <= 0 at t = " + std::to_string(t));
  if (!(std::abs(c.b1(t)) > 0.0))
    throw std::domain_error("general operator: b1(t) = 0 at t = " + std::to_string(t));

  SpatialOperator op;
  op.form = OperatorForm::general;
  op.grid = grid;
  op.matrix = Tridiagonal(n);
  if (load) load->assign(n, 0.0);

  const double dx = g.dx;
  {
    // Near-origin cell: a mirrored ghost value u_{-1} = 2u_0 - u_1 cancels the
    // (already degenerate) diffusion term; drift is one-sided into the domain.
    const double x0 = g.centers[0];
    const double a1v = c.a1(x0, t);
    op.matrix.diag[0] = -a1v / dx + c.a2(x0, t);
    op.matrix.sup[0] = a1v / dx;
    if (load) (*load)[0] = c.forcing(x0, t);
  }
  for (int i = 1; i < n; ++i) {
    const double x = g.centers[i];
    const double d = x * c.a0(x, t) / (dx * dx);
    const double adv = c.a1(x, t) / (2.0 * dx);
    const double a2v = c.a2(x, t);
    if (i < n - 1) {
      op.matrix.sub[i] = d - adv;
      op.matrix.diag[i] = -2.0 * d + a2v;
      op.matrix.sup[i] = d + adv;
      if (load) (*load)[i] = c.forcing(x, t);
    } else {
      // Third-kind closure at x = l through a ghost cell:
      //   b1 (u_g - u_{n-1})/dx + b2 (u_g + u_{n-1})/2 = data.
      const double b1v = c.b1(t), b2v = c.b2(t);
      const double alpha = b1v / dx + 0.5 * b2v;
      const double beta = -b1v / dx + 0.5 * b2v;
      if (std::abs(alpha) < 1e-300)
        throw std::domain_error("general operator: degenerate boundary closure");
      op.matrix.sub[i] = d - adv;
      op.matrix.diag[i] = -2.0 * d + a2v + (d + adv) * (-beta / alpha);
      if (load) (*load)[i] = c.forcing(x, t) + (d + adv) * c.boundary_data(t) / alpha;
    }
  }
  return op;
}

Field step(const Field& u, const SpatialOperator& op, double dt, TimeScheme scheme,
           const std::vector<double>* load) {
  const int n = op.matrix.size();
  if (static_cast<int>(u.values.size()) != n)
    throw std::invalid_argument("step: field/operator size mismatch");
  const double gamma = (scheme == TimeScheme::backward_euler) ? dt : 0.5 * dt;

  std::vector<double> rhs;
  if (scheme == TimeScheme::crank_nicolson) {
    rhs = op.matrix.apply_affine(u.values, 0.5 * dt, 1.0);
  } else {
    rhs = u.values;
  }
  if (load)
    for (int i = 0; i < n; ++i) rhs[i] += dt * (*load)[i];

  Tridiagonal lhs(n);
  for (int i = 0; i < n; ++i) {
    lhs.diag[i] = 1.0 - gamma * op.matrix.diag[i];
    lhs.sub[i] = -gamma * op.matrix.sub[i];
    lhs.sup[i] = -gamma * op.matrix.sup[i];
  }
  Field out(u.grid, thomas_solve(lhs, std::move(rhs)), u.time + dt);
  return out;
}

double total_mass(const Field& u) {
  double s = 0.0;
  for (double v : u.values) s += v;
  return s * u.grid->dx;
}

namespace {

Trajectory evolve_impl(const Field& initial, const EvolveConfig& cfg,
                       const std::function<SpatialOperator(double)>& make_op,
                       const std::function<const std::vector<double>*()>& current_load,
                       bool reassemble_each_step, const char* form) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (!(cfg.t_end > initial.time)) throw std::invalid_argument("evolve: t_end not ahead");

  Field u = initial;
  std::int64_t step_index = 0;

  if (cfg.resume_from) {
    Checkpoint c = read_checkpoint(*cfg.resume_from);
    if (c.config_hash != cfg.config_hash)
      throw std::runtime_error("evolve: checkpoint config hash mismatch");
    if (static_cast<int>(c.values.size()) != initial.grid->n_cells)
      throw std::runtime_error("evolve: checkpoint size mismatch");
    u = Field(initial.grid, c.values, c.time);
    step_index = c.step;
  }

  const std::int64_t n_steps =
      std::max<std::int64_t>(1, std::llround((cfg.t_end - u.time) / cfg.dt));

  Trajectory traj;
  traj.grid = initial.grid;
  traj.config_hash = cfg.config_hash;
  traj.form = form;
  traj.times.push_back(u.time);
  traj.snapshots.push_back(u.values);
  traj.mass_ledger.push_back({step_index, u.time, total_mass(u)});

  SpatialOperator op = make_op(u.time + cfg.dt);

  auto maybe_checkpoint = [&]() {
    if (cfg.checkpoint_path.empty()) return;
    Checkpoint c;
    c.config_hash = cfg.config_hash;
    c.step = step_index;
    c.time = u.time;
    c.values = u.values;
    write_checkpoint(cfg.checkpoint_path, c);
  };

  for (std::int64_t k = 0; k < n_steps; ++k) {
    if (reassemble_each_step && k > 0) op = make_op(u.time + cfg.dt);
    u = step(u, op, cfg.dt, cfg.scheme, current_load ? current_load() : nullptr);
    ++step_index;
    for (double v : u.values) {
      if (!std::isfinite(v))
        throw std::runtime_error("evolve: non-finite field at step " +
                                 std::to_string(step_index) + ", t = " +
                                 std::to_string(u.time));
    }
    traj.mass_ledger.push_back({step_index, u.time, total_mass(u)});
    const bool is_last = (k == n_steps - 1);
    if (is_last || (cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0)) {
      traj.times.push_back(u.time);
      traj.snapshots.push_back(u.values);
      maybe_checkpoint();
    }
  }
  return traj;
}

}  // namespace

Trajectory evolve(const Field& initial, const ModelParams& p, const EvolveConfig& cfg) {
  if (cfg.form == OperatorForm::general)
    throw std::invalid_argument("evolve: general form needs evolve_general");
  SpatialOperator op = assemble_operator(p, initial.grid, cfg.form);
  auto make_op = [op](double) { return op; };
  return evolve_impl(initial, cfg, make_op, nullptr, false, form_name(cfg.form));
}

Trajectory evolve_general(const Field& initial, const GeneralCoefficients& coeffs,
                          const EvolveConfig& cfg) {
  std::vector<double> load;
  auto make_op = [&](double t) {
    return assemble_general_operator(coeffs, initial.grid, t, &load);
  };
  auto current_load = [&]() -> const std::vector<double>* { return &load; };
  return evolve_impl(initial, cfg, make_op, current_load, true,
                     form_name(OperatorForm::general));
}

ConservationReport check_conservation_conditions(const GeneralCoefficients& c,
                                                 std::shared_ptr<const Grid> grid,
                                                 const std::vector<double>& t_samples) {
  const Grid& g = *grid;
  const double l = c.domain_length;
  ConservationReport rep;
  rep.used_exact_derivatives = c.has_exact_derivatives();
  rep.tolerance = rep.used_exact_derivatives ? 1e-8 : 1e-6;
  const double h = 1e-6;
  // Second differences amplify roundoff by 1/h^2, so they get a wider step
  // (about eps^{1/4}); first differences keep the tighter one.
  const double h2 = 1e-4;

  auto d_dx = [&](const GeneralCoefficients::SpaceTimeFn& fn, double x, double t) {
    const double lo = std::max(0.0, x - h);
    return (fn(x + h, t) - fn(lo, t)) / (x + h - lo);
  };

  for (double t : t_samples) {
    for (double x : g.centers) {
      double a0xx;
      if (c.a0_xx) {
        a0xx = c.a0_xx(x, t);
      } else {
        // Non-uniform second difference: the left arm is clamped at 0 when
        // the sample point sits closer to the degenerate end than h2.
        const double hl = std::min(x, h2), hr = h2;
        a0xx = 2.0 * (hl * c.a0(x + hr, t) - (hl + hr) * c.a0(x, t) + hr * c.a0(x - hl, t)) /
               (hl * hr * (hl + hr));
      }
      const double a1x = c.a1_x ? c.a1_x(x, t) : d_dx(c.a1, x, t);
      const double a0x = c.a0_x ? c.a0_x(x, t) : d_dx(c.a0, x, t);
      const double r = x * a0xx - a1x + 2.0 * a0x + c.a2(x, t);
      rep.identity_residual_max = std::max(rep.identity_residual_max, std::abs(r));
    }
    const double a0l = c.a0(l, t);
    const double a0xl = c.a0_x ? c.a0_x(l, t) : d_dx(c.a0, l, t);
    rep.b1_residual_max = std::max(rep.b1_residual_max, std::abs(c.b1(t) - l * a0l));
    rep.b2_residual_max =
        std::max(rep.b2_residual_max, std::abs(c.b2(t) - (-a0l - l * a0xl + c.a1(l, t))));
    const double forcing_integral =
        integrate_value([&](double x) { return c.forcing(x, t); }, 0.0, l, 1e-12, 1e-12);
    rep.boundary_data_residual_max = std::max(
        rep.boundary_data_residual_max, std::abs(c.boundary_data(t) + forcing_integral));
  }
  rep.pass = rep.identity_residual_max <= rep.tolerance &&
             rep.b1_residual_max <= rep.tolerance &&
             rep.b2_residual_max <= rep.tolerance &&
             rep.boundary_data_residual_max <= rep.tolerance;
  return rep;
}

void write_checkpoint(const std::string& path, const Checkpoint& c) {
  nlohmann::json j;
  j["version"] = c.version;
  j["config_hash"] = c.config_hash;
  j["step"] = c.step;
  j["time"] = c.time;
  j["values"] = c.values;
  atomic_write(path, j.dump());
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_checkpoint: cannot open " + path);
  nlohmann::json j;
  in >> j;
  Checkpoint c;
  c.version = j.at("version").get<int>();
  if (c.version != 1) throw std::runtime_error("read_checkpoint: unknown version");
  c.config_hash = j.at("config_hash").get<std::uint64_t>();
  c.step = j.at("step").get<std::int64_t>();
  c.time = j.at("time").get<double>();
  c.values = j.at("values").get<std::vector<double>>();
  return c;
}

}  // namespace epidiff
