#include "stochmetric/wave_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "stochmetric/errors.hpp"

namespace stochmetric {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double d, double period) { return d - period * std::round(d / period); }

// Centred derivative of S along `axis` at `i`, differences wrapped to one turn.
// Returns false if the stencil leaves the grid or touches a masked cell.
bool action_gradient(const MadelungPair& m, Eigen::Index i, int axis, double& out) {
  const Eigen::Index fwd = m.shape.neighbor(i, axis, +1);
  const Eigen::Index bwd = m.shape.neighbor(i, axis, -1);
  if (fwd < 0 || bwd < 0 || !m.mask[fwd] || !m.mask[bwd]) return false;
  const double period = kTwoPi * m.action_per_radian();
  out = wrap(m.S[fwd] - m.S[bwd], period) / (2.0 * m.shape.dx);
  return true;
}

bool grad_squared(const MadelungPair& m, Eigen::Index i, double& out) {
  out = 0.0;
  for (int axis = 0; axis < m.shape.dims; ++axis) {
    double g = 0.0;
    if (!action_gradient(m, i, axis, g)) return false;
    out += g * g;
  }
  return true;
}

void require_compatible(const MadelungPair& a, const MadelungPair& b) {
  if (!(a.shape == b.shape) || a.convention != b.convention)
    throw InputError("residual: snapshots have different grids or conventions");
  if (a.t == b.t) throw InputError("residual: snapshots must be separated in time");
}

ResidualField masked_field(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), CellMask::Constant(n, false)};
}

}  // namespace

Eigen::Index GridShape::neighbor(Eigen::Index idx, int axis, int dir) const {
  const Eigen::Index ix = idx % nx;
  const Eigen::Index iy = idx / nx;
  const Eigen::Index extent = axis == 0 ? nx : ny;
  Eigen::Index pos = (axis == 0 ? ix : iy) + dir;
  if (pos < 0 || pos >= extent) {
    if (boundary == Boundary::HardWall) return -1;
    pos = (pos + extent) % extent;
  }
  return axis == 0 ? iy * nx + pos : pos * nx + ix;
}

GridShape make_line(int cells, double half_length, Boundary boundary) {
  GridShape s;
  s.nx = cells;
  s.ny = 1;
  s.dims = 1;
  s.dx = 2.0 * half_length / cells;
  s.x0 = -half_length;
  s.boundary = boundary;
  return s;
}

GridShape make_square(int cells, double half_length, Boundary boundary) {
  GridShape s = make_line(cells, half_length, boundary);
  s.ny = cells;
  s.dims = 2;
  s.y0 = -half_length;
  return s;
}

void validate(const WaveFunctionGrid& w) {
  const auto& s = w.shape;
  if (s.dims != 1 && s.dims != 2) throw InputError("grid: dims must be 1 or 2");
  if (s.nx < 8 || (s.dims == 2 && s.ny < 8) || (s.dims == 1 && s.ny != 1))
    throw InputError("grid: every axis needs >= 8 cells");
  if (!(s.dx > 0.0)) throw InputError("grid: dx must be > 0");
  if (w.psi.size() != s.size() || w.U.size() != s.size())
    throw InputError("grid: psi and U must match the grid size");
  if (!(w.mass > 0.0) || !(w.S0 > 0.0)) throw InputError("grid: mass and S0 must be > 0");
  const double n = w.norm();
  if (!std::isfinite(n) || !(n > 0.0)) throw InputError("grid: norm must be finite and > 0");
}

Eigen::SparseMatrix<double> discrete_hamiltonian(const GridShape& shape,
                                                 const Eigen::VectorXd& U, double mass,
                                                 double hbar) {
  const Eigen::Index n = shape.size();
  const double kinetic = hbar * hbar / (2.0 * mass * shape.dx * shape.dx);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (1 + 2 * shape.dims));
  for (Eigen::Index i = 0; i < n; ++i) {
    entries.emplace_back(i, i, 2.0 * shape.dims * kinetic + U[i]);
    for (int axis = 0; axis < shape.dims; ++axis)
      for (int dir : {-1, 1}) {
        const Eigen::Index j = shape.neighbor(i, axis, dir);
        if (j >= 0) entries.emplace_back(i, j, -kinetic);
      }
  }
  Eigen::SparseMatrix<double> H(n, n);
  H.setFromTriplets(entries.begin(), entries.end());
  return H;
}

CrankNicolsonStepper::CrankNicolsonStepper(const WaveFunctionGrid& w, double dt) : dt_(dt) {
  validate(w);
  if (!(dt != 0.0) || !std::isfinite(dt))
    throw PrecisionError("schrodinger_step: dt must be finite and nonzero");
  const double hbar = w.hbar_eff();
  const double umax = w.U.cwiseAbs().maxCoeff();
  if (std::abs(dt) * umax / hbar >= 0.1) {
    std::ostringstream msg;
    msg << "schrodinger_step: |dt| max|U| / (2 S0) = " << std::abs(dt) * umax / hbar
        << " violates the accuracy guard (< 0.1); use |dt| < " << 0.1 * hbar / umax;
    throw PrecisionError(msg.str());
  }

  const SpMat H = discrete_hamiltonian(w.shape, w.U, w.mass, hbar).cast<cd>();
  SpMat I(H.rows(), H.cols());
  I.setIdentity();
  const cd half = cd(0.0, dt / (2.0 * hbar));
  explicit_half_ = I - half * H;
  SpMat implicit = I + half * H;
  implicit.makeCompressed();

  implicit_half_ = std::make_shared<Eigen::SparseLU<SpMat>>();
  implicit_half_->compute(implicit);
  if (implicit_half_->info() != Eigen::Success)
    throw NumericalError("schrodinger_step: Crank–Nicolson matrix factorization failed");
}

void CrankNicolsonStepper::step(Eigen::VectorXcd& psi) const {
  Eigen::VectorXcd rhs = explicit_half_ * psi;
  psi = implicit_half_->solve(rhs);
  if (implicit_half_->info() != Eigen::Success)
    throw NumericalError("schrodinger_step: Crank–Nicolson solve failed");
}

WaveFunctionGrid schrodinger_step(const WaveFunctionGrid& w, double dt) { return evolve(w, dt, 1); }

WaveFunctionGrid evolve(const WaveFunctionGrid& w, double dt, int steps) {
  const CrankNicolsonStepper stepper(w, dt);
  WaveFunctionGrid out = w;
  for (int n = 0; n < steps; ++n) stepper.step(out.psi);
  out.t = w.t + steps * dt;
  return out;
}

MadelungPair madelung_decompose(const WaveFunctionGrid& w) {
  validate(w);
  const auto& shape = w.shape;
  const Eigen::Index n = shape.size();

  MadelungPair m;
  m.shape = shape;
  m.U = w.U;
  m.t = w.t;
  m.mass = w.mass;
  m.S0 = w.S0;
  m.convention = w.convention;
  m.a = w.psi.cwiseAbs();

  Eigen::Index peak = 0;
  const double amax = m.a.maxCoeff(&peak);
  const CellMask live = m.a.array() > 1e-12 * amax;

  // Connected regions of live cells.
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> region_size;
  std::vector<Eigen::Index> region_first;
  for (Eigen::Index seed = 0; seed < n; ++seed) {
    if (!live[seed] || label[seed] >= 0) continue;
    const int id = static_cast<int>(region_size.size());
    region_size.push_back(0);
    region_first.push_back(seed);
    std::deque<Eigen::Index> queue{seed};
    label[seed] = id;
    while (!queue.empty()) {
      const Eigen::Index cur = queue.front();
      queue.pop_front();
      ++region_size[id];
      for (int axis = 0; axis < shape.dims; ++axis)
        for (int dir : {-1, 1}) {
          const Eigen::Index nb = shape.neighbor(cur, axis, dir);
          if (nb >= 0 && live[nb] && label[nb] < 0) {
            label[nb] = id;
            queue.push_back(nb);
          }
        }
    }
  }
  const int main_region = label[peak];
  if (region_size[main_region] < static_cast<Eigen::Index>(std::ceil(0.9 * n))) {
    std::ostringstream msg;
    msg << "madelung_decompose: region holding max|psi| covers " << region_size[main_region]
        << " of " << n << " cells (< 90%); " << region_size.size() << " region(s):";
    for (std::size_t r = 0; r < region_size.size(); ++r)
      msg << " [first cell " << region_first[r] << ", " << region_size[r] << " cells]";
    msg << "; " << (n - live.count()) << " nodal cells";
    throw DecompositionError(msg.str());
  }

  const double per_radian = m.action_per_radian();
  Eigen::VectorXd phase(n);
  for (Eigen::Index i = 0; i < n; ++i) phase[i] = std::arg(w.psi[i]);

  // Axis-ordered flood from the peak.
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  std::deque<Eigen::Index> queue{peak};
  visited[peak] = true;
  while (!queue.empty()) {
    const Eigen::Index cur = queue.front();
    queue.pop_front();
    for (int axis = 0; axis < shape.dims; ++axis)
      for (int dir : {-1, 1}) {
        const Eigen::Index nb = shape.neighbor(cur, axis, dir);
        if (nb < 0 || visited[nb] || label[nb] != main_region) continue;
        visited[nb] = true;
        phase[nb] = phase[cur] + std::arg(w.psi[nb] * std::conj(w.psi[cur]));
        queue.push_back(nb);
      }
  }

  m.mask = CellMask(n);
  for (Eigen::Index i = 0; i < n; ++i) m.mask[i] = label[i] == main_region;
  m.S = per_radian * phase;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (m.mask[i]) sum += m.S[i];
  m.gauge_offset = sum / static_cast<double>(m.mask.count());
  m.S.array() -= m.gauge_offset;
  return m;
}

Eigen::VectorXcd recompose(const MadelungPair& m) {
  Eigen::VectorXcd psi(m.a.size());
  const double per_radian = m.action_per_radian();
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    psi[i] = std::polar(m.a[i], (m.S[i] + m.gauge_offset) / per_radian);
  return psi;
}

double ResidualField::max_abs() const { return max_abs(CellMask::Constant(mask.size(), true)); }

double ResidualField::max_abs(const CellMask& extra) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (mask[i] && extra[i]) worst = std::max(worst, std::abs(values[i]));
  return worst;
}

ResidualField quantum_potential(const AmplitudeField& field, double mass, double S0) {
  const auto& shape = field.shape;
  const auto& a = field.a;
  const Eigen::Index n = a.size();
  ResidualField q = masked_field(n);
  if (n == 0) return q;
  const double threshold = 1e-12 * a.maxCoeff();
  const double hbar = 2.0 * S0;
  const double scale = -hbar * hbar / (2.0 * mass);
  const double inv_dx2 = 1.0 / (shape.dx * shape.dx);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(a[i] > threshold)) continue;
    double lap = 0.0;
    bool complete = true;
    for (int axis = 0; axis < shape.dims && complete; ++axis) {
      const Eigen::Index fwd = shape.neighbor(i, axis, +1);
      const Eigen::Index bwd = shape.neighbor(i, axis, -1);
      if (fwd < 0 || bwd < 0) {
        complete = false;
        break;
      }
      lap += (a[fwd] - 2.0 * a[i] + a[bwd]) * inv_dx2;
    }
    if (!complete) continue;
    q.values[i] = scale * lap / a[i];
    q.mask[i] = true;
  }
  return q;
}

ResidualField hj_residual(const MadelungPair& before, const MadelungPair& after) {
  require_compatible(before, after);
  const Eigen::Index n = before.a.size();
  const double dt = after.t - before.t;
  const double period = kTwoPi * before.action_per_radian();
  ResidualField r = masked_field(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!before.mask[i] || !after.mask[i]) continue;
    double g2_before = 0.0, g2_after = 0.0;
    if (!grad_squared(before, i, g2_before) || !grad_squared(after, i, g2_after)) continue;
    const double dS = wrap((after.S[i] + after.gauge_offset) - (before.S[i] + before.gauge_offset),
                           period);
    const double kinetic = 0.5 * (g2_before + g2_after) / (2.0 * before.mass);
    r.values[i] = dS / dt + kinetic + 0.5 * (before.U[i] + after.U[i]);
    r.mask[i] = true;
  }
  return r;
}

ResidualField continuity_residual(const MadelungPair& before, const MadelungPair& after) {
  require_compatible(before, after);
  const auto& shape = before.shape;
  const Eigen::Index n = before.a.size();
  const double dt = after.t - before.t;

  // Flux a^2 dS/dx_axis / m per snapshot and axis; NaN where undefined.
  auto fluxes = [&](const MadelungPair& m) {
    std::vector<Eigen::VectorXd> out;
    for (int axis = 0; axis < shape.dims; ++axis) {
      Eigen::VectorXd f = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
      for (Eigen::Index i = 0; i < n; ++i) {
        double g = 0.0;
        if (m.mask[i] && action_gradient(m, i, axis, g)) f[i] = m.a[i] * m.a[i] * g / m.mass;
      }
      out.push_back(std::move(f));
    }
    return out;
  };
  const auto flux_before = fluxes(before);
  const auto flux_after = fluxes(after);

  auto divergence = [&](const std::vector<Eigen::VectorXd>& flux, Eigen::Index i, double& out) {
    out = 0.0;
    for (int axis = 0; axis < shape.dims; ++axis) {
      const Eigen::Index fwd = shape.neighbor(i, axis, +1);
      const Eigen::Index bwd = shape.neighbor(i, axis, -1);
      if (fwd < 0 || bwd < 0) return false;
      const double diff = flux[axis][fwd] - flux[axis][bwd];
      if (std::isnan(diff)) return false;
      out += diff / (2.0 * shape.dx);
    }
    return true;
  };

  ResidualField r = masked_field(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!before.mask[i] || !after.mask[i]) continue;
    double div_before = 0.0, div_after = 0.0;
    if (!divergence(flux_before, i, div_before) || !divergence(flux_after, i, div_after)) continue;
    const double drho = (after.a[i] * after.a[i] - before.a[i] * before.a[i]) / dt;
    r.values[i] = drho + 0.5 * (div_before + div_after);
    r.mask[i] = true;
  }
  return r;
}

DerivationGapReport derivation_gap_report(const WaveFunctionGrid& initial, int steps,
                                          double dt, int sample_every,
                                          double interior_threshold) {
  if (steps < 1) throw InputError("derivation_gap_report: steps must be >= 1");
  if (sample_every < 1) throw InputError("derivation_gap_report: sample_every must be >= 1");
  const CrankNicolsonStepper stepper(initial, dt);

  DerivationGapReport report;
  report.convention = initial.convention;
  report.interior_threshold = interior_threshold;

  WaveFunctionGrid current = initial;
  for (int n = 0; n < steps; ++n) {
    WaveFunctionGrid next = current;
    stepper.step(next.psi);
    next.t = initial.t + (n + 1) * dt;

    if (n % sample_every == 0) {
      const MadelungPair before = madelung_decompose(current);
      const MadelungPair after = madelung_decompose(next);
      const ResidualField hj = hj_residual(before, after);
      const ResidualField cont = continuity_residual(before, after);
      const ResidualField q0 = quantum_potential(before.amplitude(), before.mass, before.S0);
      const ResidualField q1 = quantum_potential(after.amplitude(), after.mass, after.S0);

      const double amax0 = before.a.maxCoeff();
      const double amax1 = after.a.maxCoeff();
      const CellMask interior = (before.a.array() >= interior_threshold * amax0) &&
                                (after.a.array() >= interior_threshold * amax1) &&
                                q0.mask && q1.mask;

      GapRecord rec;
      rec.step = n;
      rec.t = current.t + 0.5 * dt;
      rec.interior_cells = (interior && hj.mask).count();
      ResidualField gap = hj;
      ResidualField q_mid = q0;
      q_mid.values = 0.5 * (q0.values + q1.values);
      q_mid.mask = q0.mask && q1.mask;
      gap.values += q_mid.values;
      gap.mask = hj.mask && q_mid.mask;
      rec.max_continuity = cont.max_abs(interior);
      rec.max_hj = hj.max_abs(interior);
      rec.max_hj_plus_q = gap.max_abs(interior);
      rec.max_q = q_mid.max_abs(interior);

      report.worst_continuity = std::max(report.worst_continuity, rec.max_continuity);
      report.worst_hj_plus_q = std::max(report.worst_hj_plus_q, rec.max_hj_plus_q);
      report.max_q = std::max(report.max_q, rec.max_q);
      if (rec.max_q > 0.0)
        report.worst_relative_gap =
            std::max(report.worst_relative_gap, rec.max_hj_plus_q / rec.max_q);
      report.records.push_back(rec);
    }
    current = std::move(next);
  }
  return report;
}

Eigen::VectorXcd gaussian_packet(const GridShape& shape, double sigma, double k, double centre) {
  Eigen::VectorXcd psi(shape.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double x = shape.x(i) - centre;
    double envelope = -x * x / (4.0 * sigma * sigma);
    if (shape.dims == 2) {
      const double y = shape.y(i);
      envelope -= y * y / (4.0 * sigma * sigma);
    }
    psi[i] = std::polar(std::exp(envelope), k * shape.x(i));
  }
  return psi / std::sqrt(psi.squaredNorm() * shape.cell_volume());
}

Eigen::VectorXcd plane_wave(const GridShape& shape, double k) {
  Eigen::VectorXcd psi(shape.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = std::polar(1.0, k * shape.x(i));
  return psi / std::sqrt(psi.squaredNorm() * shape.cell_volume());
}

Eigen::VectorXd harmonic_potential(const GridShape& shape, double mass, double omega) {
  Eigen::VectorXd U(shape.size());
  for (Eigen::Index i = 0; i < U.size(); ++i) {
    double r2 = shape.x(i) * shape.x(i);
    if (shape.dims == 2) r2 += shape.y(i) * shape.y(i);
    U[i] = 0.5 * mass * omega * omega * r2;
  }
  return U;
}

}  // namespace stochmetric
