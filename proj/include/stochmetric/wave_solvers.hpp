#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <complex>
#include <memory>
#include <vector>

namespace stochmetric {

enum class Boundary { Periodic, HardWall };

/// psi = a exp(i S / (2 S0)) is the standard Madelung map with hbar = 2 S0;
/// psi = a exp(i S / S0) is the literal amplitude/action relation.
enum class PhaseConvention { SOver2S0, SOverS0 };

/// Uniform 1D (ny == 1) or 2D grid, cell index = iy * nx + ix, cell centre
/// at origin + index * dx along each axis.
struct GridShape {
  int nx = 0;
  int ny = 1;
  int dims = 1;
  double dx = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  Boundary boundary = Boundary::Periodic;

  Eigen::Index size() const { return static_cast<Eigen::Index>(nx) * ny; }
  double cell_volume() const { return dims == 1 ? dx : dx * dx; }
  double x(Eigen::Index idx) const { return x0 + static_cast<double>(idx % nx) * dx; }
  double y(Eigen::Index idx) const { return y0 + static_cast<double>(idx / nx) * dx; }
  /// Neighbour along `axis` (0 = x, 1 = y) at offset `dir` (+1/-1), or -1
  /// past a hard wall.
  Eigen::Index neighbor(Eigen::Index idx, int axis, int dir) const;

  bool operator==(const GridShape&) const = default;
};

/// 1D grid of `cells` cells covering [-half_length, half_length).
GridShape make_line(int cells, double half_length, Boundary boundary = Boundary::Periodic);
GridShape make_square(int cells, double half_length, Boundary boundary = Boundary::Periodic);

struct WaveFunctionGrid {
  GridShape shape;
  Eigen::VectorXcd psi;
  Eigen::VectorXd U;
  double t = 0.0;
  double mass = 1.0;
  double S0 = 0.5;
  PhaseConvention convention = PhaseConvention::SOver2S0;

  double hbar_eff() const { return 2.0 * S0; }
  /// sum |psi|^2 dx^d
  double norm() const { return psi.squaredNorm() * shape.cell_volume(); }
};

/// Throws InputError: axes >= 8 cells, dx > 0, sizes consistent, finite
/// positive norm, mass and S0 > 0.
void validate(const WaveFunctionGrid& w);

/// Crank–Nicolson propagator for i 2S0 dpsi/dt = -(4 S0^2 / 2m) lap psi + U psi
/// with the centred 2nd-order Laplacian. Factorizes once per (grid, dt).
class CrankNicolsonStepper {
 public:
  /// dt may be negative (backward propagation); |dt| max|U| / (2 S0) must
  /// stay below 0.1 or PrecisionError is thrown.
  CrankNicolsonStepper(const WaveFunctionGrid& w, double dt);

  void step(Eigen::VectorXcd& psi) const;
  double dt() const { return dt_; }

 private:
  using SpMat = Eigen::SparseMatrix<std::complex<double>>;
  double dt_;
  SpMat explicit_half_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> implicit_half_;
};

WaveFunctionGrid schrodinger_step(const WaveFunctionGrid& w, double dt);

/// `steps` steps sharing one factorization.
WaveFunctionGrid evolve(const WaveFunctionGrid& w, double dt, int steps);

/// Sparse discrete Hamiltonian -(hbar^2/2m) lap + U.
Eigen::SparseMatrix<double> discrete_hamiltonian(const GridShape& shape,
                                                 const Eigen::VectorXd& U, double mass,
                                                 double hbar);

using CellMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct AmplitudeField {
  GridShape shape;
  Eigen::VectorXd a;
};

struct MadelungPair {
  GridShape shape;
  Eigen::VectorXd a;
  /// Action with the zero-mean gauge applied over unmasked cells.
  Eigen::VectorXd S;
  /// Mean removed from S; S + gauge_offset is the unwrapped action.
  double gauge_offset = 0.0;
  CellMask mask;
  Eigen::VectorXd U;
  double t = 0.0;
  double mass = 1.0;
  double S0 = 0.5;
  PhaseConvention convention = PhaseConvention::SOver2S0;

  /// S per radian of phase: 2 S0 or S0.
  double action_per_radian() const {
    return convention == PhaseConvention::SOver2S0 ? 2.0 * S0 : S0;
  }
  AmplitudeField amplitude() const { return {shape, a}; }
};

/// a = |psi|, S = action_per_radian * phase, phase unwrapped by an
/// axis-ordered flood from the max-|psi| cell over cells with
/// |psi| > 1e-12 max|psi|. Throws DecompositionError listing the connected
/// regions if the region holding the maximum covers < 90% of the grid.
MadelungPair madelung_decompose(const WaveFunctionGrid& w);

/// a exp(i (S + gauge_offset) / action_per_radian).
Eigen::VectorXcd recompose(const MadelungPair& m);

struct ResidualField {
  Eigen::VectorXd values;
  CellMask mask;

  /// max |value| over cells where mask (and `extra`, if given) hold.
  double max_abs() const;
  double max_abs(const CellMask& extra) const;
};

/// -(hbar_eff^2 / 2m) lap(a) / a with hbar_eff = 2 S0. Cells with
/// a <= 1e-12 max(a) or an incomplete stencil are masked.
ResidualField quantum_potential(const AmplitudeField& a, double mass, double S0);

/// dS/dt + |grad S|^2 / 2m + U between two snapshots, time-centred at
/// (t0 + t1) / 2. Action differences are taken modulo one phase turn.
ResidualField hj_residual(const MadelungPair& before, const MadelungPair& after);

/// d(a^2)/dt + div(a^2 grad S / m), time-centred as hj_residual.
ResidualField continuity_residual(const MadelungPair& before, const MadelungPair& after);

struct GapRecord {
  int step = 0;
  double t = 0.0;
  double max_continuity = 0.0;
  double max_hj_plus_q = 0.0;
  double max_hj = 0.0;
  double max_q = 0.0;
  Eigen::Index interior_cells = 0;
};

struct DerivationGapReport {
  PhaseConvention convention = PhaseConvention::SOver2S0;
  double interior_threshold = 1e-3;
  std::vector<GapRecord> records;
  double worst_continuity = 0.0;
  double worst_hj_plus_q = 0.0;
  double max_q = 0.0;
  /// max over records of max|hj + Q| / max|Q| (0 when Q vanishes).
  double worst_relative_gap = 0.0;
};

/// Evolves `initial` for `steps` steps of dt and, every `sample_every`
/// steps, compares consecutive snapshots. Interior cells are those with
/// a >= interior_threshold * max(a) in both snapshots.
DerivationGapReport derivation_gap_report(const WaveFunctionGrid& initial, int steps,
                                          double dt, int sample_every = 1,
                                          double interior_threshold = 1e-3);

/// Normalized Gaussian packet exp(-(x - c)^2 / (4 sigma^2) + i k x); in 2D a
/// product of two such factors with the same width.
Eigen::VectorXcd gaussian_packet(const GridShape& shape, double sigma, double k,
                                 double centre = 0.0);

/// Plane wave exp(i k x) normalized on the grid.
Eigen::VectorXcd plane_wave(const GridShape& shape, double k);

/// 1/2 m omega^2 r^2 on the grid.
Eigen::VectorXd harmonic_potential(const GridShape& shape, double mass, double omega);

}  // namespace stochmetric
