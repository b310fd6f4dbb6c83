#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stochmetric/metric_background.hpp"

namespace stochmetric {

/// Source at the origin, slits in the plane z = L1 at x = +d/2 (slit 1) and
/// x = -d/2 (slit 2), screen in the plane z = L1 + L2 sampled uniformly on
/// [-screen_half_width, screen_half_width].
struct SlitGeometry {
  double L1 = 1.0;
  double L2 = 1.0;
  double d = 0.1;
  double w = 0.0;
  double screen_half_width = 1.0;
  int screen_samples = 256;

  double screen_x(int i) const;
  std::vector<double> screen_positions() const;
  bool operator==(const SlitGeometry&) const = default;
};

/// Every violated invariant as "geometry.<field>: reason".
std::vector<std::string> problems(const SlitGeometry& g);
void validate(const SlitGeometry& g);

enum class Slit { One = 1, Two = 2 };

/// How the sampled metric perturbation couples into each path amplitude.
enum class Coupling {
  /// (1 + sum_a h_aa / 4) magnitude factor only.
  Amplitude,
  /// Path phase from the proper length of the h-corrected spatial interval.
  Phase,
  Both,
};

std::string to_string(Coupling c);
Coupling coupling_from_string(const std::string& s);

struct Beam {
  double wavelength = 1e-3;
  double speed = 1.0;
  double t_emit = 0.0;
  int quadrature_points = 32;
  Coupling coupling = Coupling::Amplitude;
  bool operator==(const Beam&) const = default;
};

std::vector<std::string> problems(const Beam& b);
void validate(const Beam& b);

/// Unit-modulus exp(2 pi i L / wavelength) over the source-slit-screen path
/// length L, times sinc(pi w sin(theta) / wavelength) when w > 0.
std::complex<double> free_amplitude(const SlitGeometry& geom, Slit slit, double x_screen,
                                    double wavelength);

/// Mean of sum_a h_aa / 4 over the polyline (midpoint rule, `quadrature_points`
/// per segment, length-weighted); the time coordinate advances from t_emit
/// at `speed`.
double path_averaged_h(const ModeEnsemble& ens, const SlitGeometry& geom, Slit slit,
                       double x_screen, double t_emit, double speed,
                       int quadrature_points = 32);

/// 2 pi / wavelength times the excess proper length of the path,
/// sum over elements of (sqrt(-ds^2(eta + h, (0, n ds))) - ds). Throws
/// LinearizationError if the spatial interval turns non-space-like.
double path_phase_shift(const ModeEnsemble& ens, const SlitGeometry& geom, Slit slit,
                        double x_screen, double t_emit, double speed, double wavelength,
                        int quadrature_points = 32);

struct PathAmplitude {
  std::complex<double> baseline;
  double modulation = 0.0;
  std::complex<double> perturbed;
};

/// (1 + h_path) baseline; throws LinearizationError for |h_path| >= 1.
std::complex<double> perturbed_path_amplitude(std::complex<double> baseline, double h_path);

/// |A1 + A2|^2 at every screen sample; `ens == nullptr` gives the
/// unperturbed pattern.
Eigen::VectorXd screen_intensity(const SlitGeometry& geom, const Beam& beam,
                                 const ModeEnsemble* ens);

/// (Imax - Imin) / (Imax + Imin) over the central five fringes, with the
/// fringe period estimated from crossings of the mean. Throws InputError
/// for fewer than 16 samples and DomainError when max(I) <= 0.
double fringe_visibility(std::span<const double> intensity);

/// Same, over intensity[begin, end).
double fringe_visibility(std::span<const double> intensity, std::size_t begin,
                         std::size_t end);

/// Screen-sample range [begin, end) spanning the central five fringes of
/// spacing wavelength L2 / d.
std::pair<std::size_t, std::size_t> central_fringe_window(const SlitGeometry& geom,
                                                          double wavelength);

/// Mean distance between adjacent interior maxima (parabolic refinement)
/// within [begin, end); 0 if fewer than two maxima.
double measured_fringe_spacing(std::span<const double> positions,
                               std::span<const double> intensity, std::size_t begin,
                               std::size_t end);

struct DoubleSlitExperiment {
  SlitGeometry geometry;
  Beam beam;
  BackgroundSpec background;
  int realizations = 100;
  std::uint64_t seed = 0;
  bool operator==(const DoubleSlitExperiment&) const = default;
};

struct InterferenceResult {
  std::vector<double> positions;
  std::vector<double> mean_intensity;
  std::vector<double> standard_error;
  int realizations = 0;
  double visibility = 0.0;
  /// Jackknife standard error of `visibility` over realizations.
  double visibility_stderr = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> substream_seeds;
  Coupling coupling = Coupling::Amplitude;
};

/// Realization r uses background seed substream_seed(seed, r). Throws the
/// failing realization's error with its substream seed appended.
InterferenceResult monte_carlo_pattern(const DoubleSlitExperiment& exp);

}  // namespace stochmetric
