#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "stochmetric/sym_tensor.hpp"

namespace stochmetric {

inline constexpr double kSpeedOfLightSI = 299792458.0;

struct SpacetimePoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  /// Contravariant coordinates (c t, x, y, z).
  Eigen::Vector4d coords(double c) const { return {c * t, x, y, z}; }
  bool operator==(const SpacetimePoint&) const = default;
};

/// One harmonic metric perturbation e_mn exp(i(k_g x^g + phase)) + c.c.
/// `wavevector` holds the covariant k_mu = (w/c, -w n/c) for a wave moving
/// along the unit vector n.
struct PlaneWaveMode {
  SymTensor4cd polarization;
  Eigen::Vector4d wavevector = Eigen::Vector4d::Zero();
  double phase = 0.0;

  /// Angular frequency w = c k_0.
  double angular_frequency(double c) const { return c * wavevector[0]; }
  Eigen::Vector3d direction() const;
};

struct BackgroundSpec {
  int mode_count = 64;
  double strain_rms = 1e-3;
  double f_min = 1.0;
  double f_max = 10.0;
  double polarization_plus = 1.0;
  double polarization_cross = 1.0;
  bool isotropic = true;
  /// Speed of light used for k_0 = w/c. Set to 1 for geometric units.
  double speed_of_light = kSpeedOfLightSI;
  double linearization_bound = 0.1;

  bool operator==(const BackgroundSpec&) const = default;
};

/// Every violated invariant as "background.<field>: reason".
std::vector<std::string> problems(const BackgroundSpec& spec);
/// Throws ConfigError listing problems(spec), if any.
void validate(const BackgroundSpec& spec);

struct ModeEnsemble {
  std::vector<PlaneWaveMode> modes;
  std::uint64_t seed = 0;
  BackgroundSpec spec;

  double c() const { return spec.speed_of_light; }
  /// Shortest wavelength 2 pi / |k_spatial| over the modes; +inf if empty.
  double shortest_wavelength() const;
};

/// Isotropic directions, log-uniform frequencies in [f_min, f_max], Gaussian
/// TT polarization amplitudes scaled so that E[h_ij h_ij / 2] = strain_rms^2
/// at any point. Pure function of (spec, seed).
ModeEnsemble generate_background(const BackgroundSpec& spec, std::uint64_t seed);

/// h_mn(p) = sum over modes of 2 Re[e_mn exp(i(k_g x^g + phase))].
SymTensor4d evaluate_perturbation(const ModeEnsemble& ens, const SpacetimePoint& p);

/// Contribution of a single mode (c needed to map t onto x^0).
SymTensor4d evaluate_mode(const PlaneWaveMode& mode, const SpacetimePoint& p, double c);

struct MetricSample {
  SymTensor4d g;
  /// max|h| above the ensemble's linearization bound.
  bool exceeds_linear_bound = false;
};

/// g = eta + h(p), eta = diag(+1,-1,-1,-1).
MetricSample metric_at(const ModeEnsemble& ens, const SpacetimePoint& p);

/// k_m e^m_n - 1/2 k_n e^m_m for n = 0..3, indices raised with eta.
Eigen::Vector4cd harmonic_gauge_residual(const PlaneWaveMode& mode);

/// max|gauge residual| / (max|e| * max|k_mu|); 0 for a zero mode.
double relative_gauge_residual(const PlaneWaveMode& mode);

/// |eta^mn k_m k_n| / |k|^2 with |k|^2 the Euclidean sum of squares.
double relative_null_residual(const PlaneWaveMode& mode);

/// Central finite-difference d'Alembertian eta^mn d_m d_n h at p, with the
/// same `step` in x^0 = c t and in each spatial axis. Throws PrecisionError
/// if step is not below a quarter of the shortest wavelength.
SymTensor4d vacuum_wave_residual(const ModeEnsemble& ens, const SpacetimePoint& p,
                                 double step);

/// Transverse-traceless basis tensors (e+, ex) for propagation direction n.
std::array<Eigen::Matrix3d, 2> tt_basis(const Eigen::Vector3d& n);

}  // namespace stochmetric
