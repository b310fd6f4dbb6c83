#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "stochmetric/metric_background.hpp"

namespace stochmetric {

/// Electric curvature components R_i0j0 (1/m^2), i, j spatial.
struct CurvatureSample {
  Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
};

struct DeviationState {
  Eigen::Vector3d ell = Eigen::Vector3d::Zero();
  Eigen::Vector3d ell_dot = Eigen::Vector3d::Zero();
  double tau = 0.0;
};

/// R_i0j0 = -1/2 d^2 h_ij / dt^2 / c^2, summed analytically over modes.
CurvatureSample curvature_at(const ModeEnsemble& ens, const SpacetimePoint& p);

/// Curvature contributed by one mode.
CurvatureSample mode_curvature_at(const PlaneWaveMode& mode, const SpacetimePoint& p,
                                  double c);

struct OscillationFrequency {
  /// c sqrt(|R|); for unstable curvature this is the e-folding rate.
  double omega = 0.0;
  /// R < 0: exponential rather than oscillatory separation.
  bool unstable = false;
};

OscillationFrequency oscillation_frequency(double r1010, double c);

/// Curvature as a function of proper time along the pair's worldline.
using CurvatureSource = std::function<CurvatureSample(double tau)>;

/// Curvature of `ens` sampled at the fixed spatial point of `origin`, with
/// time origin.t + tau.
CurvatureSource ensemble_curvature_source(const ModeEnsemble& ens, SpacetimePoint origin);

CurvatureSource constant_curvature_source(const Eigen::Matrix3d& R);

/// Fixed-step classical RK4 for ell'' = -c^2 R(tau) ell. Returns steps + 1
/// states including the initial one. Throws PrecisionError (with a suggested
/// dt) when dt * max|omega| >= 0.1 at any stage.
std::vector<DeviationState> integrate_deviation(const DeviationState& initial,
                                                const CurvatureSource& curvature,
                                                double c, double dt, int steps);

/// ell0 exp(i omega t); the spatial factor is absorbed into ell0.
inline std::complex<double> closed_form_deviation(double ell0, double omega, double t) {
  return ell0 * std::polar(1.0, omega * t);
}

struct ModePhase {
  double omega = 0.0;
  double phase = 0.0;
  bool unstable = false;
};

/// Per-mode Phi(j) = omega(j) t with omega(j) = c sqrt(R^1_010(j)) from the
/// mode's own curvature at p. Unstable modes report zero phase.
std::vector<ModePhase> phase_accumulation(const ModeEnsemble& ens, const SpacetimePoint& p,
                                          double t);

}  // namespace stochmetric
