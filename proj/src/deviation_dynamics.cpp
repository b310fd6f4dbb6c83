#include "stochmetric/deviation_dynamics.hpp"

#include <cmath>
#include <sstream>

#include "stochmetric/errors.hpp"

namespace stochmetric {

CurvatureSample mode_curvature_at(const PlaneWaveMode& mode, const SpacetimePoint& p,
                                  double c) {
  // d^2/dt^2 acting on exp(i k.x) gives -(c k_0)^2, so R = +1/2 k_0^2 h.
  const SymTensor4d h = evaluate_mode(mode, p, c);
  const double factor = 0.5 * mode.wavevector[0] * mode.wavevector[0];
  CurvatureSample out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.R(i, j) = factor * h(i + 1, j + 1);
  return out;
}

CurvatureSample curvature_at(const ModeEnsemble& ens, const SpacetimePoint& p) {
  CurvatureSample out;
  for (const auto& m : ens.modes) out.R += mode_curvature_at(m, p, ens.c()).R;
  return out;
}

OscillationFrequency oscillation_frequency(double r1010, double c) {
  return {c * std::sqrt(std::abs(r1010)), r1010 < 0.0};
}

CurvatureSource ensemble_curvature_source(const ModeEnsemble& ens, SpacetimePoint origin) {
  return [&ens, origin](double tau) {
    SpacetimePoint p = origin;
    p.t += tau;
    return curvature_at(ens, p);
  };
}

CurvatureSource constant_curvature_source(const Eigen::Matrix3d& R) {
  return [R](double) { return CurvatureSample{R}; };
}

namespace {

struct Derivative {
  Eigen::Vector3d d_ell;
  Eigen::Vector3d d_ell_dot;
};

void check_resolution(const Eigen::Matrix3d& R, double c, double dt) {
  const double rho = R.cwiseAbs().rowwise().sum().maxCoeff();  // bounds |eig|
  const double omega_max = c * std::sqrt(rho);
  if (dt * omega_max >= 0.1) {
    // Exact spectral radius before rejecting; the row-sum bound is cheap.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (R + R.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double omega = c * std::sqrt(es.eigenvalues().cwiseAbs().maxCoeff());
    if (dt * omega >= 0.1) {
      std::ostringstream msg;
      msg << "integrate_deviation: dt * omega = " << dt * omega
          << " violates the resolution guard (< 0.1); use dt <= " << 0.05 / omega;
      throw PrecisionError(msg.str());
    }
  }
}

}  // namespace

std::vector<DeviationState> integrate_deviation(const DeviationState& initial,
                                                const CurvatureSource& curvature,
                                                double c, double dt, int steps) {
  if (!(dt > 0.0)) throw PrecisionError("integrate_deviation: dt must be > 0");
  if (steps < 0) throw InputError("integrate_deviation: steps must be >= 0");

  std::vector<DeviationState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(initial);
  const double c2 = c * c;

  auto rhs = [&](const Eigen::Matrix3d& R, const Eigen::Vector3d& ell,
                 const Eigen::Vector3d& ell_dot) {
    return Derivative{ell_dot, -c2 * (R * ell)};
  };

  DeviationState s = initial;
  for (int n = 0; n < steps; ++n) {
    const Eigen::Matrix3d R0 = curvature(s.tau).R;
    const Eigen::Matrix3d Rh = curvature(s.tau + 0.5 * dt).R;
    const Eigen::Matrix3d R1 = curvature(s.tau + dt).R;
    check_resolution(R0, c, dt);
    check_resolution(Rh, c, dt);
    check_resolution(R1, c, dt);

    const Derivative k1 = rhs(R0, s.ell, s.ell_dot);
    const Derivative k2 = rhs(Rh, s.ell + 0.5 * dt * k1.d_ell, s.ell_dot + 0.5 * dt * k1.d_ell_dot);
    const Derivative k3 = rhs(Rh, s.ell + 0.5 * dt * k2.d_ell, s.ell_dot + 0.5 * dt * k2.d_ell_dot);
    const Derivative k4 = rhs(R1, s.ell + dt * k3.d_ell, s.ell_dot + dt * k3.d_ell_dot);

    s.ell += dt / 6.0 * (k1.d_ell + 2.0 * k2.d_ell + 2.0 * k3.d_ell + k4.d_ell);
    s.ell_dot += dt / 6.0 * (k1.d_ell_dot + 2.0 * k2.d_ell_dot + 2.0 * k3.d_ell_dot + k4.d_ell_dot);
    s.tau = initial.tau + (n + 1) * dt;
    out.push_back(s);
  }
  return out;
}

std::vector<ModePhase> phase_accumulation(const ModeEnsemble& ens, const SpacetimePoint& p,
                                          double t) {
  if (t < 0.0) throw DomainError("phase_accumulation: t must be >= 0");
  std::vector<ModePhase> out;
  out.reserve(ens.modes.size());
  for (const auto& m : ens.modes) {
    const double r1010 = mode_curvature_at(m, p, ens.c()).R(0, 0);
    const auto freq = oscillation_frequency(r1010, ens.c());
    out.push_back({freq.omega, freq.unstable ? 0.0 : freq.omega * t, freq.unstable});
  }
  return out;
}

}  // namespace stochmetric
