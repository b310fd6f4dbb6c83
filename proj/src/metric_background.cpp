#include "stochmetric/metric_background.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stochmetric/errors.hpp"
#include "stochmetric/random.hpp"

namespace stochmetric {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// eta^{mm} for the diagonal Minkowski metric.
constexpr std::array<double, 4> kEtaDiag{1.0, -1.0, -1.0, -1.0};

void require(std::vector<std::string>& out, bool ok, const char* field, const std::string& why) {
  if (!ok) out.push_back(std::string("background.") + field + ": " + why);
}

}  // namespace

Eigen::Vector3d PlaneWaveMode::direction() const {
  const Eigen::Vector3d k = -wavevector.tail<3>();
  const double norm = k.norm();
  return norm > 0.0 ? Eigen::Vector3d(k / norm) : Eigen::Vector3d::Zero();
}

std::vector<std::string> problems(const BackgroundSpec& spec) {
  std::vector<std::string> out;
  require(out, spec.mode_count >= 1, "mode_count", "must be >= 1");
  require(out, std::isfinite(spec.strain_rms) && spec.strain_rms >= 0.0, "strain_rms",
          "must be finite and >= 0");
  require(out, std::isfinite(spec.f_min) && spec.f_min > 0.0, "f_min", "must be > 0");
  require(out, std::isfinite(spec.f_max) && spec.f_max > spec.f_min, "f_max",
          "must exceed f_min");
  require(out, spec.polarization_plus >= 0.0, "polarization_plus", "must be >= 0");
  require(out, spec.polarization_cross >= 0.0, "polarization_cross", "must be >= 0");
  require(out, spec.polarization_plus + spec.polarization_cross > 0.0, "polarization_plus",
          "polarization weights must not both be zero");
  require(out, std::isfinite(spec.speed_of_light) && spec.speed_of_light > 0.0,
          "speed_of_light", "must be > 0");
  require(out, spec.linearization_bound > 0.0, "linearization_bound", "must be > 0");
  return out;
}

void validate(const BackgroundSpec& spec) {
  if (auto issues = problems(spec); !issues.empty()) throw ConfigError(std::move(issues));
}

double ModeEnsemble::shortest_wavelength() const {
  double kmax = 0.0;
  for (const auto& m : modes)
    kmax = std::max({kmax, std::abs(m.wavevector[0]), m.wavevector.tail<3>().norm()});
  return kmax > 0.0 ? kTwoPi / kmax : std::numeric_limits<double>::infinity();
}

std::array<Eigen::Matrix3d, 2> tt_basis(const Eigen::Vector3d& n) {
  const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  const double phi = std::atan2(n.y(), n.x());
  const Eigen::Vector3d u(std::cos(theta) * std::cos(phi),
                          std::cos(theta) * std::sin(phi), -std::sin(theta));
  const Eigen::Vector3d v(-std::sin(phi), std::cos(phi), 0.0);
  return {u * u.transpose() - v * v.transpose(),
          u * v.transpose() + v * u.transpose()};
}

ModeEnsemble generate_background(const BackgroundSpec& spec, std::uint64_t seed) {
  validate(spec);
  ModeEnsemble ens;
  ens.seed = seed;
  ens.spec = spec;
  ens.modes.reserve(static_cast<std::size_t>(spec.mode_count));

  Rng rng(seed);
  // Each mode contributes 2 s^2 (w+^2 + wx^2) = 2 s^2 to E[h_ij h_ij / 2].
  const double s = spec.strain_rms / std::sqrt(2.0 * spec.mode_count);
  const double wsum = spec.polarization_plus + spec.polarization_cross;
  const double w_plus = std::sqrt(spec.polarization_plus / wsum);
  const double w_cross = std::sqrt(spec.polarization_cross / wsum);
  const double log_ratio = std::log(spec.f_max / spec.f_min);

  for (int j = 0; j < spec.mode_count; ++j) {
    // Fixed draw order per mode, independent of the isotropic flag.
    const double cos_theta = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, kTwoPi);
    const double f = spec.f_min * std::exp(log_ratio * rng.uniform());
    const double a_plus = s * w_plus * rng.normal();
    const double a_cross = s * w_cross * rng.normal();
    const double chi = rng.uniform(0.0, kTwoPi);
    const double phase = rng.uniform(0.0, kTwoPi);

    Eigen::Vector3d n(0.0, 0.0, 1.0);
    if (spec.isotropic) {
      const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
      n = {sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};
    }
    const auto basis = tt_basis(n);
    const std::complex<double> cross = a_cross * std::polar(1.0, chi);

    PlaneWaveMode mode;
    for (int i = 0; i < 3; ++i)
      for (int k = i; k < 3; ++k)
        mode.polarization(i + 1, k + 1) = a_plus * basis[0](i, k) + cross * basis[1](i, k);
    const double k0 = kTwoPi * f / spec.speed_of_light;
    mode.wavevector << k0, -k0 * n;
    mode.phase = phase;
    ens.modes.push_back(mode);
  }
  return ens;
}

SymTensor4d evaluate_mode(const PlaneWaveMode& mode, const SpacetimePoint& p, double c) {
  const double arg = mode.wavevector.dot(p.coords(c)) + mode.phase;
  const std::complex<double> rot = std::polar(1.0, arg);
  SymTensor4d h;
  for (int i = 0; i < 10; ++i) h.packed()[i] = 2.0 * (mode.polarization.packed()[i] * rot).real();
  return h;
}

SymTensor4d evaluate_perturbation(const ModeEnsemble& ens, const SpacetimePoint& p) {
  SymTensor4d h;
  for (const auto& m : ens.modes) h += evaluate_mode(m, p, ens.c());
  return h;
}

MetricSample metric_at(const ModeEnsemble& ens, const SpacetimePoint& p) {
  const SymTensor4d h = evaluate_perturbation(ens, p);
  MetricSample out;
  out.g = minkowski<double>() + h;
  out.exceeds_linear_bound = h.max_abs() > ens.spec.linearization_bound;
  return out;
}

Eigen::Vector4cd harmonic_gauge_residual(const PlaneWaveMode& mode) {
  const auto& e = mode.polarization;
  const auto& k = mode.wavevector;
  std::complex<double> trace = 0.0;
  for (int m = 0; m < 4; ++m) trace += kEtaDiag[m] * e(m, m);
  Eigen::Vector4cd res;
  for (int n = 0; n < 4; ++n) {
    std::complex<double> div = 0.0;
    for (int m = 0; m < 4; ++m) div += k[m] * kEtaDiag[m] * e(m, n);
    res[n] = div - 0.5 * k[n] * trace;
  }
  return res;
}

double relative_gauge_residual(const PlaneWaveMode& mode) {
  const double scale = mode.polarization.max_abs() * mode.wavevector.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return harmonic_gauge_residual(mode).cwiseAbs().maxCoeff() / scale;
}

double relative_null_residual(const PlaneWaveMode& mode) {
  const auto& k = mode.wavevector;
  const double norm2 = k.squaredNorm();
  if (norm2 == 0.0) return 0.0;
  const double kk = k[0] * k[0] - k.tail<3>().squaredNorm();
  return std::abs(kk) / norm2;
}

SymTensor4d vacuum_wave_residual(const ModeEnsemble& ens, const SpacetimePoint& p,
                                 double step) {
  if (!(step > 0.0)) throw PrecisionError("vacuum_wave_residual: step must be > 0");
  const double lambda = ens.shortest_wavelength();
  if (step >= 0.25 * lambda)
    throw PrecisionError("vacuum_wave_residual: step " + std::to_string(step) +
                         " is not below a quarter of the shortest wavelength " +
                         std::to_string(lambda));
  const double c = ens.c();
  const SymTensor4d centre = evaluate_perturbation(ens, p);
  const double inv_s2 = 1.0 / (step * step);

  auto second_difference = [&](int axis) {
    SpacetimePoint fwd = p, bwd = p;
    switch (axis) {
      case 0: fwd.t += step / c; bwd.t -= step / c; break;
      case 1: fwd.x += step; bwd.x -= step; break;
      case 2: fwd.y += step; bwd.y -= step; break;
      default: fwd.z += step; bwd.z -= step; break;
    }
    return (evaluate_perturbation(ens, fwd) - 2.0 * centre + evaluate_perturbation(ens, bwd)) *
           inv_s2;
  };

  SymTensor4d box = second_difference(0);
  for (int axis = 1; axis < 4; ++axis) box -= second_difference(axis);
  return box;
}

}  // namespace stochmetric
