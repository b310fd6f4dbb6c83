#include "stochmetric/double_slit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stochmetric/errors.hpp"
#include "stochmetric/random.hpp"

namespace stochmetric {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(std::vector<std::string>& out, bool ok, const std::string& field,
             const std::string& why) {
  if (!ok) out.push_back(field + ": " + why);
}

struct Polyline {
  Eigen::Vector3d source;
  Eigen::Vector3d slit;
  Eigen::Vector3d screen;
};

Polyline path_of(const SlitGeometry& g, Slit slit, double x_screen) {
  const double xs = slit == Slit::One ? 0.5 * g.d : -0.5 * g.d;
  return {Eigen::Vector3d::Zero(), Eigen::Vector3d(xs, 0.0, g.L1),
          Eigen::Vector3d(x_screen, 0.0, g.L1 + g.L2)};
}

// Length-weighted integrals over one straight segment.
struct SegmentSums {
  double length = 0.0;
  double trace_integral = 0.0;   // integral of sum_a h_aa ds
  double excess_length = 0.0;    // integral of (sqrt(1 - h_nn) - 1) ds
};

SegmentSums integrate_segment(const ModeEnsemble& ens, const Eigen::Vector3d& from,
                              const Eigen::Vector3d& to, double t_start, double speed,
                              int nq, bool want_trace, bool want_length) {
  SegmentSums out;
  const Eigen::Vector3d delta = to - from;
  out.length = delta.norm();
  if (out.length == 0.0 || ens.modes.empty()) return out;
  const Eigen::Vector3d n = delta / out.length;
  const double ds = out.length / nq;
  const double c = ens.c();

  std::vector<cd> trace(ens.modes.size()), e_nn(ens.modes.size());
  for (std::size_t j = 0; j < ens.modes.size(); ++j) {
    const auto& e = ens.modes[j].polarization;
    trace[j] = e(0, 0) + e(1, 1) + e(2, 2) + e(3, 3);
    cd acc = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) acc += n[a] * n[b] * e(a + 1, b + 1);
    e_nn[j] = acc;
  }

  for (int q = 0; q < nq; ++q) {
    const double s = (q + 0.5) * ds;
    SpacetimePoint p;
    p.t = t_start + s / speed;
    const Eigen::Vector3d r = from + s * n;
    p.x = r.x();
    p.y = r.y();
    p.z = r.z();
    const Eigen::Vector4d x = p.coords(c);
    double h_trace = 0.0, h_nn = 0.0;
    for (std::size_t j = 0; j < ens.modes.size(); ++j) {
      const auto& m = ens.modes[j];
      const cd rot = std::polar(1.0, m.wavevector.dot(x) + m.phase);
      if (want_trace) h_trace += 2.0 * (trace[j] * rot).real();
      if (want_length) h_nn += 2.0 * (e_nn[j] * rot).real();
    }
    out.trace_integral += h_trace * ds;
    if (want_length) {
      const double stretch = 1.0 - h_nn;
      if (!(stretch > 0.0))
        throw LinearizationError("path interval is not space-like (h_nn = " +
                                 std::to_string(h_nn) + ")");
      out.excess_length += (std::sqrt(stretch) - 1.0) * ds;
    }
  }
  return out;
}

// Both path integrals for one slit and screen point, reusing a precomputed
// source-to-slit segment when given.
struct PathIntegrals {
  double h_average = 0.0;
  double phase_shift = 0.0;
};

PathIntegrals integrate_path(const ModeEnsemble& ens, const Polyline& path,
                             const SegmentSums& first, double t_emit, double speed,
                             double wavelength, int nq, bool want_trace, bool want_length) {
  const SegmentSums second = integrate_segment(ens, path.slit, path.screen,
                                               t_emit + first.length / speed, speed, nq,
                                               want_trace, want_length);
  const double total = first.length + second.length;
  PathIntegrals out;
  out.h_average = 0.25 * (first.trace_integral + second.trace_integral) / total;
  out.phase_shift = kTwoPi / wavelength * (first.excess_length + second.excess_length);
  return out;
}

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double SlitGeometry::screen_x(int i) const {
  return -screen_half_width + 2.0 * screen_half_width * i / (screen_samples - 1);
}

std::vector<double> SlitGeometry::screen_positions() const {
  std::vector<double> xs(static_cast<std::size_t>(screen_samples));
  for (int i = 0; i < screen_samples; ++i) xs[i] = screen_x(i);
  return xs;
}

std::vector<std::string> problems(const SlitGeometry& g) {
  std::vector<std::string> out;
  require(out, std::isfinite(g.L1) && g.L1 > 0.0, "geometry.L1", "must be > 0");
  require(out, std::isfinite(g.L2) && g.L2 > 0.0, "geometry.L2", "must be > 0");
  require(out, std::isfinite(g.d) && g.d > 0.0, "geometry.d", "must be > 0");
  require(out, std::isfinite(g.w) && g.w >= 0.0, "geometry.w", "must be >= 0");
  require(out, std::isfinite(g.screen_half_width) && g.screen_half_width > 0.0,
          "geometry.screen_half_width", "must be > 0");
  require(out, g.screen_samples >= 16, "geometry.screen_samples", "must be >= 16");
  return out;
}

void validate(const SlitGeometry& g) {
  if (auto issues = problems(g); !issues.empty()) throw ConfigError(std::move(issues));
}

std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::Amplitude: return "amplitude";
    case Coupling::Phase: return "phase";
    case Coupling::Both: return "both";
  }
  return "amplitude";
}

Coupling coupling_from_string(const std::string& s) {
  if (s == "amplitude") return Coupling::Amplitude;
  if (s == "phase") return Coupling::Phase;
  if (s == "both") return Coupling::Both;
  throw ConfigError("beam.coupling: expected amplitude, phase or both, got '" + s + "'");
}

std::vector<std::string> problems(const Beam& b) {
  std::vector<std::string> out;
  require(out, std::isfinite(b.wavelength) && b.wavelength > 0.0, "beam.wavelength", "must be > 0");
  require(out, std::isfinite(b.speed) && b.speed > 0.0, "beam.speed", "must be > 0");
  require(out, std::isfinite(b.t_emit), "beam.t_emit", "must be finite");
  require(out, b.quadrature_points >= 1, "beam.quadrature_points", "must be >= 1");
  return out;
}

void validate(const Beam& b) {
  if (auto issues = problems(b); !issues.empty()) throw ConfigError(std::move(issues));
}

std::complex<double> free_amplitude(const SlitGeometry& geom, Slit slit, double x_screen,
                                    double wavelength) {
  if (!(wavelength > 0.0)) throw DomainError("free_amplitude: wavelength must be > 0");
  const Polyline p = path_of(geom, slit, x_screen);
  const Eigen::Vector3d leg2 = p.screen - p.slit;
  const double length = (p.slit - p.source).norm() + leg2.norm();
  cd amp = std::polar(1.0, kTwoPi * std::fmod(length / wavelength, 1.0));
  if (geom.w > 0.0) {
    const double sin_theta = leg2.x() / leg2.norm();
    const double arg = std::numbers::pi * geom.w * sin_theta / wavelength;
    amp *= arg == 0.0 ? 1.0 : std::sin(arg) / arg;
  }
  return amp;
}

double path_averaged_h(const ModeEnsemble& ens, const SlitGeometry& geom, Slit slit,
                       double x_screen, double t_emit, double speed, int quadrature_points) {
  if (!(speed > 0.0)) throw DomainError("path_averaged_h: speed must be > 0");
  const Polyline p = path_of(geom, slit, x_screen);
  const SegmentSums first =
      integrate_segment(ens, p.source, p.slit, t_emit, speed, quadrature_points, true, false);
  return integrate_path(ens, p, first, t_emit, speed, 1.0, quadrature_points, true, false)
      .h_average;
}

double path_phase_shift(const ModeEnsemble& ens, const SlitGeometry& geom, Slit slit,
                        double x_screen, double t_emit, double speed, double wavelength,
                        int quadrature_points) {
  if (!(speed > 0.0)) throw DomainError("path_phase_shift: speed must be > 0");
  const Polyline p = path_of(geom, slit, x_screen);
  const SegmentSums first =
      integrate_segment(ens, p.source, p.slit, t_emit, speed, quadrature_points, false, true);
  return integrate_path(ens, p, first, t_emit, speed, wavelength, quadrature_points, false,
                        true)
      .phase_shift;
}

std::complex<double> perturbed_path_amplitude(std::complex<double> baseline, double h_path) {
  if (!(std::abs(h_path) < 1.0))
    throw LinearizationError("perturbed_path_amplitude: |h_path| = " +
                             std::to_string(std::abs(h_path)) + " >= 1");
  return (1.0 + h_path) * baseline;
}

Eigen::VectorXd screen_intensity(const SlitGeometry& geom, const Beam& beam,
                                 const ModeEnsemble* ens) {
  validate(geom);
  validate(beam);
  const bool want_trace = beam.coupling != Coupling::Phase;
  const bool want_length = beam.coupling != Coupling::Amplitude;
  const int nq = beam.quadrature_points;

  std::array<SegmentSums, 2> first{};
  if (ens != nullptr)
    for (Slit s : {Slit::One, Slit::Two}) {
      const Polyline p = path_of(geom, s, 0.0);
      first[static_cast<int>(s) - 1] = integrate_segment(*ens, p.source, p.slit, beam.t_emit,
                                                         beam.speed, nq, want_trace, want_length);
    }

  Eigen::VectorXd I(geom.screen_samples);
  for (int i = 0; i < geom.screen_samples; ++i) {
    const double x = geom.screen_x(i);
    cd total = 0.0;
    for (Slit s : {Slit::One, Slit::Two}) {
      cd amp = free_amplitude(geom, s, x, beam.wavelength);
      if (ens != nullptr) {
        const PathIntegrals path =
            integrate_path(*ens, path_of(geom, s, x), first[static_cast<int>(s) - 1],
                           beam.t_emit, beam.speed, beam.wavelength, nq, want_trace,
                           want_length);
        amp = perturbed_path_amplitude(amp, want_trace ? path.h_average : 0.0);
        if (want_length) amp *= std::polar(1.0, path.phase_shift);
      }
      total += amp;
    }
    I[i] = std::norm(total);
  }
  return I;
}

double fringe_visibility(std::span<const double> intensity, std::size_t begin,
                         std::size_t end) {
  if (intensity.size() < 16) throw InputError("fringe_visibility: need >= 16 samples");
  end = std::min(end, intensity.size());
  if (begin >= end) throw InputError("fringe_visibility: empty window");
  const auto [lo, hi] = std::minmax_element(intensity.begin() + begin, intensity.begin() + end);
  if (!(*hi > 0.0)) throw DomainError("fringe_visibility: undefined for a non-positive pattern");
  return (*hi - *lo) / (*hi + *lo);
}

double fringe_visibility(std::span<const double> intensity) {
  if (intensity.size() < 16) throw InputError("fringe_visibility: need >= 16 samples");
  const std::size_t n = intensity.size();
  double mean = 0.0;
  for (double v : intensity) mean += v;
  mean /= static_cast<double>(n);
  std::size_t crossings = 0;
  for (std::size_t i = 1; i < n; ++i)
    if ((intensity[i - 1] - mean) * (intensity[i] - mean) < 0.0) ++crossings;
  if (crossings < 2) return fringe_visibility(intensity, 0, n);
  // Two crossings per period.
  const double period = 2.0 * static_cast<double>(n) / static_cast<double>(crossings);
  const double half_span = 2.5 * period;
  const double centre = 0.5 * static_cast<double>(n - 1);
  const auto begin = static_cast<std::size_t>(std::max(0.0, std::floor(centre - half_span)));
  const auto end = static_cast<std::size_t>(
      std::min(static_cast<double>(n), std::ceil(centre + half_span) + 1.0));
  return fringe_visibility(intensity, begin, end);
}

std::pair<std::size_t, std::size_t> central_fringe_window(const SlitGeometry& geom,
                                                          double wavelength) {
  const double half_span = 2.5 * wavelength * geom.L2 / geom.d;
  std::size_t begin = static_cast<std::size_t>(geom.screen_samples), end = 0;
  for (int i = 0; i < geom.screen_samples; ++i)
    if (std::abs(geom.screen_x(i)) <= half_span) {
      begin = std::min(begin, static_cast<std::size_t>(i));
      end = std::max(end, static_cast<std::size_t>(i) + 1);
    }
  if (end - begin < 2) return {0, static_cast<std::size_t>(geom.screen_samples)};
  return {begin, end};
}

double measured_fringe_spacing(std::span<const double> positions,
                               std::span<const double> intensity, std::size_t begin,
                               std::size_t end) {
  end = std::min(end, intensity.size());
  std::vector<double> peaks;
  for (std::size_t i = std::max<std::size_t>(begin, 1); i + 1 < end; ++i) {
    const double l = intensity[i - 1], m = intensity[i], r = intensity[i + 1];
    if (m > l && m >= r) {
      const double denom = l - 2.0 * m + r;
      const double shift = denom != 0.0 ? 0.5 * (l - r) / denom : 0.0;
      const double step = positions[i + 1] - positions[i];
      peaks.push_back(positions[i] + shift * step);
    }
  }
  if (peaks.size() < 2) return 0.0;
  return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

InterferenceResult monte_carlo_pattern(const DoubleSlitExperiment& exp) {
  validate(exp.geometry);
  validate(exp.beam);
  validate(exp.background);
  if (exp.realizations < 2) throw ConfigError("experiment.realizations: must be >= 2");

  const int n_real = exp.realizations;
  const int n_x = exp.geometry.screen_samples;
  InterferenceResult result;
  result.positions = exp.geometry.screen_positions();
  result.realizations = n_real;
  result.seed = exp.seed;
  result.coupling = exp.beam.coupling;

  Eigen::MatrixXd samples(n_x, n_real);
  for (int r = 0; r < n_real; ++r) {
    const std::uint64_t sub = substream_seed(exp.seed, static_cast<std::uint64_t>(r));
    result.substream_seeds.push_back(sub);
    try {
      const ModeEnsemble ens = generate_background(exp.background, sub);
      samples.col(r) = screen_intensity(exp.geometry, exp.beam, &ens);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " [realization " << r << ", substream seed " << sub << "]";
      throw Error(e.kind(), msg.str());
    }
  }

  // Means shifted by the first realization so identical samples reproduce it exactly.
  Eigen::VectorXd mean(n_x);
  result.mean_intensity.resize(n_x);
  result.standard_error.resize(n_x);
  for (int i = 0; i < n_x; ++i) {
    const double ref = samples(i, 0);
    CompensatedSum shift;
    for (int r = 0; r < n_real; ++r) shift.add(samples(i, r) - ref);
    mean[i] = ref + shift.value() / n_real;
    CompensatedSum sq;
    for (int r = 0; r < n_real; ++r) {
      const double dev = samples(i, r) - mean[i];
      sq.add(dev * dev);
    }
    result.mean_intensity[i] = mean[i];
    result.standard_error[i] = std::sqrt(sq.value() / (n_real - 1) / n_real);
  }

  const auto [begin, end] = central_fringe_window(exp.geometry, exp.beam.wavelength);
  result.visibility = fringe_visibility(result.mean_intensity, begin, end);

  // Jackknife over realizations.
  std::vector<double> loo(static_cast<std::size_t>(n_real));
  std::vector<double> buffer(static_cast<std::size_t>(n_x));
  for (int r = 0; r < n_real; ++r) {
    for (int i = 0; i < n_x; ++i)
      buffer[i] = mean[i] + (mean[i] - samples(i, r)) / (n_real - 1);
    loo[r] = fringe_visibility(buffer, begin, end);
  }
  double loo_shift = 0.0;
  for (double v : loo) loo_shift += v - loo[0];
  const double loo_mean = loo[0] + loo_shift / n_real;
  double acc = 0.0;
  for (double v : loo) acc += (v - loo_mean) * (v - loo_mean);
  result.visibility_stderr = std::sqrt((n_real - 1.0) / n_real * acc);
  return result;
}

}  // namespace stochmetric
