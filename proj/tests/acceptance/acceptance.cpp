// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "stochmetric/config.hpp"
#include "stochmetric/deviation_dynamics.hpp"
#include "stochmetric/double_slit.hpp"
#include "stochmetric/errors.hpp"
#include "stochmetric/experiment.hpp"
#include "stochmetric/metric_background.hpp"
#include "stochmetric/probability_model.hpp"
#include "stochmetric/random.hpp"
#include "stochmetric/wave_solvers.hpp"

using namespace stochmetric;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// 1. Null wavevectors and harmonic gauge over 20 random specs.
Outcome gauge_dispersion() {
  Rng rng(101);
  double worst_null = 0.0, worst_gauge = 0.0;
  std::size_t modes = 0;
  for (int s = 0; s < 20; ++s) {
    BackgroundSpec spec;
    spec.mode_count = 500;
    spec.strain_rms = std::pow(10.0, rng.uniform(-8.0, -1.0));
    spec.f_min = std::pow(10.0, rng.uniform(-4.0, 2.0));
    spec.f_max = spec.f_min * rng.uniform(1.0, 1000.0);
    spec.polarization_plus = rng.uniform(0.0, 2.0);
    spec.polarization_cross = rng.uniform(0.0, 2.0);
    spec.isotropic = s % 5 != 0;
    spec.speed_of_light = s % 2 ? 1.0 : kSpeedOfLightSI;
    const ModeEnsemble ens = generate_background(spec, 1000 + s);
    for (const auto& m : ens.modes) {
      worst_null = std::max(worst_null, relative_null_residual(m));
      worst_gauge = std::max(worst_gauge, relative_gauge_residual(m));
    }
    modes += ens.modes.size();
  }
  return {modes >= 10000 && worst_null < 1e-12 && worst_gauge < 1e-12,
          fmt("%zu modes, max null %.2e, max gauge %.2e", modes, worst_null, worst_gauge)};
}

// 2. Second-order convergence of the finite-difference box operator.
Outcome wave_equation_convergence() {
  BackgroundSpec spec;
  spec.mode_count = 1;
  spec.speed_of_light = 1.0;
  spec.f_min = 0.5;
  spec.f_max = 2.0;
  double lo = 1e9, hi = -1e9;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ModeEnsemble ens = generate_background(spec, seed);
    const double step0 = 0.08 * ens.shortest_wavelength();
    const SpacetimePoint p{0.3, -0.2, 0.7, 0.1};
    std::vector<double> r;
    for (int h = 0; h < 4; ++h)
      r.push_back(vacuum_wave_residual(ens, p, step0 / std::pow(2.0, h)).max_abs());
    for (int h = 0; h < 3; ++h) {
      const double order = std::log2(r[h] / r[h + 1]);
      lo = std::min(lo, order);
      hi = std::max(hi, order);
    }
  }
  return {lo >= 1.9 && hi <= 2.1, fmt("5 single-mode ensembles, orders in [%.4f, %.4f]", lo, hi)};
}

// 3. Constant-curvature deviation against l0 cos(wt).
Outcome deviation_oracle() {
  const double omega = 3.0;
  const double T = 2.0 * kPi / omega;
  Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
  R(0, 0) = omega * omega;
  DeviationState s0;
  s0.ell = {2.0, 0.0, 0.0};
  auto max_error = [&](int per_period) {
    const int steps = 10 * per_period;
    const auto traj = integrate_deviation(s0, constant_curvature_source(R), 1.0, T / per_period, steps);
    double worst = 0.0;
    for (const auto& s : traj)
      worst = std::max(worst, std::abs(s.ell.x() - closed_form_deviation(2.0, omega, s.tau).real()));
    return worst / 2.0;
  };
  const double rel = max_error(1000);
  double lo = 1e9, hi = -1e9;
  const std::vector<int> levels{100, 200, 400, 800};
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const double order = std::log2(max_error(levels[i]) / max_error(levels[i + 1]));
    lo = std::min(lo, order);
    hi = std::max(hi, order);
  }
  return {rel < 1e-6 && lo >= 3.8 && hi <= 4.2,
          fmt("max relative error %.2e at T/1000, orders in [%.4f, %.4f]", rel, lo, hi)};
}

// 4. Probability axioms.
Outcome probability_axioms() {
  const double sigma = 0.35;
  const bool unit = interval_probability(0.0, sigma) == 1.0;
  const double p6 = interval_probability(6.0 * sigma, sigma);
  Rng rng(404);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-8.0, 8.0) * sigma;
    const double b = rng.uniform(-8.0, 8.0) * sigma;
    const auto [near, far] = std::minmax(std::abs(a), std::abs(b));
    if (interval_probability(near, sigma) < interval_probability(far, sigma)) ++violations;
  }
  std::vector<IntervalTriple> triples{{0, 0, 0}, {3 * sigma, 3 * sigma, 6 * sigma}};
  for (int i = 0; i < 200; ++i) {
    const double d21 = rng.uniform(0.0, 4.0) * sigma, d32 = rng.uniform(0.0, 4.0) * sigma;
    triples.push_back({d21, d32, rng.uniform(0.0, d21 + d32)});
  }
  const AxiomReport report = check_probability_axioms(sigma, triples);
  const bool documented = !report.triples[0].literal_inequality_holds &&
                          !report.triples[1].literal_inequality_holds && report.literal_failures > 0;
  return {unit && p6 < 1e-7 && violations == 0 && report.monotonicity_failures == 0 && documented,
          fmt("P(0)=%g, P(6s)=%.3e, %d monotonicity violations in 1000 pairs, axiom-3 literal "
              "failures %d/%zu (recorded)",
              interval_probability(0.0, sigma), p6, violations, report.literal_failures,
              report.triples.size())};
}

WaveFunctionGrid free_packet(int cells) {
  WaveFunctionGrid w;
  w.shape = make_line(cells, 11.0);
  w.psi = gaussian_packet(w.shape, 1.0, 0.0);
  w.U = Eigen::VectorXd::Zero(w.shape.size());
  return w;
}

double width(const WaveFunctionGrid& w) {
  double n = 0, m1 = 0, m2 = 0;
  for (Eigen::Index i = 0; i < w.psi.size(); ++i) {
    const double rho = std::norm(w.psi[i]), x = w.shape.x(i);
    n += rho;
    m1 += rho * x;
    m2 += rho * x * x;
  }
  m1 /= n;
  return std::sqrt(m2 / n - m1 * m1);
}

// 5. Norm, free spreading and harmonic stationarity.
Outcome schrodinger_solver() {
  WaveFunctionGrid moving;
  moving.shape = make_line(1024, 11.0);
  moving.psi = gaussian_packet(moving.shape, 1.0, 2.0, -3.0);
  moving.U = harmonic_potential(moving.shape, moving.mass, 0.3);
  const double drift = std::abs(evolve(moving, 1e-2, 1000).norm() / moving.norm() - 1.0);

  const WaveFunctionGrid spread = evolve(free_packet(1024), 1e-2, 100);
  const double hbar = spread.hbar_eff();
  const double expected = std::sqrt(1.0 + std::pow(hbar * 1.0 / 2.0, 2));
  const double width_err = std::abs(width(spread) / expected - 1.0);

  WaveFunctionGrid ground;
  ground.shape = make_line(1024, 8.0);
  ground.U = harmonic_potential(ground.shape, ground.mass, 1.0);
  ground.psi = gaussian_packet(ground.shape, std::sqrt(ground.hbar_eff() / (2.0 * ground.mass)), 0.0);
  const Eigen::VectorXd rho0 = ground.psi.cwiseAbs2();
  const Eigen::VectorXd rho1 = evolve(ground, 1e-3, 100).psi.cwiseAbs2();
  const double stationary = (rho1 - rho0).cwiseAbs().maxCoeff() / rho0.maxCoeff();

  return {drift < 1e-10 && width_err < 1e-3 && stationary < 1e-6,
          fmt("norm drift %.2e over 1000 steps, width error %.2e, ground-state density change %.2e",
              drift, width_err, stationary)};
}

// 6. Continuity converges at second order; HJ + Q vanishes.
Outcome derivation_gap() {
  auto continuity = [](int cells, double dt, int steps) {
    WaveFunctionGrid w;
    w.shape = make_line(cells, 11.0);
    w.psi = gaussian_packet(w.shape, 1.0, 1.0);
    w.U = Eigen::VectorXd::Zero(w.shape.size());
    return derivation_gap_report(w, steps, dt, steps).worst_continuity;
  };
  const double c1 = continuity(256, 8e-3, 25);
  const double c2 = continuity(512, 4e-3, 50);
  const double c3 = continuity(1024, 2e-3, 100);
  const double o1 = std::log2(c1 / c2), o2 = std::log2(c2 / c3);
  const DerivationGapReport gap = derivation_gap_report(free_packet(1024), 100, 1e-3);
  const bool ok = o1 > 1.8 && o1 < 2.2 && o2 > 1.8 && o2 < 2.2 && gap.worst_relative_gap < 0.05 &&
                  gap.max_q > 0.0;
  return {ok, fmt("continuity %.2e -> %.2e -> %.2e (orders %.3f, %.3f); max|hj+Q| / max|Q| = %.2e "
                  "with max|Q| = %.3f",
                  c1, c2, c3, o1, o2, gap.worst_relative_gap, gap.max_q)};
}

// 7. Zero-strain far-field pattern.
Outcome double_slit_baseline() {
  DoubleSlitExperiment exp;
  exp.geometry.L1 = 1.0;
  exp.geometry.L2 = 1000.0;
  exp.geometry.d = 1.0;
  exp.geometry.screen_half_width = 2.5;
  exp.geometry.screen_samples = 501;
  exp.beam.wavelength = 1e-3;
  exp.beam.coupling = Coupling::Both;
  exp.background.strain_rms = 0.0;
  exp.background.mode_count = 8;
  exp.realizations = 2;
  const InterferenceResult r = monte_carlo_pattern(exp);
  const auto [begin, end] = central_fringe_window(exp.geometry, exp.beam.wavelength);
  const double spacing =
      measured_fringe_spacing(r.positions, r.mean_intensity, begin, end);
  const double expected = exp.beam.wavelength * exp.geometry.L2 / exp.geometry.d;
  const double rel = std::abs(spacing / expected - 1.0);
  return {r.visibility > 0.999 && rel < 0.02,
          fmt("visibility %.6f, fringe spacing %.6f vs %.6f (%.2e relative)", r.visibility, spacing,
              expected, rel)};
}

// 8. Mean-pattern visibility against strain.
Outcome double_slit_response() {
  DoubleSlitExperiment exp;
  exp.geometry.L1 = 50.0;
  exp.geometry.L2 = 50.0;
  exp.geometry.d = 20.0;
  exp.geometry.screen_half_width = 8.0;
  exp.geometry.screen_samples = 128;
  exp.beam.wavelength = 1.0;
  exp.beam.speed = 0.1;
  exp.beam.quadrature_points = 32;
  exp.beam.coupling = Coupling::Both;
  exp.background.mode_count = 32;
  exp.background.f_min = 0.01;
  exp.background.f_max = 0.1;
  exp.background.speed_of_light = 1.0;
  exp.realizations = 500;
  exp.seed = 8;
  std::vector<InterferenceResult> results;
  std::string detail;
  for (double strain : {1e-3, 1e-2, 1e-1}) {
    exp.background.strain_rms = strain;
    results.push_back(monte_carlo_pattern(exp));
    detail += fmt("%sV(%.0e) = %.4f +- %.4f", detail.empty() ? "" : ", ", strain,
                  results.back().visibility, 1.96 * results.back().visibility_stderr);
  }
  const bool monotone = results[0].visibility >= results[1].visibility &&
                        results[1].visibility >= results[2].visibility;
  const double lower_small = results[0].visibility - 1.96 * results[0].visibility_stderr;
  const double upper_large = results[2].visibility + 1.96 * results[2].visibility_stderr;
  detail += fmt(" (95%% CIs, %d realizations each)", exp.realizations);

  // TT modes have vanishing h_aa trace, so amplitude-only coupling cannot respond.
  exp.beam.coupling = Coupling::Amplitude;
  exp.realizations = 100;
  const InterferenceResult amplitude_only = monte_carlo_pattern(exp);
  detail += fmt("; amplitude-only coupling at 1e-01: V = %.4f", amplitude_only.visibility);
  return {monotone && lower_small > upper_large, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Byte-identical reruns of every experiment kind.
Outcome reproducibility() {
  const std::vector<std::string> configs{
      R"([experiment]
kind = background-statistics
seed = 9
units = geometric
[background]
mode_count = 128
strain_rms = 1e-3
f_min = 1
f_max = 10
)",
      R"([experiment]
kind = deviation-trajectory
seed = 9
units = geometric
[background]
strain_rms = 1e-2
f_min = 0.1
f_max = 1
[deviation]
dt = 0.01
steps = 500
)",
      R"([experiment]
kind = derivation-gap
seed = 9
[probability]
mass = 1
sigma = 1
[grid]
cells = 512
dt = 0.005
steps = 50
)",
      R"([experiment]
kind = double-slit
seed = 9
realizations = 50
units = geometric
[background]
mode_count = 16
strain_rms = 1e-2
f_min = 0.01
f_max = 0.1
[geometry]
L1 = 50
L2 = 50
d = 20
screen_half_width = 8
screen_samples = 64
[beam]
wavelength = 1
speed = 0.1
coupling = both
)"};
  const fs::path root = fs::temp_directory_path() / "stochmetric_acceptance";
  fs::remove_all(root);
  int files = 0, mismatches = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentConfig c = parse_config(configs[i]);
    const fs::path a = root / (std::to_string(i) + "a"), b = root / (std::to_string(i) + "b");
    const RunManifest ma = run_experiment(c, a);
    const RunManifest mb = run_experiment(c, b);
    for (const auto& f : ma.outputs) {
      ++files;
      if (slurp(a / f.name) != slurp(b / f.name)) ++mismatches;
    }
    auto manifest = [](const fs::path& dir) {
      auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
      j.erase("started");
      j.erase("finished");
      return j.dump();
    };
    ++files;
    if (manifest(a) != manifest(b)) ++mismatches;
  }
  fs::remove_all(root);
  return {files > 0 && mismatches == 0,
          fmt("%d files across 4 experiment kinds, %d mismatches (manifest timestamps excluded)",
              files, mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gauge/dispersion suite", gauge_dispersion},
      {"wave-equation convergence", wave_equation_convergence},
      {"deviation oracle", deviation_oracle},
      {"probability axioms", probability_axioms},
      {"Schroedinger solver", schrodinger_solver},
      {"derivation-gap check", derivation_gap},
      {"double-slit baseline", double_slit_baseline},
      {"double-slit fluctuation response", double_slit_response},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
