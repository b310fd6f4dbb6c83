#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stochmetric/double_slit.hpp"
#include "stochmetric/metric_background.hpp"
#include "stochmetric/wave_solvers.hpp"

namespace stochmetric {

enum class ExperimentKind { BackgroundStatistics, DeviationTrajectory, DerivationGap, DoubleSlit };

std::string to_string(ExperimentKind k);

struct ProbabilityConfig {
  double mass = 1.0;
  double sigma = 1.0;
  double timescale = 1.0;
  bool operator==(const ProbabilityConfig&) const = default;
};

enum class InitialState { Gaussian, PlaneWave, HarmonicGround };

struct GridConfig {
  int cells = 1024;
  int dims = 1;
  double half_length = 11.0;
  Boundary boundary = Boundary::Periodic;
  double dt = 1e-3;
  int steps = 100;
  int sample_every = 1;
  InitialState initial = InitialState::Gaussian;
  double packet_width = 1.0;
  double packet_momentum = 0.0;
  double packet_centre = 0.0;
  /// Harmonic trap frequency; 0 means free evolution.
  double harmonic_omega = 0.0;
  PhaseConvention convention = PhaseConvention::SOver2S0;
  double interior_threshold = 1e-3;
  bool operator==(const GridConfig&) const = default;
};

struct DeviationConfig {
  std::array<double, 3> ell{1.0, 0.0, 0.0};
  std::array<double, 3> ell_dot{0.0, 0.0, 0.0};
  SpacetimePoint origin;
  double dt = 1e-3;
  int steps = 1000;
  bool operator==(const DeviationConfig&) const = default;
};

struct StatisticsConfig {
  int sample_points = 1000;
  /// Points are drawn uniformly in [-box, box]^3 and t in [0, time_span].
  double box = 1e8;
  double time_span = 1.0;
  bool operator==(const StatisticsConfig&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::DoubleSlit;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int realizations = 100;
  bool geometric_units = false;

  BackgroundSpec background;
  SlitGeometry geometry;
  Beam beam;
  ProbabilityConfig probability;
  GridConfig grid;
  DeviationConfig deviation;
  StatisticsConfig statistics;

  bool operator==(const ExperimentConfig&) const = default;

  DoubleSlitExperiment double_slit() const;
};

/// Ordered key/value content of an INI-style document.
class IniDocument {
 public:
  /// Syntax errors are appended to `errors` as "line N: ...".
  static IniDocument parse(const std::string& text, std::vector<std::string>& errors);

  /// Sets section.key, replacing any existing value. `path` is "section.key".
  void set(const std::string& path, const std::string& value);
  bool has(const std::string& section, const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Parses and fully validates. Throws ConfigError listing every problem:
/// syntax, unknown sections and keys, missing required keys (as
/// "section.key"), and invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config(const IniDocument& doc);

/// Every section and key with defaults filled; floats in %.17g.
std::string serialize(const ExperimentConfig& config);

std::string format_double(double v);

}  // namespace stochmetric
