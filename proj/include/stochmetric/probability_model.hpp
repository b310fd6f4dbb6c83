#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace stochmetric {

/// sigma: interval dispersion (m); mass (kg); timescale (s) reconciles the
/// units of S0 = m sigma^2 / (2 timescale), which is then an action (J s).
class ProbabilityModel {
 public:
  /// Throws DomainError unless mass, sigma and timescale are positive.
  ProbabilityModel(double mass, double sigma, double timescale = 1.0);

  /// Checks that `S0` equals m sigma^2 / (2 timescale) to 1e-12 relative.
  static ProbabilityModel with_action(double mass, double sigma, double timescale, double S0);

  double mass() const { return mass_; }
  double sigma() const { return sigma_; }
  double timescale() const { return timescale_; }
  double S0() const { return S0_; }

 private:
  double mass_;
  double sigma_;
  double timescale_;
  double S0_;
};

/// exp(-dl^2 / (2 sigma^2)); equals 1 at dl = 0 and decays to 0.
double interval_probability(double delta_ell, double sigma);

/// (sigma sqrt(2 pi))^(-1/2), so that a^2 sigma sqrt(2 pi) = 1.
double amplitude_prefactor(double sigma);

enum class ActionKind { Action, Energy };

/// Action: exp(-S / S0). Energy: exp(-W / (m sigma^2 / timescale)), which
/// is exp(-W / (2 S0)) under the model's notation.
double action_probability(const ProbabilityModel& model, double value, ActionKind kind);

/// a exp(i S / S0).
std::complex<double> wavefunction_from_action(double a, double S, double S0);

struct IntervalTriple {
  double d21 = 0.0;
  double d32 = 0.0;
  double d31 = 0.0;
};

struct TripleOutcome {
  IntervalTriple triple;
  double p21 = 0.0;
  double p32 = 0.0;
  double p31 = 0.0;
  /// P21 + P32 <= P31, the literal additivity reading.
  bool literal_inequality_holds = false;
  /// P(d31) >= P(d21 + d32): monotone decay along the triangle inequality.
  bool monotone = false;
};

struct AxiomReport {
  double sigma = 0.0;
  bool unit_at_zero = false;
  bool vanishes_at_infinity = false;
  std::vector<TripleOutcome> triples;
  int literal_failures = 0;
  int monotonicity_failures = 0;
};

/// Evaluates axioms 1-2 and, per triple, the literal axiom-3 inequality and
/// the monotone reading. Reports rather than asserts. Throws InputError for
/// malformed triples (negative, non-finite, or d21 + d32 < d31).
AxiomReport check_probability_axioms(double sigma, const std::vector<IntervalTriple>& triples);

/// Per-point metric on the component index; a single entry is broadcast.
using ComponentMetric = std::vector<Eigen::MatrixXd>;

/// Scales all components by 1/sqrt(I), I = sum_x sum_mn g_mn conj(psi_m) psi_n dx.
/// Throws NormalizationError if I <= 0 or |Im I| > 1e-12 |I|.
std::vector<Eigen::VectorXcd> normalize_components(const std::vector<Eigen::VectorXcd>& psi,
                                                   const ComponentMetric& g, double dx);

/// The quadratic form I itself.
std::complex<double> component_norm(const std::vector<Eigen::VectorXcd>& psi,
                                    const ComponentMetric& g, double dx);

}  // namespace stochmetric
