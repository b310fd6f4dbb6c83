#include "stochmetric/probability_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "stochmetric/errors.hpp"

namespace stochmetric {

namespace {

void require_positive(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0))
    throw DomainError(std::string(name) + " must be finite and > 0");
}

}  // namespace

ProbabilityModel::ProbabilityModel(double mass, double sigma, double timescale)
    : mass_(mass), sigma_(sigma), timescale_(timescale) {
  require_positive(mass, "mass");
  require_positive(sigma, "sigma");
  require_positive(timescale, "timescale");
  S0_ = mass * sigma * sigma / (2.0 * timescale);
}

ProbabilityModel ProbabilityModel::with_action(double mass, double sigma, double timescale,
                                               double S0) {
  ProbabilityModel m(mass, sigma, timescale);
  if (!(std::abs(S0 - m.S0()) <= 1e-12 * m.S0())) {
    std::ostringstream msg;
    msg << "S0 = " << S0 << " inconsistent with m sigma^2 / (2 timescale) = " << m.S0();
    throw DomainError(msg.str());
  }
  return m;
}

double interval_probability(double delta_ell, double sigma) {
  require_positive(sigma, "sigma");
  return std::exp(-delta_ell * delta_ell / (2.0 * sigma * sigma));
}

double amplitude_prefactor(double sigma) {
  require_positive(sigma, "sigma");
  return 1.0 / std::sqrt(sigma * std::sqrt(2.0 * std::numbers::pi));
}

double action_probability(const ProbabilityModel& model, double value, ActionKind kind) {
  if (!(value >= 0.0)) throw DomainError("action_probability: argument must be >= 0");
  if (kind == ActionKind::Action) return std::exp(-value / model.S0());
  const double scale = model.mass() * model.sigma() * model.sigma() / model.timescale();
  return std::exp(-value / scale);
}

std::complex<double> wavefunction_from_action(double a, double S, double S0) {
  require_positive(S0, "S0");
  return std::polar(a, S / S0);
}

AxiomReport check_probability_axioms(double sigma,
                                     const std::vector<IntervalTriple>& triples) {
  require_positive(sigma, "sigma");
  AxiomReport report;
  report.sigma = sigma;
  report.unit_at_zero = interval_probability(0.0, sigma) == 1.0;
  report.vanishes_at_infinity =
      interval_probability(std::numeric_limits<double>::infinity(), sigma) == 0.0;

  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    const bool finite = std::isfinite(t.d21) && std::isfinite(t.d32) && std::isfinite(t.d31);
    const bool nonneg = t.d21 >= 0.0 && t.d32 >= 0.0 && t.d31 >= 0.0;
    if (!finite || !nonneg || t.d21 + t.d32 < t.d31) {
      std::ostringstream msg;
      msg << "triple " << i << " (" << t.d21 << ", " << t.d32 << ", " << t.d31
          << ") violates 0 <= d31 <= d21 + d32";
      throw InputError(msg.str());
    }
    TripleOutcome o;
    o.triple = t;
    o.p21 = interval_probability(t.d21, sigma);
    o.p32 = interval_probability(t.d32, sigma);
    o.p31 = interval_probability(t.d31, sigma);
    o.literal_inequality_holds = o.p21 + o.p32 <= o.p31;
    o.monotone = o.p31 >= interval_probability(t.d21 + t.d32, sigma);
    report.literal_failures += o.literal_inequality_holds ? 0 : 1;
    report.monotonicity_failures += o.monotone ? 0 : 1;
    report.triples.push_back(o);
  }
  return report;
}

std::complex<double> component_norm(const std::vector<Eigen::VectorXcd>& psi,
                                    const ComponentMetric& g, double dx) {
  if (psi.empty()) throw InputError("normalize_components: no components");
  const Eigen::Index n = psi.front().size();
  const auto nc = static_cast<Eigen::Index>(psi.size());
  for (const auto& c : psi)
    if (c.size() != n) throw InputError("normalize_components: component sizes differ");
  if (g.size() != 1 && static_cast<Eigen::Index>(g.size()) != n)
    throw InputError("normalize_components: metric field must have 1 or N entries");
  for (const auto& gm : g)
    if (gm.rows() != nc || gm.cols() != nc)
      throw InputError("normalize_components: metric must be components x components");

  std::complex<double> total = 0.0;
  Eigen::VectorXcd v(nc);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index m = 0; m < nc; ++m) v[m] = psi[m][x];
    const Eigen::MatrixXd& gx = g.size() == 1 ? g.front() : g[x];
    total += v.dot(gx.cast<std::complex<double>>() * v);  // conj(v)^T g v
  }
  return total * dx;
}

std::vector<Eigen::VectorXcd> normalize_components(const std::vector<Eigen::VectorXcd>& psi,
                                                   const ComponentMetric& g, double dx) {
  const std::complex<double> I = component_norm(psi, g, dx);
  if (!(I.real() > 0.0) || std::abs(I.imag()) > 1e-12 * std::abs(I)) {
    std::ostringstream msg;
    msg << "normalization integral " << I.real() << " + " << I.imag()
        << "i is not a positive real (indefinite metric)";
    throw NormalizationError(msg.str(), I.real(), I.imag());
  }
  const double scale = 1.0 / std::sqrt(I.real());
  std::vector<Eigen::VectorXcd> out;
  out.reserve(psi.size());
  for (const auto& c : psi) out.push_back(c * scale);
  return out;
}

}  // namespace stochmetric
