#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stochmetric/errors.hpp"
#include "stochmetric/probability_model.hpp"

using namespace stochmetric;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("interval_probability") {
  const double sigma = 0.7;
  CHECK(interval_probability(0.0, sigma) == 1.0);
  CHECK(interval_probability(1e6, sigma) == 0.0);
  CHECK(interval_probability(sigma, sigma) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(interval_probability(-sigma, sigma) == interval_probability(sigma, sigma));
  CHECK_THROWS_AS(interval_probability(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(interval_probability(1.0, -1.0), DomainError);

  SUBCASE("monotone nonincreasing in |dl|") {
    double prev = 1.0;
    for (int i = 0; i <= 2000; ++i) {
      const double p = interval_probability(i * 0.005 * sigma, sigma);
      CHECK(p <= prev);
      prev = p;
    }
  }
  SUBCASE("below 1e-8 once exp(-dl^2/2sigma^2) crosses it") {
    CHECK(interval_probability(6.0 * sigma, sigma) < 1e-7);
    const double cut = std::sqrt(2.0 * std::log(1e8));
    for (double m = cut; m < 20.0; m += 0.01) CHECK(interval_probability(m * sigma, sigma) <= 1e-8);
  }
}

TEST_CASE("check_probability_axioms") {
  const double s = 2.0;
  SUBCASE("degenerate triple fails the literal inequality") {
    const AxiomReport r = check_probability_axioms(s, {{0.0, 0.0, 0.0}});
    CHECK(r.unit_at_zero);
    CHECK(r.vanishes_at_infinity);
    REQUIRE(r.triples.size() == 1);
    CHECK(r.triples[0].p21 == 1.0);
    CHECK(r.triples[0].p32 == 1.0);
    CHECK(r.triples[0].p31 == 1.0);
    CHECK_FALSE(r.triples[0].literal_inequality_holds);
    CHECK(r.triples[0].monotone);
    CHECK(r.literal_failures == 1);
    CHECK(r.monotonicity_failures == 0);
  }
  SUBCASE("(3s, 3s, 6s)") {
    const AxiomReport r = check_probability_axioms(s, {{3 * s, 3 * s, 6 * s}});
    const auto& t = r.triples[0];
    CHECK(t.p21 + t.p32 == doctest::Approx(0.0222).epsilon(1e-3));
    CHECK(t.p31 == doctest::Approx(1.5e-8).epsilon(0.02));
    CHECK_FALSE(t.literal_inequality_holds);
    CHECK(r.literal_failures == 1);
  }
  SUBCASE("monotone decay at s, 2s, 3s") {
    CHECK(interval_probability(s, s) > interval_probability(2 * s, s));
    CHECK(interval_probability(2 * s, s) > interval_probability(3 * s, s));
  }
  SUBCASE("random admissible triples never break monotonicity") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::vector<IntervalTriple> triples;
    for (int i = 0; i < 500; ++i) {
      const double a = u(gen), b = u(gen);
      triples.push_back({a, b, std::uniform_real_distribution<double>(0.0, a + b)(gen)});
    }
    CHECK(check_probability_axioms(s, triples).monotonicity_failures == 0);
  }
  SUBCASE("malformed triples") {
    CHECK_THROWS_AS(check_probability_axioms(s, {{1.0, 1.0, 3.0}}), InputError);
    CHECK_THROWS_AS(check_probability_axioms(s, {{-1.0, 1.0, 0.0}}), InputError);
    CHECK_THROWS_AS(check_probability_axioms(s, {{NAN, 1.0, 0.0}}), InputError);
  }
}

TEST_CASE("amplitude_prefactor") {
  CHECK(amplitude_prefactor(1.0 / std::sqrt(2.0 * kPi)) == doctest::Approx(1.0).epsilon(1e-15));
  for (double sigma : {1e-9, 0.3, 1.0, 42.0}) {
    const double a = amplitude_prefactor(sigma);
    CHECK(a * a * sigma * std::sqrt(2.0 * kPi) == doctest::Approx(1.0).epsilon(1e-14));
    const double a2 = amplitude_prefactor(2.0 * sigma);
    CHECK(a2 * a2 == doctest::Approx(0.5 * a * a).epsilon(1e-14));
  }
  CHECK_THROWS_AS(amplitude_prefactor(0.0), DomainError);
}

TEST_CASE("ProbabilityModel") {
  const ProbabilityModel m(2.0, 3.0, 1.5);
  CHECK(m.S0() == doctest::Approx(2.0 * 9.0 / 3.0));
  CHECK_THROWS_AS(ProbabilityModel(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(ProbabilityModel(1.0, -1.0), DomainError);
  CHECK_THROWS_AS(ProbabilityModel(1.0, 1.0, 0.0), DomainError);
  CHECK(ProbabilityModel::with_action(1.0, 1.0, 1.0, 0.5).S0() == 0.5);
  CHECK_THROWS_AS(ProbabilityModel::with_action(1.0, 1.0, 1.0, 0.6), DomainError);
}

TEST_CASE("action_probability") {
  const ProbabilityModel m(1.3, 0.8);
  CHECK(action_probability(m, 0.0, ActionKind::Action) == 1.0);
  CHECK(action_probability(m, m.S0(), ActionKind::Action) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  SUBCASE("energy kind is exp(-W / (2 S0)) with the model's S0") {
    for (double W : {0.0, 0.1, 1.0, 5.0})
      CHECK(action_probability(m, W, ActionKind::Energy) ==
            doctest::Approx(std::exp(-W / (2.0 * m.S0()))).epsilon(1e-14));
    CHECK(action_probability(m, 1.0, ActionKind::Energy) ==
          doctest::Approx(std::exp(-1.0 / (1.3 * 0.64))).epsilon(1e-14));
  }
  SUBCASE("same exponential family as interval_probability") {
    for (double dl : {0.0, 0.3, 0.8, 2.5}) {
      const double S = m.S0() * dl * dl / (2.0 * m.sigma() * m.sigma());
      CHECK(action_probability(m, S, ActionKind::Action) ==
            doctest::Approx(interval_probability(dl, m.sigma())).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(action_probability(m, -1e-3, ActionKind::Action), DomainError);
  CHECK_THROWS_AS(action_probability(m, -1e-3, ActionKind::Energy), DomainError);
}

TEST_CASE("wavefunction_from_action") {
  const double a = 0.7;
  const double S0 = 1.9;
  CHECK(wavefunction_from_action(a, 0.0, S0) == std::complex<double>(a, 0.0));
  const auto half = wavefunction_from_action(a, kPi * S0, S0);
  CHECK(half.real() == doctest::Approx(-a).epsilon(1e-15));
  CHECK(std::abs(half.imag()) < 1e-15);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double S = u(gen);
    const auto psi = wavefunction_from_action(a, S, S0);
    CHECK(std::abs(psi) == doctest::Approx(a).epsilon(1e-15));
    CHECK(std::norm(psi) == doctest::Approx(a * a).epsilon(1e-14));
    const double d = std::remainder(std::arg(psi) - S / S0, 2.0 * kPi);
    CHECK(std::abs(d) < 1e-12);
  }
}

TEST_CASE("normalize_components") {
  const int n = 16;
  const double dx = 0.25;
  const ComponentMetric id{Eigen::MatrixXd::Identity(1, 1)};

  SUBCASE("integral 4 scales by one half") {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(n, std::complex<double>(0.0, 1.0));
    const double I = n * dx;
    CHECK(I == 4.0);
    const auto out = normalize_components({psi}, id, dx);
    CHECK((out[0] - 0.5 * psi).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(component_norm(out, id, dx).real() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("idempotent and homogeneous") {
    Eigen::VectorXcd psi(n);
    for (int i = 0; i < n; ++i) psi[i] = std::polar(std::exp(-0.1 * i), 0.3 * i);
    const auto once = normalize_components({psi}, id, dx);
    const auto twice = normalize_components(once, id, dx);
    CHECK((once[0] - twice[0]).cwiseAbs().maxCoeff() < 1e-12);
    const auto scaled = normalize_components({Eigen::VectorXcd(17.5 * psi)}, id, dx);
    CHECK((once[0] - scaled[0]).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("Minkowski signature on two components") {
    const ComponentMetric eta{Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix()};
    Eigen::VectorXcd t(n), x(n);
    double expected = 0.0;
    for (int i = 0; i < n; ++i) {
      t[i] = std::complex<double>(1.0, 0.5 * std::sin(i));
      x[i] = std::complex<double>(0.3 * std::cos(i), 0.2);
      expected += (std::norm(t[i]) - std::norm(x[i])) * dx;
    }
    REQUIRE(expected > 0.0);
    CHECK(component_norm({t, x}, eta, dx).real() == doctest::Approx(expected).epsilon(1e-14));
    const auto out = normalize_components({t, x}, eta, dx);
    CHECK((out[0] - t / std::sqrt(expected)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(component_norm(out, eta, dx).real() == doctest::Approx(1.0).epsilon(1e-10));

    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(n);
    try {
      normalize_components({zero, x}, eta, dx);
      FAIL("expected NormalizationError");
    } catch (const NormalizationError& e) {
      CHECK(e.real_part < 0.0);
    }
  }
  SUBCASE("non-real integral is rejected") {
    Eigen::MatrixXd skew(2, 2);
    skew << 1.0, 1.0, -1.0, 1.0;
    Eigen::VectorXcd a = Eigen::VectorXcd::Constant(n, 1.0);
    Eigen::VectorXcd b = Eigen::VectorXcd::Constant(n, std::complex<double>(0.0, 1.0));
    CHECK_THROWS_AS(normalize_components({a, b}, {skew}, dx), NormalizationError);
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(normalize_components({}, id, dx), InputError);
    CHECK_THROWS_AS(normalize_components({Eigen::VectorXcd::Ones(3)}, ComponentMetric(2, id[0]), dx),
                    InputError);
  }
}
