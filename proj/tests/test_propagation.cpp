#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <lindblad/model.hpp>
#include <lindblad/propagation.hpp>

using namespace lindblad;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<SystemModel> all_scenarios() {
  Mat delta = Mat::Zero(3, 3);
  delta(0, 1) = delta(1, 0) = delta(1, 2) = delta(2, 1) = 1.0;
  return {scenario_free_particle(1.0, 1.0), scenario_quadratic_potential(1.0, 1.0, 1.0),
          scenario_damped_oscillator(1.0, 1.0, 0.5), scenario_pq(1.0, 1.0),
          scenario_chain(Vec::Constant(3, 1.0), delta, 2, 1.0, 0.5)};
}

Mat free_diffusion_exact(double t) {
  Mat d(2, 2);
  d << t, t * t / 2.0, t * t / 2.0, t * t * t / 3.0;
  return d;
}

}  // namespace

TEST_CASE("flow at zero time is the identity") {
  for (const auto& m : all_scenarios()) {
    const int d = 2 * m.n();
    REQUIRE((flow(m, 0.0) - Mat::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("free particle flow is a shear") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  Mat expect(2, 2);
  expect << 1.0, 0.0, 0.5, 1.0;
  REQUIRE((flow(m, 0.5) - expect).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("damped oscillator flow is a contracting rotation") {
  const SystemModel m = scenario_damped_oscillator(1.0, 1.0, 0.5);
  const double t = 1.0;
  Mat expect(2, 2);
  expect << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  expect *= std::exp(-0.5 * t);
  REQUIRE((flow(m, t) - expect).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("pq flow stretches one axis and contracts the other") {
  const SystemModel m = scenario_pq(1.0, 1.0);
  const Mat r = flow(m, 0.7);
  REQUIRE_THAT(r(0, 0), WithinRel(std::exp(-0.7), 1e-13));
  REQUIRE_THAT(r(1, 1), WithinRel(std::exp(0.7), 1e-13));
  REQUIRE(std::abs(r(0, 1)) <= 1e-15);
  REQUIRE(std::abs(r(1, 0)) <= 1e-15);
}

TEST_CASE("flow refuses arguments outside the exponential range") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  REQUIRE_THROWS_MATCHES(flow(m, 1e6), IntegrityError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("500")));
}

TEST_CASE("free particle diffusion matches the closed form") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  for (double t : {0.1, 0.5, 1.0}) {
    const Mat d = diffusion(m, t);
    const Mat exact = free_diffusion_exact(t);
    REQUIRE((d - exact).cwiseAbs().maxCoeff() <= 1e-8 * exact.cwiseAbs().maxCoeff());
  }
  // Quadratic form along the position axis.
  const Vec xi = (Vec(2) << 0.0, 1.0).finished();
  const double q = xi.dot(diffusion(m, 0.5) * xi);
  REQUIRE_THAT(q, WithinRel(0.125 / 3.0, 1e-8));
}

TEST_CASE("damped oscillator diffusion matches the closed form") {
  const SystemModel m = scenario_damped_oscillator(1.0, 1.0, 0.5);
  for (double t : {0.25, 1.0, 3.0}) {
    const Mat d = diffusion(m, t);
    const double expect = (1.0 - std::exp(-t));  // (1/2)(1 - e^{-gamma t})(2 nbar + 1)
    REQUIRE_THAT(d(0, 0), WithinRel(expect, 1e-9));
    REQUIRE_THAT(d(1, 1), WithinRel(expect, 1e-9));
    REQUIRE(std::abs(d(0, 1)) <= 1e-10);
  }
}

TEST_CASE("diffusion at zero time is exactly zero") {
  for (const auto& m : all_scenarios()) {
    REQUIRE(diffusion(m, 0.0).cwiseAbs().maxCoeff() == 0.0);
    QuadraticIntegratorConfig cfg;
    cfg.method = DiffusionMethod::quadrature;
    REQUIRE(diffusion(m, 0.0, cfg).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("quadrature and ODE integrators agree") {
  QuadraticIntegratorConfig quad;
  quad.method = DiffusionMethod::quadrature;
  quad.steps = 512;
  for (const auto& m : all_scenarios()) {
    for (double t : {0.3, 1.0}) {
      const Mat a = diffusion(m, t);
      const Mat b = diffusion(m, t, quad);
      REQUIRE((a - b).cwiseAbs().maxCoeff() <= std::max(1e-9, 1e-8 * a.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("ODE integrator refuses negative times") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  REQUIRE_THROWS_MATCHES(diffusion(m, -0.5), ValidationError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("quadrature")));
}

TEST_CASE("integrator configuration is validated") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  QuadraticIntegratorConfig bad;
  bad.steps = 1;
  REQUIRE_THROWS_AS(diffusion(m, 1.0, bad), ValidationError);
  bad = QuadraticIntegratorConfig{};
  bad.rel_tol = 0.0;
  REQUIRE_THROWS_AS(diffusion(m, 1.0, bad), ValidationError);
  bad.rel_tol = 0.1;
  REQUIRE_THROWS_AS(diffusion(m, 1.0, bad), ValidationError);
}

TEST_CASE("reduced covariance equals the reversed-time diffusion") {
  QuadraticIntegratorConfig quad;
  quad.method = DiffusionMethod::quadrature;
  quad.steps = 1024;
  for (const auto& m : all_scenarios()) {
    for (double t : {0.3, 1.0}) {
      const Mat c = c_form(m, t);
      const Mat vianeg = -diffusion(m, -t, quad);
      REQUIRE((c - vianeg).cwiseAbs().maxCoeff() <=
              std::max(1e-9, 1e-8 * c.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("damped oscillator reduced covariance closed form") {
  const SystemModel m = scenario_damped_oscillator(1.0, 1.0, 0.5);
  const double c = std::exp(1.0) - 1.0;
  const Mat cm = c_form(m, 1.0);
  REQUIRE_THAT(cm(0, 0), WithinRel(c, 1e-9));
  REQUIRE_THAT(cm(1, 1), WithinRel(c, 1e-9));
  const Mat ct = c_tilde(m, 1.0);
  REQUIRE_THAT(ct(0, 0), WithinRel(c / (1.0 + 2.0 * c), 1e-9));
}

TEST_CASE("regularized covariance stays below one half") {
  const SystemModel m = scenario_damped_oscillator(1.0, 1.0, 0.5);
  for (double t : {0.5, 5.0, 30.0}) {
    const Vec ev = sym_eig(c_tilde(m, t)).values;
    REQUIRE(ev.minCoeff() >= -1e-12);
    REQUIRE(ev.maxCoeff() < 0.5);
  }
}

TEST_CASE("regularized covariance commutes with the covariance") {
  Mat delta = Mat::Zero(3, 3);
  delta(0, 1) = delta(1, 0) = delta(1, 2) = delta(2, 1) = 1.0;
  const SystemModel m = scenario_chain(Vec::Constant(3, 1.0), delta, 2, 1.0, 0.5);
  const Mat c = c_form(m, 0.8);
  const Mat ct = c_tilde_of(c);
  REQUIRE((c * ct - ct * c).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("diffusion grows monotonically") {
  for (const auto& m : all_scenarios()) {
    Mat prev = Mat::Zero(2 * m.n(), 2 * m.n());
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      const Mat d = diffusion(m, t);
      REQUIRE(min_eigenvalue(d - prev) >= -1e-10);
      prev = d;
    }
  }
}

TEST_CASE("channels satisfy the positivity certificate") {
  for (const auto& m : all_scenarios()) {
    for (double t : {0.5, 2.0, 5.0}) {
      const GaussianChannel ch = channel_at(m, t);
      REQUIRE(cp_min_eig(ch) >= -1e-10);
    }
  }
}

TEST_CASE("channel at zero time is the identity channel") {
  const SystemModel m = scenario_damped_oscillator(1.0, 1.0, 0.5);
  const GaussianChannel ch = channel_at(m, 0.0);
  REQUIRE((ch.R - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
  REQUIRE(ch.D.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THAT(cp_min_eig(ch), WithinAbs(0.0, 1e-14));
  REQUIRE_THROWS_AS(channel_at(m, -0.1), ValidationError);
}

TEST_CASE("channel composition reproduces the semigroup") {
  const SystemModel free = scenario_free_particle(1.0, 1.0);
  const GaussianChannel direct = channel_at(free, 0.7);
  const GaussianChannel seq = compose(channel_at(free, 0.4), channel_at(free, 0.3));
  REQUIRE((direct.R - seq.R).cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE((direct.D - seq.D).cwiseAbs().maxCoeff() <= 1e-8);

  const SystemModel pq = scenario_pq(1.0, 1.0);
  const GaussianChannel d2 = channel_at(pq, 1.0);
  const GaussianChannel s2 = compose(channel_at(pq, 0.5), channel_at(pq, 0.5));
  REQUIRE((d2.R - s2.R).cwiseAbs().maxCoeff() <= 1e-10);
  REQUIRE((d2.D - s2.D).cwiseAbs().maxCoeff() <= 1e-8);

  // Composing with the identity changes nothing.
  const GaussianChannel ident = channel_at(free, 0.0);
  const GaussianChannel same = compose(ident, direct);
  REQUIRE((same.R - direct.R).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((same.D - direct.D).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("channel composition validates compatibility") {
  const GaussianChannel a{Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0};
  const GaussianChannel b{Mat::Identity(4, 4), Mat::Zero(4, 4), 1.0};
  REQUIRE_THROWS_AS(compose(a, b), ValidationError);
  const GaussianChannel c{Mat::Identity(2, 2), Mat::Zero(2, 2), 0.5};
  REQUIRE_THROWS_AS(compose(a, c), ValidationError);
}

TEST_CASE("characteristic weights of coherence terms") {
  const GaussianChannel ident{Mat::Identity(2, 2), Mat::Zero(2, 2), 1.0};
  const Vec zero = Vec::Zero(2);

  // A vacuum diagonal term carries its own Gaussian envelope.
  const CatCoherence diag{zero, zero};
  const Vec xi0 = (Vec(2) << 0.3, -0.7).finished();
  REQUIRE(std::abs(cat_term_characteristic(ident, diag, xi0) -
                   std::complex<double>(std::exp(-xi0.squaredNorm() / 4.0), 0.0)) <= 1e-15);
  REQUIRE(std::abs(cat_term_characteristic(ident, diag, Vec::Zero(2)) -
                   std::complex<double>(1.0, 0.0)) <= 1e-15);

  // With no diffusion the modulus is one along the displaced ray.
  const CatCoherence cat{(Vec(2) << 1.0, 0.0).finished(), (Vec(2) << -1.0, 0.0).finished()};
  const Vec xi_ray = (Vec(2) << 0.0, 2.0).finished();  // Omega * dz
  REQUIRE_THAT(std::abs(cat_term_characteristic(ident, cat, xi_ray)), WithinAbs(1.0, 1e-14));

  // Free evolution at t=1 damps the origin value to exp(-1).
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const std::complex<double> w = cat_term_characteristic(channel_at(m, 1.0), cat, Vec::Zero(2));
  REQUIRE_THAT(w.real(), WithinRel(std::exp(-1.0), 1e-9));
  REQUIRE(std::abs(w.imag()) <= 1e-12);

  // The centroid contributes a pure phase.
  const Vec z1 = (Vec(2) << 1.0, 1.0).finished();
  const CatCoherence shifted{z1, z1};
  const Vec xi = (Vec(2) << 0.5, 0.0).finished();
  const std::complex<double> p = cat_term_characteristic(ident, shifted, xi);
  REQUIRE_THAT(std::abs(p), WithinRel(std::exp(-0.0625), 1e-12));
  REQUIRE_THAT(std::arg(p), WithinAbs(-0.5, 1e-12));
}

TEST_CASE("propagator kernel peak for the free particle") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec y = (Vec(2) << 0.4, -0.2).finished();
  const Vec x = flow(m, 1.0) * y;
  const double peak = propagator_kernel(m, 1.0, x, y);
  REQUIRE_THAT(peak, WithinRel(std::sqrt(12.0) / (2.0 * kPi), 1e-8));
}

TEST_CASE("propagator kernel integrates to one") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec y = Vec::Zero(2);
  const double h = 0.07;
  double mass = 0.0;
  for (double p = -7.0; p <= 7.0; p += h)
    for (double q = -7.0; q <= 7.0; q += h)
      mass += propagator_kernel(m, 1.0, (Vec(2) << p, q).finished(), y);
  mass *= h * h;
  REQUIRE_THAT(mass, WithinAbs(1.0, 1e-6));
}

TEST_CASE("degenerate diffusion blocks the kernel with guidance") {
  const SystemModel m = scenario_pq(1.0, 1.0);
  REQUIRE_THROWS_MATCHES(
      propagator_kernel(m, 1.0, Vec::Zero(2), Vec::Zero(2)), ValidationError,
      Catch::Matchers::MessageMatches(ContainsSubstring("filtration")));
}

TEST_CASE("short-time diffusion derivatives match the commutator expansion") {
  const SystemModel m = scenario_damped_oscillator(1.0, 1.0, 0.5);
  const Mat a = m.A(), mm = m.M();
  const double h = 1e-3;
  QuadraticIntegratorConfig quad;
  quad.method = DiffusionMethod::quadrature;
  quad.steps = 512;
  const auto d_at = [&](double t) { return diffusion(m, t, quad); };
  const Mat dm2 = d_at(-2 * h), dm1 = d_at(-h), d0 = Mat::Zero(2, 2), d1 = d_at(h),
            d2 = d_at(2 * h);

  const Mat first = (d1 - dm1) / (2 * h);
  REQUIRE((first - mm).cwiseAbs().maxCoeff() <= 1e-4 * mm.cwiseAbs().maxCoeff());

  const Mat second = (d1 - 2 * d0 + dm1) / (h * h);
  const Mat second_expect = a * mm + mm * a.transpose();
  REQUIRE((second - second_expect).cwiseAbs().maxCoeff() <=
          1e-4 * second_expect.cwiseAbs().maxCoeff());

  const Mat third = (d2 - 2 * d1 + 2 * dm1 - dm2) / (2 * h * h * h);
  const Mat third_expect =
      a * a * mm + 2.0 * a * mm * a.transpose() + mm * a.transpose() * a.transpose();
  REQUIRE((third - third_expect).cwiseAbs().maxCoeff() <=
          1e-4 * third_expect.cwiseAbs().maxCoeff());
}

TEST_CASE("regularization error is first order in time") {
  const Vec xi = (Vec(2) << 1.0, 1.0).finished().normalized();
  for (const SystemModel& m : {scenario_free_particle(1.0, 1.0),
                               scenario_damped_oscillator(1.0, 1.0, 0.5)}) {
    for (double t : {0.01, 0.02, 0.05, 0.1}) {
      const Mat c = c_form(m, t);
      const Mat ct = c_tilde_of(c);
      const double cxi = xi.dot(c * xi);
      const double diff = xi.dot((c - ct) * xi);
      REQUIRE(diff >= -1e-14);
      REQUIRE(diff <= 10.0 * t * cxi);
    }
  }
}
