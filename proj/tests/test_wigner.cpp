#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <lindblad/model.hpp>
#include <lindblad/wigner.hpp>

using namespace lindblad;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = 3.14159265358979323846;

GridSpec grid256() {
  GridSpec g;
  g.pmin = -8.0;
  g.pmax = 8.0;
  g.qmin = -8.0;
  g.qmax = 8.0;
  g.np = 256;
  g.nq = 256;
  return g;
}

double max_abs(const WignerField& w) {
  double best = 0.0;
  for (const auto& v : w.values) best = std::max(best, std::abs(v));
  return best;
}

}  // namespace

TEST_CASE("coherent peak height is 1/pi") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec z = (Vec(2) << 0.0, 2.0).finished();
  const WignerField w = wigner_field(m, {WeightedTerm{{1.0, 0.0}, CatCoherence{z, z}}}, 0.0,
                                     grid256());
  REQUIRE_THAT(w.p_at(128), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(w.q_at(160), WithinAbs(2.0, 1e-12));
  REQUIRE_THAT(w.at(128, 160).real(), WithinRel(1.0 / kPi, 1e-10));
  REQUIRE_FALSE(w.aliasing_warning);
}

TEST_CASE("hermitian term sets give a real field") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec z1 = (Vec(2) << 0.0, 2.0).finished();
  const Vec z2 = (Vec(2) << 0.0, -2.0).finished();
  const WignerField w = wigner_field(m, cat_state_terms(z1, z2), 0.0, grid256());
  double imag_max = 0.0;
  for (const auto& v : w.values) imag_max = std::max(imag_max, std::abs(v.imag()));
  REQUIRE(imag_max <= 1e-12);
}

TEST_CASE("total mass matches the characteristic value at the origin") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec z1 = (Vec(2) << 0.0, 2.0).finished();
  const Vec z2 = (Vec(2) << 0.0, -2.0).finished();
  const GridSpec g = grid256();
  const WignerField w = wigner_field(m, cat_state_terms(z1, z2), 0.0, g);
  std::complex<double> mass{0.0, 0.0};
  for (const auto& v : w.values) mass += v;
  const double dp = (g.pmax - g.pmin) / g.np, dq = (g.qmax - g.qmin) / g.nq;
  // Two unit diagonal terms at weight 1/2 plus two cross terms of size e^{-4}/2.
  REQUIRE_THAT(mass.real() * dp * dq, WithinAbs(1.0 + std::exp(-4.0), 1e-6));
}

TEST_CASE("cat interference fringes carry the expected wavevector") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec z1 = (Vec(2) << 0.0, 2.0).finished();
  const Vec z2 = (Vec(2) << 0.0, -2.0).finished();
  const GridSpec g = grid256();
  const WignerField w = wigner_field(m, cat_state_terms(z1, z2), 0.0, g);

  // Scan the p axis at q = 0, where the fringes oscillate as cos(p dq / hbar).
  const int iq0 = 128;
  std::vector<double> line(g.np);
  double mean = 0.0;
  for (int ip = 0; ip < g.np; ++ip) {
    line[ip] = w.at(ip, iq0).real();
    mean += line[ip];
  }
  mean /= g.np;

  int best_bin = 0;
  double best_mag = 0.0;
  for (int k = 1; k < g.np / 2; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (int ip = 0; ip < g.np; ++ip) {
      const double ph = -2.0 * kPi * k * ip / g.np;
      acc += (line[ip] - mean) * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best_bin = k;
    }
  }
  const double dp = (g.pmax - g.pmin) / g.np;
  const double kvec = 2.0 * kPi * best_bin / (g.np * dp);
  REQUIRE_THAT(kvec, WithinRel(4.0, 0.10));  // separation over hbar
}

TEST_CASE("fringe contrast decays by e^{-1} at the predicted time") {
  // For the free particle with dz = (0,4) the leading decay coefficient is 16,
  // so the cross term loses a factor e^{-1} at t = 2 hbar / 16 = 0.125.
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec z1 = (Vec(2) << 0.0, 2.0).finished();
  const Vec z2 = (Vec(2) << 0.0, -2.0).finished();
  const std::vector<WeightedTerm> cross = {WeightedTerm{{1.0, 0.0}, CatCoherence{z1, z2}}};
  const double before = max_abs(wigner_field(m, cross, 0.0, grid256()));
  const double after = max_abs(wigner_field(m, cross, 0.125, grid256()));
  REQUIRE_THAT(after / before, WithinRel(std::exp(-1.0), 0.10));
}

TEST_CASE("stationary-direction fringes persist") {
  // In the pq model a momentum-displaced pair decoheres not at all: the cross
  // term keeps the full modulus of a diagonal term at all times.
  const SystemModel m = scenario_pq(1.0, 1.0);
  const Vec z1 = (Vec(2) << 1.0, 0.0).finished();
  const Vec z2 = (Vec(2) << -1.0, 0.0).finished();
  const double t = 0.5;
  const double cross =
      max_abs(wigner_field(m, {WeightedTerm{{1.0, 0.0}, CatCoherence{z1, z2}}}, t, grid256()));
  const double diag =
      max_abs(wigner_field(m, {WeightedTerm{{1.0, 0.0}, CatCoherence{z1, z1}}}, t, grid256()));
  REQUIRE_THAT(cross / diag, WithinAbs(1.0, 0.02));
}

TEST_CASE("coarse grids trigger the aliasing warning") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  GridSpec g = grid256();
  g.np = 16;
  g.nq = 16;
  const Vec z = Vec::Zero(2);
  const WignerField w = wigner_field(m, {WeightedTerm{{1.0, 0.0}, CatCoherence{z, z}}}, 0.0, g);
  REQUIRE(w.aliasing_warning);
  REQUIRE(w.aliasing_ratio > 1e-8);
}

TEST_CASE("wigner rendering validates its inputs") {
  const SystemModel m = scenario_free_particle(1.0, 1.0);
  const Vec z = Vec::Zero(2);
  const std::vector<WeightedTerm> terms = {WeightedTerm{{1.0, 0.0}, CatCoherence{z, z}}};

  GridSpec bad = grid256();
  bad.np = 100;
  REQUIRE_THROWS_AS(wigner_field(m, terms, 0.0, bad), ValidationError);
  bad = grid256();
  bad.nq = 1;
  REQUIRE_THROWS_AS(wigner_field(m, terms, 0.0, bad), ValidationError);
  bad = grid256();
  bad.pmax = bad.pmin;
  REQUIRE_THROWS_AS(wigner_field(m, terms, 0.0, bad), ValidationError);

  Mat delta = Mat::Zero(2, 2);
  delta(0, 1) = delta(1, 0) = 0.5;
  const SystemModel two = scenario_chain(Vec::Constant(2, 1.0), delta, 1, 1.0, 0.0);
  const Vec z4 = Vec::Zero(4);
  REQUIRE_THROWS_AS(
      wigner_field(two, {WeightedTerm{{1.0, 0.0}, CatCoherence{z4, z4}}}, 0.0, grid256()),
      ValidationError);
}
