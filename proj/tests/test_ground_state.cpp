#include <cmath>
#include <random>

#include "doctest.h"
#include "hwb/error.hpp"
#include "hwb/ground_state.hpp"
#include "support.hpp"

using namespace hwb;

namespace {

const LineGrid& line() {
  static const LineGrid g(1024, 1.0);
  return g;
}

const GroundState& cubic() {
  static const GroundState gs = solve_ground_state(line(), 3, 1e-12, 2000);
  return gs;
}

LineField line_residual(const GroundState& gs) {
  const auto& q = gs.q;
  return line_half_wave(q) + q - q * q * q;
}

}  // namespace

TEST_CASE("Benjamin-Ono soliton on the line") {
  auto gs = solve_ground_state(line(), 2, 1e-12, 2000);
  double err = 0.0;
  for (std::size_t j = 0; j < line().size(); ++j) {
    const double x = line().node(j);
    if (std::abs(x) <= 50.0) err = std::max(err, std::abs(gs.q[j].real() - 2.0 / (1.0 + x * x)));
  }
  CHECK(err <= 1e-5);
  auto fit = decay_exponent(gs, 20.0, 60.0);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.025));
  CHECK(fit.prefactor == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Benjamin-Ono soliton on a large torus") {
  Grid1D g(32768, 1600.0);
  auto gs = solve_ground_state(g, 2, 1e-12, 3000);
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    if (std::abs(x) <= 50.0) err = std::max(err, std::abs(gs.q[j].real() - 2.0 / (1.0 + x * x)));
  }
  CHECK(err <= 1e-5);
}

TEST_CASE("cubic ground state") {
  const auto& gs = cubic();
  CHECK(gs.residual_l2 <= 1e-10);
  CHECK(line_norm(line_residual(gs)) <= 1e-10);
  CHECK(gs.power == 3);
  CHECK(gs.q[line().size() / 2].real() > 0.0);
  double odd = 0.0;
  for (std::size_t j = 0; j < line().size(); ++j) {
    CHECK(gs.q[j].real() > 0.0);
    odd = std::max(odd, std::abs(gs.q[j] - gs.q[line().mirror(j)]));
  }
  CHECK(odd <= 1e-14);
  auto fit = decay_exponent(gs, 20.0, 60.0);
  CHECK(std::abs(fit.exponent - 2.0) <= 0.1);
}

TEST_CASE("cubic ground state is resolution independent") {
  auto coarse = solve_ground_state(LineGrid(512, 1.0), 3, 1e-12, 2000);
  const auto& fine = cubic();
  CHECK(std::abs(coarse.mass / fine.mass - 1.0) <= 1e-8);
  LineTable table(coarse.q);
  double err = 0.0;
  for (std::size_t j = 0; j < line().size(); ++j) {
    const double x = line().node(j);
    if (std::abs(x) <= 100.0) err = std::max(err, std::abs(table(x) - fine.q[j]));
  }
  CHECK(err <= 1e-8);
  CHECK(std::abs(energy(coarse.q) - energy(fine.q)) <= 1e-6 * std::abs(0.5 * fine.mass));
}

TEST_CASE("residual decreases over the last iterations") {
  const auto& h = cubic().residual_history;
  REQUIRE(h.size() >= 10);
  for (std::size_t i = h.size() - 9; i < h.size(); ++i) CHECK(h[i] <= h[i - 1]);
}

TEST_CASE("initial amplitude does not change the limit") {
  auto gs = solve_ground_state(line(), 3, 1e-12, 2000, 2.0);
  CHECK(line_norm(gs.q - cubic().q) <= 1e-10);
}

TEST_CASE("Pohozaev identities") {
  const auto& q = cubic().q;
  const double mass = cubic().mass;
  const double h12 = line_inner(line_half_wave(q), q).real();
  double l4 = 0.0;
  for (std::size_t j = 0; j < line().size(); ++j) l4 += std::pow(std::norm(q[j]), 2) * line().weight(j);
  CHECK(h12 == doctest::Approx(mass).epsilon(1e-10));
  CHECK(l4 == doctest::Approx(2.0 * mass).epsilon(1e-10));
  CHECK(std::abs(energy(q)) <= 1e-10 * mass);
}

TEST_CASE("torus solver agrees across resolutions") {
  auto a = solve_ground_state(Grid1D(4096, 200.0), 3, 1e-12, 2000);
  auto b = solve_ground_state(Grid1D(8192, 200.0), 3, 1e-12, 2000);
  CHECK(a.residual_l2 <= 1e-10);
  double err = 0.0;
  for (std::size_t j = 0; j < a.q.size(); ++j) err = std::max(err, std::abs(a.q[j] - b.q[2 * j]));
  CHECK(err <= 1e-8);
  const double ma = std::pow(l2_norm(a.q), 2), mb = std::pow(l2_norm(b.q), 2);
  CHECK(std::abs(ma / mb - 1.0) <= 1e-4);
  // Torus tails differ from the line by the periodic-image floor only.
  CHECK(std::abs(ma / cubic().mass - 1.0) <= 1e-2);
}

TEST_CASE("solver rejects bad arguments") {
  CHECK_THROWS_AS(solve_ground_state(line(), 4, 1e-12, 100), ValidationError);
  CHECK_THROWS_AS(solve_ground_state(line(), 3, 0.0, 100), ValidationError);
  CHECK_THROWS_AS(solve_ground_state(line(), 3, 1.0, 100), ValidationError);
  CHECK_THROWS_AS(solve_ground_state(line(), 3, 1e-12, 3), NumericalError);
}

TEST_CASE("decay fit rejects non-algebraic decay") {
  std::vector<double> x, q;
  for (int i = 0; i < 200; ++i) {
    x.push_back(1.0 + 0.05 * i);
    q.push_back(std::exp(-x.back() * x.back() / 10.0));
  }
  CHECK_THROWS_AS(fit_decay(x, q, 2.0, 10.0), ValidationError);
  std::vector<double> p;
  for (double xi : x) p.push_back(3.0 / (xi * xi * xi));
  auto fit = fit_decay(x, p, 2.0, 10.0);
  CHECK(fit.exponent == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.prefactor == doctest::Approx(3.0).epsilon(1e-10));
  q[10] = -1.0;
  CHECK_THROWS_AS(fit_decay(x, q, 1.0, 10.0), ValidationError);
}

TEST_CASE("Gagliardo-Nirenberg functional") {
  const auto& gs = cubic();
  CHECK(std::abs(gn_functional(gs.q, gs.mass) - 1.0) <= 1e-6);
  LineTable table(gs.q);
  auto scaled = LineField::from_function(line(), [&](double x) { return table(1.7 * x); });
  CHECK(std::abs(gn_functional(scaled, gs.mass) - 1.0) <= 1e-6);

  Grid1D g(2048, 100.0);
  std::mt19937_64 rng(11);
  int below = 0;
  for (int i = 0; i < 100; ++i) {
    auto f = testing::random_band_limited(g, rng, 4 + i % 60);
    below += gn_functional(f, gs.mass) < 1.0;
  }
  CHECK(below == 100);
  CHECK_THROWS_AS(gn_functional(SpectralField::zeros(g), gs.mass), ValidationError);
}
