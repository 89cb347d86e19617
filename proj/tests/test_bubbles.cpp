#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "hwb/bubbles.hpp"
#include "hwb/error.hpp"
#include "hwb/numerics.hpp"
#include "support.hpp"

using namespace hwb;

namespace {

const ProfileSet& chain() { return testing::bank()->profiles(); }

double mass(const SpectralField& u) { return std::pow(l2_norm(u), 2); }

}  // namespace

TEST_CASE("modified profile") {
  const auto& p = chain();
  CHECK(line_norm(modified_profile(p, 0.0, 0.0) - p.q) == 0.0);

  std::vector<double> bs, dm;
  for (double b : {0.02, 0.03, 0.04, 0.06, 0.08}) {
    bs.push_back(b);
    dm.push_back(std::abs(std::pow(line_norm(modified_profile(p, b, b * b)), 2) - testing::q_mass()));
  }
  CHECK(std::abs(fit_loglog(bs, dm).slope - 4.0) <= 0.3);

  // Reflection conjugates the odd pieces: Q_k(b, v)(-x) = Q_k(b, -v)(x).
  auto a = reflect(modified_profile(p, 0.07, 0.03));
  auto b = modified_profile(p, 0.07, -0.03);
  CHECK(line_norm(a - b) <= 1e-14 * line_norm(b));
}

TEST_CASE("profile parameter derivatives") {
  const auto& p = chain();
  const double b = 0.06, v = 0.01, h = 1e-5;
  auto fd_b = cplx(1.0 / (2.0 * h)) * (modified_profile(p, b + h, v) - modified_profile(p, b - h, v));
  auto fd_v = cplx(1.0 / (2.0 * h)) * (modified_profile(p, b, v + h) - modified_profile(p, b, v - h));
  CHECK(line_norm(fd_b - modified_profile_db(p, b, v)) <= 1e-8 * line_norm(fd_b));
  CHECK(line_norm(fd_v - modified_profile_dv(p, b, v)) <= 1e-8 * line_norm(fd_v));
}

TEST_CASE("profile residual") {
  const auto& p = chain();
  CHECK(profile_residual(p, 0.0, 0.0).l2 <= 1e-10);
  std::vector<double> bs, l2;
  double wmax = 0.0, wmin = INFINITY;
  for (double b : {0.02, 0.04, 0.08}) {
    auto r = profile_residual(p, b, b * b);
    bs.push_back(b);
    l2.push_back(r.l2);
    const double scaled = r.weighted_sup / (std::pow(b, 4) + std::pow(b, 4));
    wmax = std::max(wmax, scaled);
    wmin = std::min(wmin, scaled);
  }
  CHECK(std::abs(fit_loglog(bs, l2).slope - 4.0) <= 0.3);
  CHECK(wmax <= 10.0 * wmin);
  CHECK_THROWS_AS(profile_residual(p, 0.6, 0.0), ValidationError);
}

TEST_CASE("rendered bubble") {
  auto bank = testing::bank();
  Grid1D g(4096, 200.0);
  auto u = render_bubble(g, {1.0, 0.0, 0.0, 0.0, 0.0}, *bank);
  LineTable q(chain().q);
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(u[j] - q(g.node(j))));
  CHECK(err <= 1e-12);

  Grid1D fine(8192, 40.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int i = 0; i < 6; ++i) {
    BubbleParams bp{0.1 + 0.4 * ud(rng), 0.1 * ud(rng), 0.01 * ud(rng), 4.0 * ud(rng) - 2.0, 6.0 * ud(rng)};
    auto w = render_bubble(fine, bp, *bank);
    auto qk = modified_profile(chain(), bp.b, bp.v);
    const double lam = bp.lambda;
    // Tails outside the window carry about lambda/(L/2) of the mass.
    CHECK(mass(w) == doctest::Approx(std::pow(line_norm(qk), 2)).epsilon(4.0 * lam / 20.0));
    const double h12 = sobolev_norm(w, 0.5, true);
    const double ref = std::sqrt(line_inner(line_half_wave(qk), qk).real() / lam);
    CHECK(h12 == doctest::Approx(ref).epsilon(4.0 * lam / 20.0));
  }
  CHECK_THROWS_AS(render_bubble(g, {0.01, 0.0, 0.0, 0.0, 0.0}, *bank), ValidationError);
  CHECK_THROWS_AS(render_bubble(g, {1.0, 0.7, 0.0, 0.0, 0.0}, *bank), ValidationError);
}

TEST_CASE("multi-bubble superposition") {
  auto bank = testing::bank();
  Grid1D g(131072, 40.0);
  std::vector<BubbleParams> one = {{0.05, 0.1, 0.02, 1.0, 0.3}};
  CHECK(l2_norm(multi_bubble(g, one, *bank) - render_bubble(g, one[0], *bank)) == 0.0);

  std::vector<double> lams, cross;
  for (double lam : {0.01, 0.02, 0.04, 0.08}) {
    std::vector<BubbleParams> two = {{lam, 0.0, 0.0, -5.0, 0.0}, {lam, 0.0, 0.0, 5.0, 0.0}};
    auto u = multi_bubble(g, two, *bank);
    const double c = mass(u) - mass(render_bubble(g, two[0], *bank)) - mass(render_bubble(g, two[1], *bank));
    lams.push_back(lam);
    cross.push_back(std::abs(c));
  }
  CHECK(std::abs(fit_loglog(lams, cross).slope - 2.0) <= 0.3);
}

TEST_CASE("ball mass concentrates as lambda shrinks") {
  auto bank = testing::bank();
  Grid1D g(262144, 25.6);
  double prev = INFINITY;
  for (double lam : {0.04, 0.01, 0.0025}) {
    auto u = render_bubble(g, {lam, 0.0, 0.0, 0.0, 0.0}, *bank);
    double in = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (std::abs(g.node(j)) <= 1.0) in += std::norm(u[j]) * g.spacing();
    }
    const double gap = std::abs(in / testing::q_mass() - 1.0);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev <= 0.01);
}

TEST_CASE("boundary data") {
  auto bank = testing::bank();
  Grid1D g(262144, 25.6);
  std::vector<double> c = {0.0}, th = {0.5};
  auto d = boundary_data(g, *bank, 1.0, c, th, -0.1);
  CHECK(d.params[0].lambda == doctest::Approx(0.0025));
  CHECK(d.params[0].b == doctest::Approx(0.05));
  CHECK(d.params[0].v == doctest::Approx(0.0025));
  CHECK(d.params[0].gamma == doctest::Approx(40.5));
  CHECK(d.params[0].alpha == 0.0);

  auto p2 = closed_form_params(2.0, c, th, -0.1);
  CHECK(p2[0].lambda == doctest::Approx(0.01));
  CHECK(p2[0].b == doctest::Approx(0.2));
  CHECK(p2[0].v == doctest::Approx(0.01));
  CHECK(p2[0].gamma == doctest::Approx(10.5));

  CHECK_THROWS_AS(boundary_data(g, *bank, 1.0, c, th, -0.01), ValidationError);
  CHECK_THROWS_AS(boundary_data(g, *bank, 1.0, c, th, 0.1), ValidationError);
}

TEST_CASE("localization partition") {
  Grid1D g(4096, 200.0);
  std::vector<double> c2 = {-5.0, 5.0};
  auto loc = localization_set(g, c2);
  CHECK(loc.sigma == doctest::Approx(10.0 / 12.0));
  REQUIRE(loc.phi.size() == 2);
  double sum_err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    sum_err = std::max(sum_err, std::abs(loc.phi[0][j] + loc.phi[1][j] - 1.0));
    for (const auto& phi : loc.phi) {
      CHECK(phi[j].real() >= 0.0);
      CHECK(phi[j].real() <= 1.0);
    }
  }
  CHECK(sum_err <= 1e-12);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    if (std::abs(x + 5.0) <= 4.0 * loc.sigma) CHECK(loc.phi[0][j].real() == 1.0);
    if (std::abs(x - 5.0) <= 4.0 * loc.sigma) CHECK(loc.phi[1][j].real() == 1.0);
  }

  auto one = localization_set(g, std::vector<double>{0.0});
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(one.phi[0][j] == cplx(1.0));

  CHECK_THROWS_AS(localization_set(g, std::vector<double>{5.0, -5.0}), ValidationError);
  CHECK_THROWS_AS(localization_set(g, std::vector<double>{0.0, 0.001}), ValidationError);
}

TEST_CASE("partition derivative bound") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(-60.0, 60.0);
  Grid1D g(16384, 200.0);
  double worst = 0.0;
  for (int k = 2; k <= 4; ++k) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> c(k);
      for (auto& x : c) x = ud(rng);
      std::sort(c.begin(), c.end());
      auto loc = localization_set(g, c);
      for (const auto& phi : loc.phi) {
        for (std::size_t j = 1; j < g.size(); ++j) {
          worst = std::max(worst, std::abs(phi[j] - phi[j - 1]) / g.spacing() * loc.sigma);
        }
      }
    }
  }
  // The quintic ramp over 4 sigma has slope at most 15/8 / 4.
  CHECK(worst <= 15.0 / 32.0 + 1e-3);
}

TEST_CASE("smooth step") {
  CHECK(smooth_step(0.0, 1.0) == 1.0);
  CHECK(smooth_step(4.0, 1.0) == 1.0);
  CHECK(smooth_step(8.0, 1.0) == 0.0);
  CHECK(smooth_step(6.0, 1.0) == doctest::Approx(0.5));
  CHECK(smooth_step_derivative(6.0, 1.0) == doctest::Approx(-15.0 / 32.0));
  CHECK(smooth_step_derivative(3.0, 1.0) == 0.0);
}
