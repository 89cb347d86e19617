#include <cmath>
#include <random>

#include "doctest.h"
#include "hwb/error.hpp"
#include "hwb/linearized.hpp"
#include "support.hpp"

using namespace hwb;

namespace {

const ProfileSet& chain() { return testing::bank()->profiles(); }

GroundState ground() {
  return GroundState{.q = chain().q, .mass = testing::q_mass()};
}

double ip(const LineField& a, const LineField& b) { return line_inner(a, b).real(); }

double parity_defect(const LineField& f, Parity p) { return line_norm(f - symmetrize(f, p)) / line_norm(f); }

LineField random_field(const LineGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::array<double, 8> c{};
  for (auto& ci : c) ci = nd(rng);
  return LineField::from_function(g, [&](double x) {
    const double w = 1.0 / (1.0 + x * x);
    return cplx(c[0] + c[1] * x * w + c[2] * w, c[3] + c[4] * x + c[5] * x * x * w) * w;
  });
}

}  // namespace

TEST_CASE("kernel identities") {
  auto gs = ground();
  const auto& p = chain();
  auto k = kernel_identities(gs, p);
  CHECK(k.lminus_q <= 1e-8);
  CHECK(k.lplus_dq <= 1e-6);
  CHECK(k.lplus_lambda_q <= 1e-6);
  CHECK(k.lplus_rho <= 1e-6);
  CHECK(k.lminus_g1 <= 1e-6);
  CHECK(k.lminus_s1 <= 1e-6);
  CHECK(std::abs(k.mass_identity) <= 1e-6);
  // The other normalization of the scaling identity is off by |Q|.
  CHECK(k.lplus_lambda_q_two == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("linearized operators are symmetric") {
  auto gs = ground();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    auto f = random_field(gs.q.grid(), rng);
    auto g = random_field(gs.q.grid(), rng);
    for (auto s : {LSign::plus, LSign::minus}) {
      const double a = ip(apply_L(s, f, gs), g), b = ip(f, apply_L(s, g, gs));
      CHECK(std::abs(a - b) <= 1e-10 * line_norm(apply_L(s, f, gs)) * line_norm(g));
    }
  }
}

TEST_CASE("profile chain") {
  const auto& p = chain();
  for (const auto& [name, r] : p.solve_residuals) {
    INFO(name);
    CHECK(r <= 1e-8);
  }
  CHECK(p.parities.at("S1") == Parity::even);
  CHECK(p.parities.at("G1") == Parity::odd);
  CHECK(p.parities.at("G2") == Parity::odd);
  CHECK(p.parities.at("S2") == Parity::even);
  CHECK(p.parities.at("rho") == Parity::even);
  CHECK(parity_defect(p.s1, Parity::even) <= 1e-14);
  CHECK(parity_defect(p.g1, Parity::odd) <= 1e-14);
  CHECK(parity_defect(p.g2, Parity::odd) <= 1e-14);
  CHECK(parity_defect(p.s2, Parity::even) <= 1e-14);
  CHECK(parity_defect(p.s3, p.parities.at("S3")) <= 1e-14);
  CHECK(parity_defect(p.rho, Parity::even) <= 1e-14);
  CHECK(p.e1 > 0.0);
  CHECK(p.p1 > 0.0);
  CHECK(p.e1 == doctest::Approx(ip(p.s1, apply_L(LSign::minus, p.s1, ground()))).epsilon(1e-8));
}

TEST_CASE("profiles decay at least like x^-2") {
  const auto& p = chain();
  for (const LineField* f : {&p.s1, &p.g1, &p.g2, &p.s2, &p.s3, &p.rho}) {
    std::vector<double> x, a;
    for (std::size_t j = 0; j < f->size(); ++j) {
      const double xj = f->grid().node(j);
      if (xj >= 50.0 && xj <= 150.0) {
        x.push_back(xj);
        a.push_back(std::abs((*f)[j]));
      }
    }
    // S3 is still pre-asymptotic on [20, 60] (exponent 1.76 there).
    CHECK(fit_decay(x, a, 50.0, 150.0).exponent >= 1.8);
  }
}

TEST_CASE("constrained solves") {
  auto gs = ground();
  const auto& p = chain();
  auto lq = line_scaling(gs.q);
  auto s1 = solve_constrained(LSign::minus, lq, Parity::even, 1e-11, gs);
  CHECK(s1.residual <= 1e-11);
  CHECK(line_norm(s1.field - p.s1) <= 1e-9 * line_norm(p.s1));
  auto g1 = solve_constrained(LSign::minus, cplx(-1.0) * line_derivative(gs.q), Parity::odd, 1e-11, gs);
  CHECK(g1.residual <= 1e-11);
  CHECK(std::abs(ip(g1.field, gs.q)) <= 1e-14);
  CHECK_THROWS_AS(solve_constrained(LSign::minus, gs.q, Parity::even, 1e-11, gs), ValidationError);
  CHECK_THROWS_AS(solve_constrained(LSign::minus, lq, Parity::odd, 1e-11, gs), ValidationError);
}

TEST_CASE("varrho is linear in (b, v)") {
  const auto& p = chain();
  CHECK(line_norm(solve_varrho(p, 0.0, 0.0)) == 0.0);
  auto one = solve_varrho(p, 0.05, 0.0);
  auto two = solve_varrho(p, 0.1, 0.0);
  CHECK(line_norm(two - cplx(2.0) * one) <= 1e-10 * line_norm(two));

  // Residual of the full right side at (b, v) = (0.05, 0.0025).
  auto gs = ground();
  const double b = 0.05, v = 0.0025;
  const auto& q = p.q;
  auto rhs = cplx(2.0 * b) * (p.s1 * p.rho * q) + cplx(b) * line_scaling(p.rho) - cplx(2.0 * b) * p.s2 +
             cplx(2.0 * v) * (p.g1 * p.rho * q) + cplx(v) * line_derivative(p.rho) + cplx(v) * p.g2;
  auto varrho = solve_varrho(p, b, v);
  CHECK(line_norm(apply_L(LSign::minus, varrho, gs) - rhs) <= 1e-8 * line_norm(rhs));
}

TEST_CASE("Scal") {
  const auto& p = chain();
  const double rho_q = ip(p.q, p.rho);
  CHECK(scal(cplx(0.0, 1.0) * p.q, p) == doctest::Approx(rho_q * rho_q).epsilon(1e-10));
  CHECK(scal(p.q, p) == doctest::Approx(std::pow(testing::q_mass(), 2)).epsilon(1e-10));
  // Odd parts with the single odd direction of each component removed.
  auto h = LineField::from_function(p.q.grid(), [](double x) { return cplx(x * x * x / std::pow(1.0 + x * x, 3)); });
  auto dq = real_part(line_derivative(p.q));
  auto re = h - cplx(ip(h, p.g1) / ip(p.g1, p.g1)) * p.g1;
  auto im = h - cplx(ip(h, dq) / ip(dq, dq)) * dq;
  CHECK(scal(re + cplx(0.0, 1.0) * im, p) <= 1e-24);
  CHECK(scal(h, p) >= 1e-6 * scal(p.q, p));
}

TEST_CASE("coercivity") {
  auto gs = ground();
  const auto& p = chain();
  const double c40 = coercivity_rayleigh(gs, p, 40);
  const double c80 = coercivity_rayleigh(gs, p, 80);
  CHECK(c40 > 0.0);
  CHECK(c80 > 0.0);
  CHECK(std::abs(c80 - c40) <= 0.05 * c80);
  CHECK(coercivity_rayleigh(gs, p, 40, false) <= 1e-8);
  CHECK(localized_coercivity_check(gs, p, 50.0, 0.5, 40) > 0.0);
  const double far = localized_coercivity_check(gs, p, 1e6, 0.5, 40);
  CHECK(std::abs(far / c40 - 1.0) <= 0.05);
  CHECK_THROWS_AS(localized_coercivity_check(gs, p, 50.0, 1.5, 40), ValidationError);
}

TEST_CASE("coercivity weight") {
  CHECK(coercivity_weight(0.5, 1.0, 0.5) == 1.0);
  CHECK(coercivity_weight(4.0, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK(coercivity_weight(-4.0, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK(coercivity_weight(100.0, 50.0, 0.5) == doctest::Approx(1.0 / std::sqrt(2.0)));
}
