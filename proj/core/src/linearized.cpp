#include "hwb/linearized.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <mutex>

#include "hwb/error.hpp"
#include "hwb/numerics.hpp"

namespace hwb {
namespace {

constexpr double kCompatibilityTol = 1e-8;

LineField kernel_of(LSign sign, const GroundState& gs) {
  return sign == LSign::minus ? gs.q : real_part(line_derivative(gs.q));
}

Parity kernel_parity(LSign sign) { return sign == LSign::minus ? Parity::even : Parity::odd; }

LineField project_out(const LineField& f, const LineField& k) {
  const cplx c = line_inner(f, k) / line_inner(k, k);
  return f - c * k;
}

using Matrix = Eigen::MatrixXd;

// Real probe functions Re/Im of ((1+iy)/(1-iy))^m / (1-iy), y = x.
std::vector<LineField> probes(const LineGrid& g, int n_probe) {
  std::vector<LineField> out;
  for (int m = 0; static_cast<int>(out.size()) < n_probe; ++m) {
    CVec re(g.size()), im(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double y = g.node(j);
      const cplx z = std::pow(cplx(1.0, y) / cplx(1.0, -y), m) / cplx(1.0, -y);
      re[j] = z.real();
      im[j] = z.imag();
    }
    out.emplace_back(g, std::move(re));
    if (static_cast<int>(out.size()) < n_probe) out.emplace_back(g, std::move(im));
  }
  return out;
}

Matrix gram(const std::vector<LineField>& a, const std::vector<LineField>& b, const std::vector<double>& w) {
  const auto& g = a.front().grid();
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) acc += a[i][k].real() * b[j][k].real() * w[k];
      m(i, j) = acc;
    }
  }
  return m;
}

// Smallest generalized eigenvalue of (A, B) restricted to {c : C c = 0}.
double constrained_min(const Matrix& a, const Matrix& b, const Matrix& c) {
  Matrix as = 0.5 * (a + a.transpose());
  Matrix bs = 0.5 * (b + b.transpose());
  Matrix z;
  if (c.rows() == 0) {
    z = Matrix::Identity(a.rows(), a.rows());
  } else {
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
    const long rank = svd.rank();
    z = svd.matrixV().rightCols(a.rows() - rank);
  }
  Matrix ar = z.transpose() * as * z;
  Matrix br = z.transpose() * bs * z;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(ar, br, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("coercivity eigensolve failed");
  return es.eigenvalues().minCoeff();
}

struct Directions {
  std::vector<LineField> real_part, imag_part;
};

Directions scal_directions(const ProfileSet& p) {
  return {{p.q, p.g1, p.s1}, {real_part(line_derivative(p.q)), real_part(line_scaling(p.q)), p.rho}};
}

Matrix constraint_matrix(const std::vector<LineField>& dirs, const std::vector<LineField>& basis) {
  std::vector<double> w(basis.front().grid().weights().begin(), basis.front().grid().weights().end());
  return gram(dirs, basis, w);
}

// D^1/2 on the line grid from the eigen-decomposition of the discrete D,
// symmetrized in the quadrature inner product.
class HalfDerivative {
 public:
  explicit HalfDerivative(const LineGrid& g) : grid_(g) {
    const std::size_t n = g.size();
    Matrix d(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      CVec e(n);
      e[j] = 1.0;
      auto col = line_half_wave(LineField(g, std::move(e)));
      for (std::size_t i = 0; i < n; ++i) d(i, j) = col[i].real();
    }
    Eigen::VectorXd sw(n);
    for (std::size_t i = 0; i < n; ++i) sw(i) = std::sqrt(g.weight(i));
    Matrix s = sw.asDiagonal() * d * sw.cwiseInverse().asDiagonal();
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    op_ = sw.cwiseInverse().asDiagonal() * half * sw.asDiagonal();
  }

  LineField apply(const LineField& f) const {
    Eigen::VectorXd v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v(i) = f[i].real();
    Eigen::VectorXd r = op_ * v;
    CVec out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = r(i);
    return LineField(grid_, std::move(out));
  }

  const LineGrid& grid() const { return grid_; }

 private:
  LineGrid grid_;
  Matrix op_;
};

const HalfDerivative& half_derivative(const LineGrid& g) {
  static std::mutex mutex;
  static std::vector<std::unique_ptr<HalfDerivative>> cache;
  std::lock_guard lock(mutex);
  for (auto& h : cache) {
    if (h->grid() == g) return *h;
  }
  cache.push_back(std::make_unique<HalfDerivative>(g));
  return *cache.back();
}

}  // namespace

LineField apply_L(LSign sign, const LineField& f, const GroundState& gs) {
  require(f.grid() == gs.q.grid(), "apply_L: grid mismatch");
  const double c = sign == LSign::plus ? 3.0 : 1.0;
  LineField df = line_half_wave(f);
  CVec out(f.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double q = gs.q[j].real();
    out[j] = df[j] + f[j] - c * q * q * f[j];
  }
  return LineField(f.grid(), std::move(out));
}

ConstrainedSolution solve_constrained(LSign sign, const LineField& rhs, Parity parity, double tol,
                                      const GroundState& gs) {
  require(rhs.grid() == gs.q.grid(), "solve_constrained: grid mismatch");
  const double rn = line_norm(rhs);
  LineField b = symmetrize(rhs, parity);
  require(rn == 0.0 || line_norm(rhs - b) <= 1e-8 * rn, "solve_constrained: rhs parity mismatch");

  ConstrainedSolution out{LineField::zeros(rhs.grid())};
  if (rn == 0.0) return out;

  const bool kernel_in_subspace = parity == kernel_parity(sign);
  LineField kernel = kernel_of(sign, gs);
  if (kernel_in_subspace) {
    out.compatibility = std::abs(line_inner(b, kernel)) / (rn * line_norm(kernel));
    if (out.compatibility > kCompatibilityTol) {
      throw ValidationError("solve_constrained: rhs not orthogonal to the kernel (compatibility " +
                            std::to_string(out.compatibility) + ")");
    }
    b = project_out(b, kernel);
  }

  const auto& g = rhs.grid();
  auto op = [&](std::span<const cplx> v) {
    LineField f = symmetrize(LineField(g, CVec(v.begin(), v.end())), parity);
    LineField r = symmetrize(apply_L(sign, f, gs), parity);
    if (kernel_in_subspace) r = project_out(r, kernel);
    return CVec(r.values().begin(), r.values().end());
  };
  auto dot = [&](std::span<const cplx> x, std::span<const cplx> y) { return weighted_dot(x, y, g.weights()); };
  auto res = minres(op, b.values(), dot, std::min(tol, 1e-13), 20000);

  LineField f = symmetrize(LineField(g, std::move(res.x)), parity);
  if (kernel_in_subspace) f = project_out(f, kernel);
  out.field = f;
  out.iterations = res.iterations;
  out.residual = line_norm(apply_L(sign, f, gs) - rhs) / rn;
  if (!(out.residual < tol)) {
    throw NumericalError("solve_constrained: residual " + std::to_string(out.residual) +
                         " above tolerance");
  }
  return out;
}

ProfileSet build_profile_chain(const GroundState& gs, double tol) {
  ProfileSet p{gs.q, gs.q, gs.q, gs.q, gs.q, gs.q, gs.q, gs.q, gs.q, {}, {}};
  const LineField& q = gs.q;
  const LineField dq = real_part(line_derivative(q));
  const LineField lq = real_part(line_scaling(q));
  auto d = [](const LineField& f) { return real_part(line_derivative(f)); };
  auto lam = [](const LineField& f) { return real_part(line_scaling(f)); };
  auto run = [&](const char* name, LSign s, const LineField& rhs, Parity par) {
    auto sol = solve_constrained(s, real_part(rhs), par, tol, gs);
    p.solve_residuals[name] = sol.residual;
    p.parities[name] = par;
    return real_part(sol.field);
  };

  p.s1 = run("S1", LSign::minus, lq, Parity::even);
  p.g1 = run("G1", LSign::minus, -1.0 * dq, Parity::odd);
  p.g2 = run("G2", LSign::plus, p.g1 - lam(p.g1) + d(p.s1) + 2.0 * (p.s1 * p.g1 * q), Parity::odd);
  p.s2 = run("S2", LSign::plus, 0.5 * p.s1 - lam(p.s1) + p.s1 * p.s1 * q, Parity::even);
  p.s3 = run("S3", LSign::minus,
             -1.0 * p.s2 + lam(p.s2) + 2.0 * (p.s1 * p.s2 * q) + p.s1 * p.s1 * p.s1, Parity::even);
  p.rho = run("rho", LSign::plus, p.s1, Parity::even);

  LineField rb = 2.0 * (p.s1 * p.rho * q) + lam(p.rho) - 2.0 * p.s2;
  LineField rv = 2.0 * (p.g1 * p.rho * q) + d(p.rho) + p.g2;
  p.varrho_compatibility = std::abs(line_inner(rb, q)) / (line_norm(rb) * line_norm(q));
  p.varrho_b = run("varrho_b", LSign::minus, rb, Parity::even);
  p.varrho_v = run("varrho_v", LSign::minus, rv, Parity::odd);

  p.e1 = line_inner(p.s1, lq).real();
  p.p1 = 2.0 * line_inner(apply_L(LSign::minus, p.g1, gs), p.g1).real();
  return p;
}

LineField solve_varrho(const ProfileSet& p, double b, double v) {
  require(std::abs(b) <= 0.5 && std::abs(v) <= 0.5, "solve_varrho: (b, v) above the smallness ceiling");
  return b * p.varrho_b + v * p.varrho_v;
}

KernelReport kernel_identities(const GroundState& gs, const ProfileSet& p) {
  const LineField& q = gs.q;
  const LineField dq = real_part(line_derivative(q));
  const LineField lq = real_part(line_scaling(q));
  KernelReport r;
  const double nq = line_norm(q);
  r.lminus_q = line_norm(apply_L(LSign::minus, q, gs)) / nq;
  r.lplus_dq = line_norm(apply_L(LSign::plus, dq, gs)) / line_norm(dq);
  r.lplus_lambda_q = line_norm(apply_L(LSign::plus, lq, gs) + q) / nq;
  r.lplus_lambda_q_two = line_norm(apply_L(LSign::plus, lq, gs) + 2.0 * q) / nq;
  r.lplus_rho = line_norm(apply_L(LSign::plus, p.rho, gs) - p.s1) / line_norm(p.s1);
  r.lminus_g1 = line_norm(apply_L(LSign::minus, p.g1, gs) + dq) / line_norm(dq);
  r.lminus_s1 = line_norm(apply_L(LSign::minus, p.s1, gs) - lq) / line_norm(lq);
  const double s1s1 = line_inner(p.s1, p.s1).real();
  r.mass_identity = (s1s1 + 2.0 * line_inner(q, p.s2).real()) / s1s1;
  return r;
}

double scal(const LineField& f, const ProfileSet& p) {
  auto dirs = scal_directions(p);
  const LineField f1 = real_part(f);
  const LineField f2 = imag_part(f);
  double s = 0.0;
  for (const auto& d : dirs.real_part) s += std::pow(line_inner(f1, d).real(), 2);
  for (const auto& d : dirs.imag_part) s += std::pow(line_inner(f2, d).real(), 2);
  return s;
}

double coercivity_weight(double x, double A, double a) {
  const double s = std::abs(x) / A;
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return std::pow(s, -a);
  // Monotone smoothstep blend between the two charts.
  const double t = s - 1.0;
  const double h = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  return (1.0 - h) + h * std::pow(s, -a);
}

namespace {

double rayleigh_min(const GroundState& gs, const ProfileSet& p, int n_probe, bool project,
                    const std::vector<double>* weight) {
  require(n_probe >= 8, "coercivity: n_probe must be at least 8");
  require(static_cast<std::size_t>(n_probe) < gs.q.grid().size(),
          "coercivity: n_probe must be below the reference grid size");
  const auto& g = gs.q.grid();
  auto basis = probes(g, n_probe);
  auto dirs = scal_directions(p);
  std::vector<double> w(g.weights().begin(), g.weights().end());
  std::vector<double> q2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) q2[k] = std::pow(gs.q[k].real(), 2);

  Matrix mass = gram(basis, basis, w);
  Matrix norm_m, kinetic;
  if (weight == nullptr) {
    std::vector<LineField> db;
    for (const auto& f : basis) db.push_back(real_part(line_half_wave(f)));
    kinetic = gram(basis, db, w);
    norm_m = mass + kinetic;
  } else {
    const auto& half = half_derivative(g);
    std::vector<LineField> hb;
    for (const auto& f : basis) hb.push_back(half.apply(f));
    std::vector<double> ww(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) ww[k] = w[k] * (*weight)[k];
    norm_m = gram(basis, basis, ww) + gram(hb, hb, ww);
    kinetic = norm_m;
  }

  double best = INFINITY;
  for (int component = 0; component < 2; ++component) {
    const double c = component == 0 ? 3.0 : 1.0;
    std::vector<double> pw(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) pw[k] = w[k] * c * q2[k];
    Matrix potential = gram(basis, basis, pw);
    Matrix form = weight == nullptr ? Matrix(mass + kinetic - potential) : Matrix(kinetic - potential);
    Matrix cons = project ? constraint_matrix(component == 0 ? dirs.real_part : dirs.imag_part, basis)
                          : Matrix(0, static_cast<long>(basis.size()));
    best = std::min(best, constrained_min(form, norm_m, cons));
  }
  return best;
}

}  // namespace

double coercivity_rayleigh(const GroundState& gs, const ProfileSet& p, int n_probe, bool project) {
  return rayleigh_min(gs, p, n_probe, project, nullptr);
}

double localized_coercivity_check(const GroundState& gs, const ProfileSet& p, double A, double a,
                                  int n_probe) {
  require(A > 0.0, "localized coercivity: A must be positive");
  require(a > 0.0 && a < 1.0, "localized coercivity: a must lie in (0,1)");
  const auto& g = gs.q.grid();
  std::vector<double> weight(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) weight[k] = coercivity_weight(g.node(k), A, a);
  return rayleigh_min(gs, p, n_probe, true, &weight);
}

}  // namespace hwb
