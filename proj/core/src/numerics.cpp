#include "hwb/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "hwb/error.hpp"

namespace hwb {
namespace {

double norm_of(const InnerProduct& dot, std::span<const cplx> v) {
  return std::sqrt(std::max(0.0, dot(v, v).real()));
}

}  // namespace

KrylovResult conjugate_gradient(const LinearOp& a, std::span<const cplx> rhs, const InnerProduct& dot,
                                double tol, int max_iter) {
  const std::size_t n = rhs.size();
  KrylovResult out;
  out.x.assign(n, cplx(0.0));
  CVec r(rhs.begin(), rhs.end());
  CVec p = r;
  const double bnorm = norm_of(dot, rhs);
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  double rr = dot(r, r).real();
  for (int it = 1; it <= max_iter; ++it) {
    CVec ap = a(p);
    const double pap = dot(p, ap).real();
    if (!(pap > 0.0)) throw NumericalError("conjugate gradient: operator not positive definite");
    const double alpha = rr / pap;
    for (std::size_t j = 0; j < n; ++j) {
      out.x[j] += alpha * p[j];
      r[j] -= alpha * ap[j];
    }
    const double rr_new = dot(r, r).real();
    out.iterations = it;
    out.relative_residual = std::sqrt(rr_new) / bnorm;
    if (out.relative_residual < tol) {
      out.converged = true;
      return out;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t j = 0; j < n; ++j) p[j] = r[j] + beta * p[j];
  }
  return out;
}

KrylovResult minres(const LinearOp& a, std::span<const cplx> rhs, const InnerProduct& dot, double tol,
                    int max_iter) {
  const std::size_t n = rhs.size();
  KrylovResult out;
  out.x.assign(n, cplx(0.0));
  const double beta1 = norm_of(dot, rhs);
  if (beta1 == 0.0) {
    out.converged = true;
    return out;
  }
  CVec r1(rhs.begin(), rhs.end()), r2 = r1, y = r1, v(n);
  CVec w(n, cplx(0.0)), w1(n), w2(n, cplx(0.0));
  double beta = beta1, oldb = 0.0, dbar = 0.0, epsln = 0.0;
  double phibar = beta1, cs = -1.0, sn = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) v[j] = y[j] / beta;
    y = a(v);
    if (it >= 2) {
      for (std::size_t j = 0; j < n; ++j) y[j] -= (beta / oldb) * r1[j];
    }
    const double alfa = dot(v, y).real();
    for (std::size_t j = 0; j < n; ++j) y[j] -= (alfa / beta) * r2[j];
    r1.swap(r2);
    r2 = y;
    oldb = beta;
    beta = norm_of(dot, y);
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::hypot(gbar, beta);
    if (gamma == 0.0) throw NumericalError("minres: breakdown");
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1.swap(w2);
    w2.swap(w);
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = (v[j] - oldeps * w1[j] - delta * w2[j]) / gamma;
      out.x[j] += phi * w[j];
    }
    out.iterations = it;
    out.relative_residual = std::abs(phibar) / beta1;
    if (out.relative_residual < tol || beta == 0.0) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "fit_line: size mismatch");
  require(x.size() >= 2, "fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  require(den != 0.0, "fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  f.points = x.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.max_residual = std::max(f.max_residual, std::abs(r));
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

LineFit fit_loglog(std::span<const double> t, std::span<const double> q) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size() && i < q.size(); ++i) {
    const double a = std::abs(t[i]);
    const double b = std::abs(q[i]);
    if (a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b)) {
      lx.push_back(std::log(a));
      ly.push_back(std::log(b));
    }
  }
  return fit_line(lx, ly);
}

std::vector<double> fornberg_weights(double x0, std::span<const double> x, int order) {
  const int n = static_cast<int>(x.size());
  require(n > order, "fornberg_weights: not enough nodes");
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

std::vector<double> differentiate_series(std::span<const double> t, std::span<const double> f) {
  require(t.size() == f.size(), "differentiate_series: size mismatch");
  const std::size_t n = t.size();
  require(n >= 3, "differentiate_series: need at least three samples");
  const std::size_t width = std::min<std::size_t>(5, n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i >= width / 2 ? i - width / 2 : 0;
    lo = std::min(lo, n - width);
    auto w = fornberg_weights(t[i], t.subspan(lo, width), 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < width; ++k) acc += w[k] * f[lo + k];
    d[i] = acc;
  }
  return d;
}

}  // namespace hwb
