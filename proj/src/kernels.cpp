#include "rfsd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "rfsd/parallel.hpp"
#include "rfsd/simd/dispatch.hpp"

namespace rfsd {

double sech(double u) {
  const double e = std::exp(-std::fabs(u));
  return 2.0 * e / (1.0 + e * e);
}

double log_sech(double u) {
  const double au = std::fabs(u);
  return std::numbers::ln2 - au - std::log1p(std::exp(-2.0 * au));
}

TiltFunction TiltFunction::centered_at(const Vector& c) const {
  TiltFunction t = *this;
  t.center = c;
  return t;
}

double TiltFunction::log_eval(std::span<const double> x) const {
  if (kind == Kind::unit) return 0.0;
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double u = x[d] - (center.size() ? center[static_cast<Eigen::Index>(d)] : 0.0);
    s += std::sqrt(1.0 + u * u);
  }
  return a_prime * s;
}

void TiltFunction::grad_log(std::span<const double> x, std::span<double> out) const {
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (kind == Kind::unit) {
      out[d] = 0.0;
      continue;
    }
    const double u = x[d] - (center.size() ? center[static_cast<Eigen::Index>(d)] : 0.0);
    out[d] = a_prime * u / std::sqrt(1.0 + u * u);
  }
}

void BaseKernel::validate() const {
  if (const auto* imq = std::get_if<ImqKernel>(&stationary)) {
    require(imq->c > 0.0, "IMQ kernel requires c > 0");
    require(imq->beta < 0.0, "IMQ kernel requires beta < 0");
  } else {
    require(std::get<SechKernel>(stationary).a > 0.0, "sech kernel requires a > 0");
  }
  if (tilt.kind == TiltFunction::Kind::sech_exp) require(tilt.a_prime > 0.0, "tilt requires a' > 0");
}

namespace {

// F, dF/du_d and d2F/du_d^2 of the stationary part at u.
struct Partials {
  double f = 0.0;
  std::vector<double> fd;
  std::vector<double> fdd;
};

void stationary_partials(const StationaryKernel& sk, std::span<const double> u, Partials& p) {
  const std::size_t dim = u.size();
  p.fd.resize(dim);
  p.fdd.resize(dim);
  if (const auto* imq = std::get_if<ImqKernel>(&sk)) {
    double s = imq->c * imq->c;
    for (double v : u) s += v * v;
    const double b = imq->beta;
    p.f = std::pow(s, b);
    const double f1 = p.f / s;
    const double f2 = f1 / s;
    for (std::size_t d = 0; d < dim; ++d) {
      p.fd[d] = 2.0 * b * f1 * u[d];
      p.fdd[d] = 2.0 * b * f1 + 4.0 * b * (b - 1.0) * f2 * u[d] * u[d];
    }
  } else {
    const double kappa = kSechArgScale * std::get<SechKernel>(sk).a;
    double log_f = 0.0;
    for (double v : u) log_f += log_sech(kappa * v);
    p.f = std::exp(log_f);
    for (std::size_t d = 0; d < dim; ++d) {
      const double t = kappa * u[d];
      const double th = std::tanh(t);
      const double sh = sech(t);
      p.fd[d] = -kappa * th * p.f;
      p.fdd[d] = kappa * kappa * p.f * (th * th - sh * sh);
    }
  }
}

struct PairScratch {
  std::vector<double> u, gx, gy;
  Partials p;
};

// k0(x, y) given precomputed scores and tilt terms.
double stein_pair(const BaseKernel& k, std::span<const double> x, std::span<const double> y,
                  std::span<const double> bx, std::span<const double> by, double log_ax,
                  double log_ay, std::span<const double> gx, std::span<const double> gy,
                  PairScratch& s) {
  const std::size_t dim = x.size();
  s.u.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) s.u[d] = x[d] - y[d];
  stationary_partials(k.stationary, s.u, s.p);
  const double aa = std::exp(log_ax + log_ay);
  double total = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double f = s.p.f, fd = s.p.fd[d], fdd = s.p.fdd[d];
    const double kv = f;
    const double dx = fd + f * gx[d];
    const double dy = -fd + f * gy[d];
    const double dxdy = gx[d] * gy[d] * f + gy[d] * fd - gx[d] * fd - fdd;
    total += bx[d] * by[d] * kv + bx[d] * dy + by[d] * dx + dxdy;
  }
  return aa * total;
}

struct KernelTerms {
  double k;
  Vector grad_x, grad_y, dxdy;
};

KernelTerms kernel_terms(const BaseKernel& k, std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "kernel: dimension mismatch");
  const std::size_t dim = x.size();
  std::vector<double> u(dim), gx(dim), gy(dim);
  for (std::size_t d = 0; d < dim; ++d) u[d] = x[d] - y[d];
  Partials p;
  stationary_partials(k.stationary, u, p);
  k.tilt.grad_log(x, gx);
  k.tilt.grad_log(y, gy);
  const double aa = std::exp(k.tilt.log_eval(x) + k.tilt.log_eval(y));
  KernelTerms t{aa * p.f, Vector(dim), Vector(dim), Vector(dim)};
  for (std::size_t d = 0; d < dim; ++d) {
    const auto i = static_cast<Eigen::Index>(d);
    t.grad_x[i] = aa * (p.fd[d] + p.f * gx[d]);
    t.grad_y[i] = aa * (-p.fd[d] + p.f * gy[d]);
    t.dxdy[i] = aa * (gx[d] * gy[d] * p.f + gy[d] * p.fd[d] - gx[d] * p.fd[d] - p.fdd[d]);
  }
  return t;
}

}  // namespace

double kernel_eval(const BaseKernel& k, std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "kernel_eval: dimension mismatch");
  std::vector<double> u(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) u[d] = x[d] - y[d];
  double log_f = 0.0;
  if (const auto* imq = std::get_if<ImqKernel>(&k.stationary)) {
    double s = imq->c * imq->c;
    for (double v : u) s += v * v;
    log_f = imq->beta * std::log(s);
  } else {
    const double kappa = kSechArgScale * std::get<SechKernel>(k.stationary).a;
    for (double v : u) log_f += log_sech(kappa * v);
  }
  return std::exp(k.tilt.log_eval(x) + log_f + k.tilt.log_eval(y));
}

Vector kernel_grad_x(const BaseKernel& k, std::span<const double> x, std::span<const double> y) {
  return kernel_terms(k, x, y).grad_x;
}

Vector kernel_grad_y(const BaseKernel& k, std::span<const double> x, std::span<const double> y) {
  return kernel_terms(k, x, y).grad_y;
}

Vector kernel_dxdy_diag(const BaseKernel& k, std::span<const double> x, std::span<const double> y) {
  return kernel_terms(k, x, y).dxdy;
}

double stein_kernel_from_partials(std::span<const double> bx, std::span<const double> by, double k,
                                  std::span<const double> grad_x, std::span<const double> grad_y,
                                  std::span<const double> dxdy_diag) {
  double total = 0.0;
  for (std::size_t d = 0; d < bx.size(); ++d) {
    total += bx[d] * by[d] * k + bx[d] * grad_y[d] + by[d] * grad_x[d] + dxdy_diag[d];
  }
  return total;
}

double stein_kernel_eval(const ScoreModel& model, const BaseKernel& k, std::span<const double> x,
                         std::span<const double> y) {
  require(x.size() == model.dim && y.size() == model.dim,
          "stein_kernel_eval: dimension does not match model");
  const Vector bx = model.score_at(x);
  const Vector by = model.score_at(y);
  const KernelTerms t = kernel_terms(k, x, y);
  return stein_kernel_from_partials(as_span(bx), as_span(by), t.k, as_span(t.grad_x),
                                    as_span(t.grad_y), as_span(t.dxdy));
}

SampleSet canonical_order(const SampleSet& sample) {
  const Matrix& pts = sample.points();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(pts.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index d = 0; d < pts.cols(); ++d) {
      if (pts(a, d) < pts(b, d)) return true;
      if (pts(b, d) < pts(a, d)) return false;
    }
    return false;
  });
  Matrix out(pts.rows(), pts.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts.row(idx[i]);
  return SampleSet(std::move(out));
}

double ksd_squared(const SampleSet& input, const ScoreModel& model, const BaseKernel& k) {
  k.validate();
  require(input.dim() == model.dim, "ksd_squared: sample dimension does not match model");
  const SampleSet sample = canonical_order(input);
  const std::size_t n = sample.size();
  const std::size_t dim = sample.dim();
  const Matrix& x = sample.points();
  const Matrix scores = model.score_matrix(x);
  std::vector<double> rows(n, 0.0);

  const auto* imq = std::get_if<ImqKernel>(&k.stationary);
  if (imq != nullptr && k.tilt.kind == TiltFunction::Kind::unit) {
    simd::KsdRows in{n, dim, x.data(), scores.data(), imq->c * imq->c, imq->beta};
    const simd::KernelTable& table = simd::kernels();
    const simd::KernelTable& diag_table = simd::kernels(simd::Level::scalar);
    parallel_for(n, [&](std::size_t i) {
      rows[i] = diag_table.imq_ksd_row(in, i, i, i + 1) + 2.0 * table.imq_ksd_row(in, i, i + 1, n);
    });
  } else {
    const TiltFunction tilt = k.tilt.centered_at(sample.mean());
    const BaseKernel kc{k.stationary, tilt};
    Vector log_a(static_cast<Eigen::Index>(n));
    Matrix xt = x.transpose();  // D x N so each point is contiguous
    Matrix bt = scores.transpose();
    Matrix gt(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      std::span<const double> xi(xt.col(c).data(), dim);
      log_a[c] = tilt.log_eval(xi);
      tilt.grad_log(xi, std::span<double>(gt.col(c).data(), dim));
    }
    parallel_for(n, [&](std::size_t i) {
      PairScratch s;
      const auto ci = static_cast<Eigen::Index>(i);
      auto col = [&](const Matrix& m, std::size_t j) {
        return std::span<const double>(m.col(static_cast<Eigen::Index>(j)).data(), dim);
      };
      double off = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        off += stein_pair(kc, col(xt, i), col(xt, j), col(bt, i), col(bt, j), log_a[ci],
                          log_a[static_cast<Eigen::Index>(j)], col(gt, i), col(gt, j), s);
      }
      const double diag = stein_pair(kc, col(xt, i), col(xt, i), col(bt, i), col(bt, i), log_a[ci],
                                     log_a[ci], col(gt, i), col(gt, i), s);
      rows[i] = diag + 2.0 * off;
    });
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace rfsd
