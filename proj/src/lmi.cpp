#include "lipcons/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "lipcons/error.hpp"

namespace lipcons {

std::string to_string(LmiKind k) { return k == LmiKind::kConsensus ? "consensus" : "hinf"; }

LmiProblem LmiProblem::consensus(const AgentModel& m) {
  m.validate();
  LmiProblem p;
  p.kind_ = LmiKind::kConsensus;
  p.a_ = m.a;
  p.b_ = m.b;
  p.d1_ = m.d1;
  p.alpha_ = m.alpha;
  return p;
}

LmiProblem LmiProblem::hinf(const AgentModel& m, double gamma) {
  m.validate();
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorCode::kInvalidArgument, "gamma must be positive");
  if (m.d2.empty() || m.c_out.empty()) {
    fail(ErrorCode::kInvalidArgument, "the H-infinity LMI needs D2 and C in the model");
  }
  LmiProblem p;
  p.kind_ = LmiKind::kHinf;
  p.a_ = m.a;
  p.b_ = m.b;
  p.d1_ = m.d1;
  p.d2_ = m.d2;
  p.c_ = m.c_out;
  p.alpha_ = m.alpha;
  p.gamma_ = gamma;
  return p;
}

std::size_t LmiProblem::block_size() const noexcept {
  const std::size_t n = a_.rows();
  return kind_ == LmiKind::kConsensus ? 2 * n : 2 * n + c_.rows() + d2_.cols();
}

Mat assemble(const LmiProblem& pr, const Mat& p, double scalar) {
  const std::size_t n = pr.n();
  if (p.rows() != n || p.cols() != n) {
    std::ostringstream os;
    os << "assemble: P must be " << n << "x" << n << ", got " << p.rows() << "x" << p.cols();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  const Mat& a = pr.a();
  const Mat& b = pr.b();
  Mat top = a * p + p * a.transpose() - scalar * (b * b.transpose()) +
            (pr.alpha() * pr.alpha()) * (pr.d1() * pr.d1().transpose());
  top = symmetrize(top);

  Mat out(pr.block_size(), pr.block_size());
  out.set_block(0, 0, top);
  out.set_block(0, n, p);
  out.set_block(n, 0, p);
  out.set_block(n, n, -Mat::identity(n));
  if (pr.kind() == LmiKind::kHinf) {
    const std::size_t m2 = pr.c_out().rows();
    const std::size_t m1 = pr.d2().cols();
    const Mat pct = p * pr.c_out().transpose();
    out.set_block(0, 2 * n, pct);
    out.set_block(2 * n, 0, pct.transpose());
    out.set_block(2 * n, 2 * n, -Mat::identity(m2));
    out.set_block(0, 2 * n + m2, pr.d2());
    out.set_block(2 * n + m2, 0, pr.d2().transpose());
    out.set_block(2 * n + m2, 2 * n + m2, -(pr.gamma() * pr.gamma()) * Mat::identity(m1));
  }
  return out;
}

namespace {

// G(y) = g0 + Σ y_i g_i must stay positive definite.
struct MatrixConstraint {
  Mat g0;
  std::vector<Mat> basis;
};

// a0 + aᵀy > 0.
struct ScalarConstraint {
  double a0 = 0.0;
  Vec a;
};

struct Barrier {
  std::vector<MatrixConstraint> mats;
  std::vector<ScalarConstraint> scalars;
  Vec cost;

  double nu() const {
    double v = static_cast<double>(scalars.size());
    for (const auto& m : mats) v += static_cast<double>(m.g0.rows());
    return v;
  }
};

Mat eval_constraint(const MatrixConstraint& c, const Vec& y) {
  Mat g = c.g0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != 0.0) g += y[i] * c.basis[i];
  return g;
}

double eval_scalar(const ScalarConstraint& c, const Vec& y) { return c.a0 + dot(c.a, y); }

// φ(y) + w cᵀy, or nullopt outside the domain.
std::optional<double> objective(const Barrier& b, const Vec& y, double w) {
  double v = w * dot(b.cost, y);
  for (const auto& c : b.mats) {
    const auto l = cholesky(eval_constraint(c, y));
    if (!l) return std::nullopt;
    for (std::size_t i = 0; i < l->rows(); ++i) v -= 2.0 * std::log((*l)(i, i));
  }
  for (const auto& c : b.scalars) {
    const double s = eval_scalar(c, y);
    if (!(s > 0.0)) return std::nullopt;
    v -= std::log(s);
  }
  return v;
}

Mat chol_inverse(const Mat& l) {
  const std::size_t n = l.rows();
  Mat linv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    linv(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l(i, k) * linv(k, j);
      linv(i, j) = s / l(i, i);
    }
  }
  return linv.transpose() * linv;
}

// Jacobi-scaled Cholesky solve with a growing ridge for near-singular Hessians.
// Empty when the Hessian is not usable (non-finite entries near the boundary).
std::optional<Vec> solve_spd(Mat h, Vec g) {
  const std::size_t k = h.rows();
  Vec d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = h(i, i) > 0.0 ? 1.0 / std::sqrt(h(i, i)) : 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    g[i] *= d[i];
    for (std::size_t j = 0; j < k; ++j) h(i, j) *= d[i] * d[j];
  }
  for (double ridge = 0.0; ridge < 1.0; ridge = ridge == 0.0 ? 1e-14 : ridge * 100.0) {
    Mat hr = h;
    for (std::size_t i = 0; i < k; ++i) hr(i, i) += ridge;
    const auto l = cholesky(hr);
    if (!l) continue;
    Vec z(k), x(k);
    for (std::size_t i = 0; i < k; ++i) {
      double s = g[i];
      for (std::size_t j = 0; j < i; ++j) s -= (*l)(i, j) * z[j];
      z[i] = s / (*l)(i, i);
    }
    for (std::size_t i = k; i-- > 0;) {
      double s = z[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= (*l)(j, i) * x[j];
      x[i] = s / (*l)(i, i);
    }
    for (std::size_t i = 0; i < k; ++i) x[i] *= d[i];
    return x;
  }
  return std::nullopt;
}

// Newton centering for min φ(y) + w cᵀy from a strictly feasible y.
int center(const Barrier& b, Vec& y, double w, int max_iter) {
  const std::size_t k = y.size();
  int it = 0;
  for (; it < max_iter; ++it) {
    Vec grad(k, 0.0);
    Mat hess(k, k);
    for (std::size_t i = 0; i < k; ++i) grad[i] = w * b.cost[i];
    for (const auto& c : b.mats) {
      const auto l = cholesky(eval_constraint(c, y));
      if (!l) fail(ErrorCode::kNumeric, "LMI solver: iterate left the feasible domain");
      const Mat ginv = chol_inverse(*l);
      std::vector<Mat> wi(k);
      for (std::size_t i = 0; i < k; ++i) {
        wi[i] = ginv * c.basis[i];
        grad[i] -= wi[i].trace();
      }
      const std::size_t d = ginv.rows();
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
          double t = 0.0;
          for (std::size_t r = 0; r < d; ++r)
            for (std::size_t s = 0; s < d; ++s) t += wi[i](r, s) * wi[j](s, r);
          hess(i, j) += t;
          if (i != j) hess(j, i) += t;
        }
    }
    for (const auto& c : b.scalars) {
      const double s = eval_scalar(c, y);
      for (std::size_t i = 0; i < k; ++i) {
        grad[i] -= c.a[i] / s;
        for (std::size_t j = 0; j < k; ++j) hess(i, j) += c.a[i] * c.a[j] / (s * s);
      }
    }
    Vec neg(k);
    for (std::size_t i = 0; i < k; ++i) neg[i] = -grad[i];
    const auto solved = solve_spd(hess, neg);
    if (!solved) break;
    const Vec& step = *solved;
    const double decrement = -dot(grad, step);
    if (decrement * 0.5 <= 1e-10) break;

    const double f0 = *objective(b, y, w);
    double t = 1.0;
    Vec trial(k);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      for (std::size_t i = 0; i < k; ++i) trial[i] = y[i] + t * step[i];
      const auto f = objective(b, trial, w);
      if (f && *f <= f0 - 0.25 * t * decrement) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    y = trial;
  }
  return it;
}

// Variable layout: upper triangle of P (row-major), then s, then optionally m.
struct Layout {
  std::size_t n = 0;
  std::size_t nsym = 0;
  std::size_t s_index = 0;

  explicit Layout(std::size_t dim) : n(dim), nsym(dim * (dim + 1) / 2), s_index(nsym) {}

  Mat unit(std::size_t idx) const {
    Mat e(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j, ++k)
        if (k == idx) {
          e(i, j) = 1.0;
          e(j, i) = 1.0;
        }
    return e;
  }

  Mat p_of(const Vec& y) const {
    Mat p(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j, ++k) {
        p(i, j) = y[k];
        p(j, i) = y[k];
      }
    return p;
  }

  void put_p(const Mat& p, Vec& y) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j, ++k) y[k] = p(i, j);
  }
};

// Affine decomposition of the block LMI written out per variable, kept apart
// from assemble() so verification re-derives the matrix independently.
struct LmiBasis {
  Mat f0;
  std::vector<Mat> fp;  // one per P coordinate
  Mat fs;
};

LmiBasis build_basis(const LmiProblem& pr, const Layout& lay) {
  const std::size_t n = pr.n();
  const std::size_t d = pr.block_size();
  LmiBasis out;
  out.f0 = Mat(d, d);
  Mat dd = pr.d1() * pr.d1().transpose();
  dd *= pr.alpha() * pr.alpha();
  out.f0.set_block(0, 0, dd);
  for (std::size_t i = n; i < 2 * n; ++i) out.f0(i, i) = -1.0;
  std::size_t m2 = 0;
  if (pr.kind() == LmiKind::kHinf) {
    m2 = pr.c_out().rows();
    const std::size_t m1 = pr.d2().cols();
    for (std::size_t i = 0; i < m2; ++i) out.f0(2 * n + i, 2 * n + i) = -1.0;
    for (std::size_t i = 0; i < m1; ++i) out.f0(2 * n + m2 + i, 2 * n + m2 + i) = -pr.gamma() * pr.gamma();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < m1; ++c) {
        out.f0(r, 2 * n + m2 + c) = pr.d2()(r, c);
        out.f0(2 * n + m2 + c, r) = pr.d2()(r, c);
      }
  }
  out.fs = Mat(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < pr.b().cols(); ++k) v += pr.b()(i, k) * pr.b()(j, k);
      out.fs(i, j) = -v;
    }
  for (std::size_t idx = 0; idx < lay.nsym; ++idx) {
    const Mat e = lay.unit(idx);
    Mat f(d, d);
    const Mat ae = pr.a() * e;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        f(i, j) = ae(i, j) + ae(j, i);
        f(i, n + j) = e(i, j);
        f(n + i, j) = e(i, j);
      }
    if (pr.kind() == LmiKind::kHinf) {
      const Mat ec = e * pr.c_out().transpose();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m2; ++j) {
          f(i, 2 * n + j) = ec(i, j);
          f(2 * n + j, i) = ec(i, j);
        }
    }
    out.fp.push_back(std::move(f));
  }
  return out;
}

Mat eval_lmi(const LmiBasis& basis, const Layout& lay, const Vec& y) {
  Mat f = basis.f0;
  for (std::size_t i = 0; i < lay.nsym; ++i)
    if (y[i] != 0.0) f += y[i] * basis.fp[i];
  f += y[lay.s_index] * basis.fs;
  return f;
}

struct StageResult {
  Vec y;
  int iterations = 0;
};

// Maximizes the margin m subject to -F(P,s) - m I ≻ 0, P ≻ 0, 0 < s < s_max,
// tr P < t_max. The start point is always strictly feasible for the barrier
// because m starts below λmin(-F).
StageResult maximize_margin(const LmiBasis& basis, const Layout& lay, const Mat& p0, double s0,
                            double s_max, double t_max, const LmiSolverOptions& opts) {
  const std::size_t k = lay.nsym + 2;
  const std::size_t mi = lay.nsym + 1;
  const std::size_t d = basis.f0.rows();
  Barrier bar;
  MatrixConstraint z{-1.0 * basis.f0, {}};
  MatrixConstraint pos{Mat(lay.n, lay.n), {}};
  for (std::size_t i = 0; i < lay.nsym; ++i) {
    z.basis.push_back(-1.0 * basis.fp[i]);
    pos.basis.push_back(lay.unit(i));
  }
  z.basis.push_back(-1.0 * basis.fs);
  z.basis.push_back(-1.0 * Mat::identity(d));
  pos.basis.push_back(Mat(lay.n, lay.n));
  pos.basis.push_back(Mat(lay.n, lay.n));
  bar.mats = {z, pos};

  ScalarConstraint s_low{0.0, Vec(k, 0.0)};
  s_low.a[lay.s_index] = 1.0;
  ScalarConstraint s_high{s_max, Vec(k, 0.0)};
  s_high.a[lay.s_index] = -1.0;
  ScalarConstraint trace{t_max, Vec(k, 0.0)};
  {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < lay.n; ++i)
      for (std::size_t j = i; j < lay.n; ++j, ++idx)
        if (i == j) trace.a[idx] = -1.0;
  }
  bar.scalars = {s_low, s_high, trace};
  bar.cost = Vec(k, 0.0);
  bar.cost[mi] = -1.0;

  StageResult r{Vec(k, 0.0), 0};
  lay.put_p(p0, r.y);
  r.y[lay.s_index] = s0;
  const Mat f_start = eval_lmi(basis, lay, r.y);
  r.y[mi] = -max_eig(f_start) - 1.0 - 1e-3 * f_start.frobenius();

  const double nu = bar.nu();
  double w = 1.0 / (1.0 + std::abs(r.y[mi]));
  for (int stage = 0; stage < 60; ++stage) {
    r.iterations += center(bar, r.y, w, opts.max_newton_per_stage);
    if (nu / w <= opts.gap_tolerance * std::max(1.0, std::abs(r.y[mi]))) break;
    w *= opts.barrier_growth;
  }
  return r;
}

// Minimizes s with the margin held at m_fixed, starting from a point with
// margin above m_fixed.
StageResult minimize_scalar(const LmiBasis& basis, const Layout& lay, const Vec& start, double m_fixed,
                            double s_max, double t_max, const LmiSolverOptions& opts) {
  const std::size_t k = lay.nsym + 1;
  const std::size_t d = basis.f0.rows();
  Barrier bar;
  MatrixConstraint z{-1.0 * basis.f0 - m_fixed * Mat::identity(d), {}};
  MatrixConstraint pos{Mat(lay.n, lay.n), {}};
  for (std::size_t i = 0; i < lay.nsym; ++i) {
    z.basis.push_back(-1.0 * basis.fp[i]);
    pos.basis.push_back(lay.unit(i));
  }
  z.basis.push_back(-1.0 * basis.fs);
  pos.basis.push_back(Mat(lay.n, lay.n));
  bar.mats = {z, pos};

  ScalarConstraint s_low{0.0, Vec(k, 0.0)};
  s_low.a[lay.s_index] = 1.0;
  ScalarConstraint s_high{s_max, Vec(k, 0.0)};
  s_high.a[lay.s_index] = -1.0;
  ScalarConstraint trace{t_max, Vec(k, 0.0)};
  {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < lay.n; ++i)
      for (std::size_t j = i; j < lay.n; ++j, ++idx)
        if (i == j) trace.a[idx] = -1.0;
  }
  bar.scalars = {s_low, s_high, trace};
  bar.cost = Vec(k, 0.0);
  bar.cost[lay.s_index] = 1.0;

  StageResult r{Vec(start.begin(), start.begin() + static_cast<std::ptrdiff_t>(k)), 0};
  const double scale = std::max(start[lay.s_index], 1e-12);
  const double nu = bar.nu();
  double w = 1.0 / scale;
  for (int stage = 0; stage < 60; ++stage) {
    r.iterations += center(bar, r.y, w, opts.max_newton_per_stage);
    if (nu / w <= opts.scalar_gap * std::max(r.y[lay.s_index], 1e-6)) break;
    w *= opts.barrier_growth;
  }
  return r;
}

double required_margin(const Mat& f, double strictness) { return strictness * (1.0 + f.frobenius()); }

}  // namespace

LmiCertificate solve(const LmiProblem& problem, const LmiSolverOptions& opts) {
  const Layout lay(problem.n());
  const LmiBasis basis = build_basis(problem, lay);
  const double strict = opts.tol.lmi_strictness;

  const double a_norm = std::max(problem.a().frobenius(), 1.0);
  double s0 = 10.0 * a_norm * a_norm;
  const Mat p0 = a_norm * Mat::identity(lay.n);

  LmiCertificate best;
  best.p = p0;
  best.scalar = s0;
  best.margin = -std::numeric_limits<double>::infinity();

  for (int restart = 0; restart <= opts.max_restarts; ++restart, s0 *= 10.0) {
    const double s_max = 100.0 * s0;
    const double t_max = 100.0 * p0.trace();
    StageResult a = maximize_margin(basis, lay, p0, s0, s_max, t_max, opts);
    best.iterations += a.iterations;

    const Mat fa = eval_lmi(basis, lay, a.y);
    const double margin_a = -max_eig(fa);
    if (margin_a > best.margin) {
      best.margin = margin_a;
      best.p = lay.p_of(a.y);
      best.scalar = a.y[lay.s_index];
    }
    if (!(margin_a > 0.0) || !is_positive_definite(lay.p_of(a.y))) continue;

    // Strictly feasible in absolute terms. Trade margin for a small scalar,
    // which sets the coupling-strength threshold downstream and shrinks ‖F‖.
    for (double frac = opts.margin_fraction; frac < 1.0; frac *= 2.0) {
      StageResult b = minimize_scalar(basis, lay, a.y, frac * margin_a, s_max, t_max, opts);
      best.iterations += b.iterations;
      Vec yb = b.y;
      yb.push_back(0.0);
      const Mat fb = eval_lmi(basis, lay, yb);
      const double margin_b = -max_eig(fb);
      const Mat pb = lay.p_of(yb);
      if (margin_b > required_margin(fb, strict) && is_positive_definite(pb) && yb[lay.s_index] > 0.0) {
        best.p = pb;
        best.scalar = yb[lay.s_index];
        best.margin = margin_b;
        best.feasible = true;
        return best;
      }
    }
    if (margin_a > required_margin(fa, strict)) {
      best.p = lay.p_of(a.y);
      best.scalar = a.y[lay.s_index];
      best.margin = margin_a;
      best.feasible = true;
      return best;
    }
  }
  std::ostringstream os;
  os << "no strictly feasible point within budget (best margin " << best.margin << ")";
  best.note = os.str();
  return best;
}

LmiVerifyReport verify(const LmiProblem& problem, const LmiCertificate& cert, double strictness) {
  LmiVerifyReport r;
  r.scalar = cert.scalar;
  r.scalar_positive = cert.scalar > 0.0;
  if (cert.p.rows() != problem.n() || cert.p.cols() != problem.n() || !cert.p.all_finite()) return r;
  if (asymmetry(cert.p) > 1e-9) return r;
  r.p_min_eig = min_eig(symmetrize(cert.p));
  r.p_positive = r.p_min_eig > 0.0;
  const Mat f = assemble(problem, symmetrize(cert.p), cert.scalar);
  r.lmi_max_eig = max_eig(f);
  r.required_margin = strictness * (1.0 + f.frobenius());
  r.lmi_negative = -r.lmi_max_eig >= r.required_margin;
  r.pass = r.p_positive && r.scalar_positive && r.lmi_negative;
  return r;
}

LmiCertificate manipulator_reference_certificate() {
  LmiCertificate c;
  c.p = Mat{{0.4060, -0.9667, 0.3547, -0.0842},
            {-0.9667, 67.6536, 0.0162, -0.0024},
            {0.3547, 0.0162, 0.4941, -0.0496},
            {-0.0842, -0.0024, -0.0496, 0.0367}};
  c.scalar = 29.6636;
  c.feasible = true;
  c.note = "reference certificate";
  return c;
}

}  // namespace lipcons
