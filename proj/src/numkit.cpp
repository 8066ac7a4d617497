#include "lipcons/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lipcons/error.hpp"

namespace lipcons {

namespace {

void require_finite(std::span<const double> d) {
  for (double v : d) {
    if (!std::isfinite(v)) fail(ErrorCode::kNumeric, "matrix entry is not finite");
  }
}

void require_square(const Mat& a, const char* op) {
  if (!a.is_square()) {
    std::ostringstream os;
    os << op << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
}

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
       << "x" << b.cols();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) fail(ErrorCode::kNumeric, "matrix fill value is not finite");
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    fail(ErrorCode::kInvalidArgument, "matrix data size does not match rows*cols");
  }
  require_finite(data_);
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) fail(ErrorCode::kInvalidArgument, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(std::span<const double> d) {
  Mat m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  require_finite(m.data_);
  return m;
}

Mat Mat::column(std::span<const double> v) {
  return Mat(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Mat Mat::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = nr == 0 ? 0 : rows.front().size();
  std::vector<double> d;
  d.reserve(nr * nc);
  for (const auto& r : rows) {
    if (r.size() != nc) fail(ErrorCode::kInvalidArgument, "ragged matrix rows");
    d.insert(d.end(), r.begin(), r.end());
  }
  return Mat(nr, nc, std::move(d));
}

std::vector<std::vector<double>> Mat::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i].assign(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  return out;
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Mat Mat::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) fail(ErrorCode::kInvalidArgument, "block out of range");
  Mat b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Mat::set_block(std::size_t r0, std::size_t c0, const Mat& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) {
    fail(ErrorCode::kInvalidArgument, "set_block out of range");
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Vec Mat::col(std::size_t c) const {
  Vec v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
  return v;
}

double Mat::frobenius() const { return norm2(data_); }

double Mat::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Mat::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

bool Mat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Mat& Mat::operator+=(const Mat& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator-(Mat a) { return a *= -1.0; }
Mat operator*(Mat a, double s) { return a *= s; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matrix product: inner dimensions " << a.cols() << " and " << b.rows();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vec operator*(const Mat& a, std::span<const double> x) {
  if (a.cols() != x.size()) fail(ErrorCode::kInvalidArgument, "matrix-vector size mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kInvalidArgument, "dot: size mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double asymmetry(const Mat& a) {
  require_square(a, "asymmetry");
  const double scale = a.max_abs();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst / scale;
}

Mat symmetrize(const Mat& a) {
  require_square(a, "symmetrize");
  Mat s = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      s(i, j) = m;
      s(j, i) = m;
    }
  return s;
}

SymEig sym_eig(const Mat& s_in, const Tolerances& tol) {
  require_square(s_in, "sym_eig");
  if (asymmetry(s_in) > tol.symmetry_rel) {
    std::ostringstream os;
    os << "sym_eig: input asymmetry " << asymmetry(s_in) << " exceeds " << tol.symmetry_rel;
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  const std::size_t n = s_in.rows();
  Mat a = symmetrize(s_in);
  Mat v = Mat::identity(n);
  const double scale = a.frobenius();

  constexpr int kMaxSweeps = 100;
  bool converged = n <= 1 || scale == 0.0;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "sym_eig: Jacobi iteration did not converge (n=" << n << ", ‖S‖_F=" << scale
       << ", condition estimate " << condition_1norm(s_in) << ")";
    fail(ErrorCode::kNumeric, os.str());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEig out{Vec(n), Mat(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double min_eig(const Mat& s) {
  if (s.empty()) fail(ErrorCode::kInvalidArgument, "min_eig of empty matrix");
  return sym_eig(s).values.front();
}

double max_eig(const Mat& s) {
  if (s.empty()) fail(ErrorCode::kInvalidArgument, "max_eig of empty matrix");
  return sym_eig(s).values.back();
}

bool is_positive_definite(const Mat& s, double margin) {
  require_square(s, "is_positive_definite");
  if (margin < 0.0) fail(ErrorCode::kInvalidArgument, "is_positive_definite: negative margin");
  if (s.empty()) return false;
  return min_eig(s) > margin;
}

std::optional<Mat> cholesky(const Mat& s) {
  require_square(s, "cholesky");
  const std::size_t n = s.rows();
  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = 0.5 * (s(i, j) + s(j, i));
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

namespace {

struct Lu {
  Mat lu;
  std::vector<std::size_t> perm;
  bool singular = false;
};

Lu lu_factor(const Mat& a) {
  const std::size_t n = a.rows();
  Lu f{a, std::vector<std::size_t>(n), false};
  std::iota(f.perm.begin(), f.perm.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(f.lu(i, k)) > std::abs(f.lu(piv, k))) piv = i;
    if (std::abs(f.lu(piv, k)) <= std::numeric_limits<double>::min()) {
      f.singular = true;
      return f;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = f.lu(i, k) / f.lu(k, k);
      f.lu(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
    }
  }
  return f;
}

Mat lu_solve(const Lu& f, const Mat& b) {
  const std::size_t n = f.lu.rows();
  Mat x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = b(f.perm[i], c);
      for (std::size_t k = 0; k < i; ++k) s -= f.lu(i, k) * y[k];
      y[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= f.lu(i, k) * x(k, c);
      x(i, c) = s / f.lu(i, i);
    }
  }
  return x;
}

double norm1(const Mat& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

double condition_1norm(const Mat& a) {
  require_square(a, "condition_1norm");
  if (a.empty()) return 1.0;
  const Lu f = lu_factor(a);
  if (f.singular) return std::numeric_limits<double>::infinity();
  const Mat inv = lu_solve(f, Mat::identity(a.rows()));
  if (!inv.all_finite()) return std::numeric_limits<double>::infinity();
  return norm1(a) * norm1(inv);
}

Mat solve_linear(const Mat& a, const Mat& b, const Tolerances& tol) {
  require_square(a, "solve_linear");
  if (b.rows() != a.rows()) fail(ErrorCode::kInvalidArgument, "solve_linear: rhs row count mismatch");
  const Lu f = lu_factor(a);
  const double cond = f.singular ? std::numeric_limits<double>::infinity()
                                 : norm1(a) * norm1(lu_solve(f, Mat::identity(a.rows())));
  if (!(cond <= tol.max_condition)) {
    std::ostringstream os;
    os << "solve_linear: matrix is singular or ill-conditioned (1-norm condition estimate "
       << cond << ", limit " << tol.max_condition << ")";
    fail(ErrorCode::kNumeric, os.str());
  }
  return lu_solve(f, b);
}

Mat inverse(const Mat& a, const Tolerances& tol) {
  return solve_linear(a, Mat::identity(a.rows()), tol);
}

Mat kron(const Mat& a, const Mat& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q) k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
    }
  return k;
}

std::size_t rank(const Mat& a, const Tolerances& tol) {
  if (a.empty()) return 0;
  const auto rows = static_cast<Eigen::Index>(a.rows());
  const auto cols = static_cast<Eigen::Index>(a.cols());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol.rank_rel * smax) ++r;
  return r;
}

std::vector<Complex> eigenvalues_general(const Mat& a) {
  require_square(a, "eigenvalues_general");
  const auto n = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::kNumeric, "eigenvalues_general: QR iteration failed");
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.push_back({es.eigenvalues()(i).real(), es.eigenvalues()(i).imag()});
  std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
    return x.re != y.re ? x.re < y.re : x.im < y.im;
  });
  return out;
}

}  // namespace lipcons
