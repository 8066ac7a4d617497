#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "lipcons/tolerances.hpp"

namespace lipcons {

using Vec = std::vector<double>;

/// Dense real matrix, row-major. Entries are checked for finiteness when a
/// matrix is built from external data.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat diag(std::span<const double> d);
  static Mat column(std::span<const double> v);
  static Mat from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::vector<std::vector<double>> to_rows() const;

  Mat transpose() const;
  Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Mat& b);
  Vec col(std::size_t c) const;

  double frobenius() const;
  double max_abs() const;
  double trace() const;
  bool all_finite() const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator-(Mat a);
Mat operator*(Mat a, double s);
Mat operator*(double s, Mat a);
Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// Largest |a_ij - a_ji| relative to max |a_ij|; zero for exactly symmetric.
double asymmetry(const Mat& a);
Mat symmetrize(const Mat& a);

struct SymEig {
  Vec values;   // ascending
  Mat vectors;  // column k pairs with values[k]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations. The input is
/// symmetrized first; asymmetry beyond `tol.symmetry_rel` is rejected.
SymEig sym_eig(const Mat& s, const Tolerances& tol = default_tolerances());
double min_eig(const Mat& s);
double max_eig(const Mat& s);

bool is_positive_definite(const Mat& s, double margin = 0.0);

/// Cholesky factor (lower). Empty when `s` is not numerically positive definite.
std::optional<Mat> cholesky(const Mat& s);

/// Solves a·x = b with partial-pivot LU. Fails with a condition estimate when
/// `a` is singular or the 1-norm condition number exceeds tol.max_condition.
Mat solve_linear(const Mat& a, const Mat& b, const Tolerances& tol = default_tolerances());
Mat inverse(const Mat& a, const Tolerances& tol = default_tolerances());
double condition_1norm(const Mat& a);

Mat kron(const Mat& a, const Mat& b);

/// Numerical rank from the eigenvalues of aᵀa.
std::size_t rank(const Mat& a, const Tolerances& tol = default_tolerances());

struct Complex {
  double re;
  double im;
};

/// Eigenvalues of a general square matrix. Best effort, diagnostics only.
std::vector<Complex> eigenvalues_general(const Mat& a);

}  // namespace lipcons
