#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipcons/numkit.hpp"

namespace lipcons {

enum class NonlinearKind { kSine, kSaturation, kTanh };

std::string to_string(NonlinearKind k);
NonlinearKind nonlinear_kind_from_string(const std::string& s);

/// One term of f: f[output] += coefficient * phi(x[input]), phi from the
/// catalog. sat(v) = clamp(v, -1, 1).
struct NonlinearTerm {
  NonlinearKind kind = NonlinearKind::kSine;
  std::size_t output = 0;
  std::size_t input = 0;
  double coefficient = 0.0;

  friend bool operator==(const NonlinearTerm&, const NonlinearTerm&) = default;
};

/// Serializable nonlinearity: a sum of scalar catalog terms. No terms means f ≡ 0.
class Nonlinearity {
 public:
  Nonlinearity() = default;
  Nonlinearity(std::size_t dim, std::vector<NonlinearTerm> terms);

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<NonlinearTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  void eval(std::span<const double> x, std::span<double> out) const;
  Vec operator()(std::span<const double> x) const;

  /// Lipschitz bound implied by the terms (each catalog function is 1-Lipschitz):
  /// spectral norm of the matrix of summed |coefficients|.
  double lipschitz_bound() const;

  friend bool operator==(const Nonlinearity&, const Nonlinearity&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<NonlinearTerm> terms_;
};

/// Agent dynamics  ẋ = A x + D1 f(x) + B u + D2 ω,  z-output matrix C.
struct AgentModel {
  Mat a;
  Mat b;
  Mat d1;
  Mat d2;
  Mat c_out;
  double alpha = 0.0;
  Nonlinearity f;

  std::size_t n() const noexcept { return a.rows(); }
  std::size_t inputs() const noexcept { return b.cols(); }
  std::size_t disturbances() const noexcept { return d2.cols(); }
  std::size_t outputs() const noexcept { return c_out.rows(); }

  /// Throws kInvalidArgument on inconsistent dimensions or alpha < 0.
  void validate() const;
};

struct LipschitzCheck {
  double worst_ratio = 0.0;  // max ‖f(x)-f(y)‖/‖x-y‖ over the samples
  bool pass = false;
};

/// Samples `pairs` random (x, y) in [-box, box]^n and compares the secant
/// ratio with alpha (+ slack).
LipschitzCheck check_lipschitz(const AgentModel& m, std::size_t pairs = 10000,
                               double box = 10.0, std::uint64_t seed = 1,
                               double slack = default_tolerances().lipschitz_slack);

/// The single-link manipulator network agent with f4 = -0.333 sin(x1).
AgentModel manipulator_model();

}  // namespace lipcons
