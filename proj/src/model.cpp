#include "lipcons/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lipcons/error.hpp"

namespace lipcons {

std::string to_string(NonlinearKind k) {
  switch (k) {
    case NonlinearKind::kSine:
      return "sin";
    case NonlinearKind::kSaturation:
      return "sat";
    case NonlinearKind::kTanh:
      return "tanh";
  }
  return "?";
}

NonlinearKind nonlinear_kind_from_string(const std::string& s) {
  if (s == "sin") return NonlinearKind::kSine;
  if (s == "sat") return NonlinearKind::kSaturation;
  if (s == "tanh") return NonlinearKind::kTanh;
  fail(ErrorCode::kParse, "unknown nonlinearity kind '" + s + "' (expected sin, sat or tanh)");
}

Nonlinearity::Nonlinearity(std::size_t dim, std::vector<NonlinearTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.output >= dim_ || t.input >= dim_) {
      std::ostringstream os;
      os << "nonlinearity term index out of range (output " << t.output << ", input " << t.input
         << ", dimension " << dim_ << ")";
      fail(ErrorCode::kInvalidArgument, os.str());
    }
    if (!std::isfinite(t.coefficient)) fail(ErrorCode::kInvalidArgument, "nonlinearity coefficient not finite");
  }
}

void Nonlinearity::eval(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& t : terms_) {
    const double v = x[t.input];
    double phi = 0.0;
    switch (t.kind) {
      case NonlinearKind::kSine:
        phi = std::sin(v);
        break;
      case NonlinearKind::kSaturation:
        phi = std::clamp(v, -1.0, 1.0);
        break;
      case NonlinearKind::kTanh:
        phi = std::tanh(v);
        break;
    }
    out[t.output] += t.coefficient * phi;
  }
}

Vec Nonlinearity::operator()(std::span<const double> x) const {
  Vec out(dim_);
  eval(x, out);
  return out;
}

double Nonlinearity::lipschitz_bound() const {
  if (terms_.empty()) return 0.0;
  Mat w(dim_, dim_);
  for (const auto& t : terms_) w(t.output, t.input) += std::abs(t.coefficient);
  // |f(x)-f(y)|_i ≤ Σ_j w_ij |x_j - y_j|, so ‖Δf‖ ≤ ‖W‖₂ ‖Δx‖.
  return std::sqrt(std::max(0.0, max_eig(w.transpose() * w)));
}

void AgentModel::validate() const {
  const std::size_t dim = a.rows();
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, "agent model: " + what); };
  if (dim == 0 || !a.is_square()) bad("A must be a non-empty square matrix");
  if (b.rows() != dim || b.cols() == 0) bad("B must have n rows and at least one column");
  if (d1.rows() != dim || d1.cols() != dim) bad("D1 must be n x n");
  if (!d2.empty() && d2.rows() != dim) bad("D2 must have n rows");
  if (!c_out.empty() && c_out.cols() != dim) bad("C must have n columns");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) bad("alpha must be finite and >= 0");
  if (f.dim() != 0 && f.dim() != dim) bad("nonlinearity dimension differs from n");
}

LipschitzCheck check_lipschitz(const AgentModel& m, std::size_t pairs, double box, std::uint64_t seed,
                               double slack) {
  LipschitzCheck out;
  const std::size_t n = m.n();
  if (m.f.is_zero()) {
    out.pass = true;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  Vec x(n), y(n), fx(n), fy(n), d(n);
  for (std::size_t k = 0; k < pairs; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
    }
    m.f.eval(x, fx);
    m.f.eval(y, fy);
    for (std::size_t i = 0; i < n; ++i) d[i] = fx[i] - fy[i];
    Vec dx(n);
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] - y[i];
    const double den = norm2(dx);
    if (den == 0.0) continue;
    out.worst_ratio = std::max(out.worst_ratio, norm2(d) / den);
  }
  out.pass = out.worst_ratio <= m.alpha + slack;
  return out;
}

AgentModel manipulator_model() {
  AgentModel m;
  m.a = Mat{{0, 1, 0, 0}, {-48.6, -1.26, 48.6, 0}, {0, 0, 0, 10}, {1.95, 0, -1.95, 0}};
  m.b = Mat{{0}, {21.6}, {0}, {0}};
  m.d1 = Mat::identity(4);
  m.d2 = Mat{{0}, {1}, {0.4}, {0}};
  m.c_out = Mat{{1, 0, 0, 0}};
  m.alpha = 0.333;
  m.f = Nonlinearity(4, {{NonlinearKind::kSine, 3, 0, -0.333}});
  return m;
}

}  // namespace lipcons
