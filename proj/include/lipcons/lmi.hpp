#pragma once

#include <cstddef>
#include <string>

#include "lipcons/model.hpp"
#include "lipcons/numkit.hpp"

namespace lipcons {

enum class LmiKind { kConsensus, kHinf };

std::string to_string(LmiKind k);

/// Synthesis LMI in the variables (P ≻ 0, s > 0).
///
/// Consensus:  [[A P + P Aᵀ - s B Bᵀ + α² D1 D1ᵀ, P], [P, -I]] ≺ 0
/// Hinf:       [[A Q + Q Aᵀ - s B Bᵀ + α² D1 D1ᵀ, Q, Q Cᵀ, D2],
///              [Q, -I, 0, 0], [C Q, 0, -I, 0], [D2ᵀ, 0, 0, -γ² I]] ≺ 0
///
/// The leader-follower LMI has the Consensus form.
class LmiProblem {
 public:
  static LmiProblem consensus(const AgentModel& m);
  static LmiProblem hinf(const AgentModel& m, double gamma);

  LmiKind kind() const noexcept { return kind_; }
  const Mat& a() const noexcept { return a_; }
  const Mat& b() const noexcept { return b_; }
  const Mat& d1() const noexcept { return d1_; }
  const Mat& d2() const noexcept { return d2_; }
  const Mat& c_out() const noexcept { return c_; }
  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }

  std::size_t n() const noexcept { return a_.rows(); }
  /// Side length of the assembled block matrix.
  std::size_t block_size() const noexcept;

 private:
  LmiKind kind_ = LmiKind::kConsensus;
  Mat a_, b_, d1_, d2_, c_;
  double alpha_ = 0.0;
  double gamma_ = 0.0;
};

struct LmiCertificate {
  Mat p;               // P, Q or S depending on the algorithm
  double scalar = 0.0; // τ, ε or κ
  double margin = 0.0; // -λmax(assembled)
  bool feasible = false;
  int iterations = 0;
  std::string note;
};

Mat assemble(const LmiProblem& problem, const Mat& p, double scalar);

struct LmiSolverOptions {
  int max_restarts = 6;
  int max_newton_per_stage = 80;
  double barrier_growth = 8.0;
  double gap_tolerance = 1e-7;
  // Fraction of the best attainable margin kept while minimizing the scalar.
  double margin_fraction = 0.1;
  // The scalar-minimizing stage stops once the barrier gap drops below
  // scalar_gap·s. Values near 1 keep P close to the analytic center; driving
  // it to zero pushes P toward singularity and inflates K.
  double scalar_gap = 1.0;
  Tolerances tol = default_tolerances();
};

/// Strict-feasibility search. Never certifies infeasibility: when no
/// strictly feasible point is found, the certificate has feasible = false and
/// carries the best margin seen.
LmiCertificate solve(const LmiProblem& problem, const LmiSolverOptions& opts = {});

struct LmiVerifyReport {
  double p_min_eig = 0.0;
  double scalar = 0.0;
  double lmi_max_eig = 0.0;
  double required_margin = 0.0;
  bool p_positive = false;
  bool scalar_positive = false;
  bool lmi_negative = false;
  bool pass = false;
};

/// Independent recomputation of all three strictness conditions.
/// `strictness` scales the required LMI margin: -λmax ≥ strictness·(1 + ‖F‖_F).
LmiVerifyReport verify(const LmiProblem& problem, const LmiCertificate& cert,
                       double strictness = default_tolerances().lmi_strictness);

/// The manipulator example's reference certificate (Hinf, γ = 2).
LmiCertificate manipulator_reference_certificate();

}  // namespace lipcons
