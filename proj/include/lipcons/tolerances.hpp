#pragma once

namespace lipcons {

// Default numeric tolerances. Every entry can be overridden by passing a
// modified copy to the operations that take one.
struct Tolerances {
  double symmetry_rel = 1e-12;       // relative asymmetry accepted by sym_eig
  double eig_orthogonality = 1e-10;  // per-dimension bound on |VᵀV - I|
  double max_condition = 1e12;       // solve_linear refuses beyond this
  double perron_residual = 1e-9;     // |rᵀL| bound for left_perron
  double rank_rel = 1e-9;            // singular values below rank_rel·σmax are zero
  double lmi_strictness = 1e-6;      // margin ≥ lmi_strictness·(1 + ‖F‖_F)
  double lyapunov_step_rel = 1e-10;  // allowed per-step V increase relative to V(0)
  double blowup_norm = 1e9;          // simulation abort threshold on ‖x‖
  double lipschitz_slack = 1e-9;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

}  // namespace lipcons
