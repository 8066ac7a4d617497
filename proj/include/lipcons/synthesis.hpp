#pragma once

#include <optional>
#include <string>

#include "lipcons/graph.hpp"
#include "lipcons/lmi.hpp"
#include "lipcons/model.hpp"

namespace lipcons {

enum class DesignMode { kLeaderless, kHinf, kLeaderFollower };

std::string to_string(DesignMode m);
DesignMode design_mode_from_string(const std::string& s);

struct ProtocolDesign {
  DesignMode mode = DesignMode::kLeaderless;
  Mat k;                     // p x n feedback gain
  double c = 0.0;            // coupling strength actually used
  double c_threshold = 0.0;  // lower bound from the algorithm
  LmiCertificate cert;
  std::optional<double> gamma;
  // Leader-follower only: the simplified bound κ / λ1((L1+L1ᵀ)/2), reported
  // when the follower subgraph is balanced and strongly connected.
  std::optional<double> c_threshold_simplified;
  std::optional<std::size_t> leader;  // 0-based
  bool cert_injected = false;
};

struct SynthesisOptions {
  double c_multiplier = 1.0;            // c = c_multiplier · c_threshold
  std::optional<double> c_override;     // explicit c (must be ≥ threshold)
  std::optional<LmiCertificate> cert;   // bypasses the LMI solver
  LmiSolverOptions solver;
};

/// K = -½ Bᵀ P⁻¹.
Mat feedback_gain(const Mat& b, const Mat& p);

/// Leaderless consensus: LMI with τ, c ≥ τ / a(L). Needs a strongly connected graph.
ProtocolDesign algorithm1(const AgentModel& model, const GraphSpectra& spectra,
                          const SynthesisOptions& opts = {});

/// H∞ consensus: LMI with ε at level γ, c ≥ ε / λ2((L+Lᵀ)/2). Needs a balanced,
/// strongly connected graph.
ProtocolDesign algorithm2(const AgentModel& model, const GraphSpectra& spectra, double gamma,
                          const SynthesisOptions& opts = {});

/// Leader-follower tracking: LMI with κ, c ≥ κ / (λ1(H) · min q).
ProtocolDesign algorithm3(const AgentModel& model, const LeaderFollowerData& lf,
                          const SynthesisOptions& opts = {});

}  // namespace lipcons
