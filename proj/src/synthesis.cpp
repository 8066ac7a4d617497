#include "lipcons/synthesis.hpp"

#include <sstream>

#include "lipcons/error.hpp"

namespace lipcons {

std::string to_string(DesignMode m) {
  switch (m) {
    case DesignMode::kLeaderless:
      return "leaderless";
    case DesignMode::kHinf:
      return "hinf";
    case DesignMode::kLeaderFollower:
      return "leader-follower";
  }
  return "?";
}

DesignMode design_mode_from_string(const std::string& s) {
  if (s == "leaderless") return DesignMode::kLeaderless;
  if (s == "hinf") return DesignMode::kHinf;
  if (s == "leader-follower") return DesignMode::kLeaderFollower;
  fail(ErrorCode::kInvalidArgument, "unknown mode '" + s + "' (expected leaderless, hinf or leader-follower)");
}

Mat feedback_gain(const Mat& b, const Mat& p) {
  // P symmetric: (P⁻¹B)ᵀ = BᵀP⁻¹.
  return -0.5 * solve_linear(p, b).transpose();
}

namespace {

LmiCertificate obtain_certificate(const LmiProblem& problem, const SynthesisOptions& opts) {
  if (!opts.cert) {
    LmiCertificate cert = solve(problem, opts.solver);
    if (!cert.feasible) {
      fail(ErrorCode::kInfeasible, "LMI solver: " + to_string(problem.kind()) + " LMI infeasible within budget (" +
                                       cert.note + ")");
    }
    return cert;
  }
  LmiCertificate cert = *opts.cert;
  if (cert.p.rows() != problem.n() || cert.p.cols() != problem.n()) {
    fail(ErrorCode::kInvalidArgument, "injected certificate has the wrong dimension");
  }
  // Hand-entered certificates are rounded, so only the sign conditions are enforced.
  const LmiVerifyReport v = verify(problem, cert, 0.0);
  if (!v.p_positive || !v.scalar_positive) {
    fail(ErrorCode::kPrecondition, "injected certificate: P must be positive definite and the scalar positive");
  }
  if (!(v.lmi_max_eig < 0.0)) {
    std::ostringstream os;
    os << "injected certificate violates the " << to_string(problem.kind())
       << " LMI (largest eigenvalue " << v.lmi_max_eig << ")";
    fail(ErrorCode::kInfeasible, os.str());
  }
  cert.margin = -v.lmi_max_eig;
  cert.feasible = true;
  return cert;
}

void choose_coupling(ProtocolDesign& d, const SynthesisOptions& opts) {
  if (!(opts.c_multiplier >= 1.0)) fail(ErrorCode::kInvalidArgument, "c multiplier must be >= 1");
  d.c = opts.c_multiplier * d.c_threshold;
  if (opts.c_override) {
    if (*opts.c_override < d.c_threshold) {
      std::ostringstream os;
      os << "requested coupling strength " << *opts.c_override << " is below the threshold " << d.c_threshold;
      fail(ErrorCode::kPrecondition, os.str());
    }
    d.c = *opts.c_override;
  }
}

}  // namespace

ProtocolDesign algorithm1(const AgentModel& model, const GraphSpectra& spectra, const SynthesisOptions& opts) {
  if (!spectra.flags.strongly_connected || !spectra.a_of_l) {
    fail(ErrorCode::kPrecondition, "Theorem 1 requires a strongly connected graph");
  }
  ProtocolDesign d;
  d.mode = DesignMode::kLeaderless;
  d.cert_injected = opts.cert.has_value();
  d.cert = obtain_certificate(LmiProblem::consensus(model), opts);
  d.k = feedback_gain(model.b, d.cert.p);
  d.c_threshold = d.cert.scalar / *spectra.a_of_l;
  choose_coupling(d, opts);
  return d;
}

ProtocolDesign algorithm2(const AgentModel& model, const GraphSpectra& spectra, double gamma,
                          const SynthesisOptions& opts) {
  if (!spectra.flags.strongly_connected || !spectra.flags.balanced || !spectra.lambda2_sym) {
    fail(ErrorCode::kPrecondition, "Theorem 2 requires balanced and strongly connected graph");
  }
  ProtocolDesign d;
  d.mode = DesignMode::kHinf;
  d.gamma = gamma;
  d.cert_injected = opts.cert.has_value();
  d.cert = obtain_certificate(LmiProblem::hinf(model, gamma), opts);
  d.k = feedback_gain(model.b, d.cert.p);
  d.c_threshold = d.cert.scalar / *spectra.lambda2_sym;
  choose_coupling(d, opts);
  return d;
}

ProtocolDesign algorithm3(const AgentModel& model, const LeaderFollowerData& lf, const SynthesisOptions& opts) {
  if (!(lf.lambda1_h > 0.0) || !(lf.min_q > 0.0)) {
    fail(ErrorCode::kPrecondition, "Theorem 3 requires Assumption 1 (spanning tree rooted at the leader)");
  }
  ProtocolDesign d;
  d.mode = DesignMode::kLeaderFollower;
  d.leader = lf.leader;
  d.cert_injected = opts.cert.has_value();
  d.cert = obtain_certificate(LmiProblem::consensus(model), opts);
  d.k = feedback_gain(model.b, d.cert.p);
  d.c_threshold = d.cert.scalar / (lf.lambda1_h * lf.min_q);
  if (lf.lambda1_sym_l1) d.c_threshold_simplified = d.cert.scalar / *lf.lambda1_sym_l1;
  choose_coupling(d, opts);
  return d;
}

}  // namespace lipcons
