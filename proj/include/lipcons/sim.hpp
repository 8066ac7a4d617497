#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lipcons/graph.hpp"
#include "lipcons/model.hpp"
#include "lipcons/synthesis.hpp"

namespace lipcons {

enum class Waveform { kNone, kBipolar, kUnipolar };

std::string to_string(Waveform w);
Waveform waveform_from_string(const std::string& s);

/// Single-period square wave starting at t = 0 with width 2 and height 1.
/// Bipolar: +1 on [0,1), -1 on [1,2). Unipolar: +1 on [0,2). Zero afterwards.
double square_wave(double t, Waveform w = Waveform::kBipolar);

/// ω_i(t) = gains[i] · w(t) · 1 (every disturbance channel of agent i).
struct Disturbance {
  Waveform wave = Waveform::kNone;
  Vec gains;

  bool active() const noexcept { return wave != Waveform::kNone; }
};

/// Per-agent gains of the manipulator example: ω = [w, -w, 1.5w, 3w, -0.6w, 2w].
Disturbance manipulator_disturbance(Waveform w = Waveform::kBipolar);

/// Closed-loop network description shared by the right-hand sides.
struct Network {
  AgentModel model;
  DiGraph graph;
  Mat k;
  double c = 0.0;
  std::optional<std::size_t> leader;  // set: leader-follower protocol, leader gets u = 0

  std::size_t agents() const noexcept { return graph.size(); }
  std::size_t n() const noexcept { return model.n(); }
};

Network make_network(const AgentModel& model, const DiGraph& graph, const ProtocolDesign& design);

/// Protocol inputs u_i = c K Σ_j a_ij (x_i - x_j), stacked (N·p).
Vec protocol_inputs(const Network& net, std::span<const double> x);

/// ẋ_i = A x_i + D1 f(x_i) + B u_i.
Vec rhs_leaderless(const Network& net, std::span<const double> x);
/// As rhs_leaderless plus D2 ω_i; `omega` is stacked (N·m1).
Vec rhs_disturbed(const Network& net, std::span<const double> x, std::span<const double> omega);
/// Leader evolves open loop; followers use the protocol.
Vec rhs_leader_follower(const Network& net, std::span<const double> x);

struct Scenario {
  AgentModel model;
  DiGraph graph;
  ProtocolDesign design;
  Mat x0;  // N x n
  Disturbance disturbance;
  double t_end = 10.0;
  double dt = 1e-3;
  std::optional<double> gamma;  // for J; defaults to design.gamma
};

struct Trajectory {
  std::size_t agents = 0;
  std::size_t n = 0;
  std::size_t z_dim = 0;
  std::optional<double> gamma;
  std::vector<double> times;
  std::vector<Vec> states;  // N·n each
  std::vector<Vec> errors;  // N·n: e = ((I - 1rᵀ)⊗I)x, or υ_i = x_i - x_leader
  std::vector<Vec> perf;    // N·m2: z_i = (1/N) Σ_j C (x_i - x_j)
  std::vector<double> v_lyap;
  std::vector<double> int_z2;  // running ∫‖z‖²
  std::vector<double> int_w2;  // running ∫‖ω‖²
  Vec r;                       // weights used for e

  std::size_t samples() const noexcept { return times.size(); }
  double j_running(std::size_t k) const;
  /// max_{i,j} ‖x_i - x_j‖ at sample k.
  double max_pairwise_distance(std::size_t k) const;
};

/// Seeded uniform draw in [-1, 1] per state component.
Mat random_initial_states(std::size_t agents, std::size_t n, std::uint64_t seed);

/// Fixed-step RK4. The disturbance is held at its mid-step value, which is
/// exact for the square wave when its jumps fall on grid points.
Trajectory integrate(const Scenario& sc, const Tolerances& tol = default_tolerances());

struct HinfCost {
  double j = 0.0;
  double int_z2 = 0.0;
  double int_w2 = 0.0;
  std::optional<double> empirical_gain;  // sqrt(∫‖z‖² / ∫‖ω‖²), undefined when ∫‖ω‖² = 0
};

HinfCost hinf_cost(const Trajectory& traj, double gamma);

struct LyapunovReport {
  double v0 = 0.0;
  double v_final = 0.0;
  std::size_t increases = 0;      // steps with V[k+1] - V[k] > tolerance
  double increase_fraction = 0.0;
  double max_increase = 0.0;      // largest V[k+1] - V[k]
  double tolerance = 0.0;
  bool non_increasing = true;
};

/// V is computed during integration (V1 with the Perron weights, or V3 with
/// q for leader-follower runs).
LyapunovReport lyapunov_diag(const Trajectory& traj, double step_rel_tol = default_tolerances().lyapunov_step_rel);

struct CsvOptions {
  std::size_t decimation = 1;
};

/// Header: t,x{i}_{k}...,e{i}_{k}...,z{i}_{k}...,V,J_running (1-based i, k).
void write_csv(std::ostream& out, const Trajectory& traj, const CsvOptions& opts = {});

}  // namespace lipcons
