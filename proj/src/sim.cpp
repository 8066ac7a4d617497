#include "lipcons/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "lipcons/error.hpp"

namespace lipcons {

std::string to_string(Waveform w) {
  switch (w) {
    case Waveform::kNone:
      return "none";
    case Waveform::kBipolar:
      return "bipolar";
    case Waveform::kUnipolar:
      return "unipolar";
  }
  return "?";
}

Waveform waveform_from_string(const std::string& s) {
  if (s == "none") return Waveform::kNone;
  if (s == "bipolar") return Waveform::kBipolar;
  if (s == "unipolar") return Waveform::kUnipolar;
  fail(ErrorCode::kInvalidArgument, "unknown disturbance '" + s + "' (expected bipolar, unipolar or none)");
}

double square_wave(double t, Waveform w) {
  if (w == Waveform::kNone || t < 0.0 || t >= 2.0) return 0.0;
  if (w == Waveform::kUnipolar) return 1.0;
  return t < 1.0 ? 1.0 : -1.0;
}

Disturbance manipulator_disturbance(Waveform w) { return Disturbance{w, {1.0, -1.0, 1.5, 3.0, -0.6, 2.0}}; }

Network make_network(const AgentModel& model, const DiGraph& graph, const ProtocolDesign& design) {
  model.validate();
  if (design.k.rows() != model.inputs() || design.k.cols() != model.n()) {
    std::ostringstream os;
    os << "gain K must be " << model.inputs() << "x" << model.n() << ", got " << design.k.rows() << "x"
       << design.k.cols();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  Network net{model, graph, design.k, design.c, std::nullopt};
  if (design.mode == DesignMode::kLeaderFollower) {
    if (!design.leader) fail(ErrorCode::kInvalidArgument, "leader-follower design without a leader");
    if (*design.leader >= graph.size()) fail(ErrorCode::kInvalidArgument, "leader index out of range");
    net.leader = design.leader;
  }
  return net;
}

Vec protocol_inputs(const Network& net, std::span<const double> x) {
  const std::size_t n = net.n();
  const std::size_t p = net.model.inputs();
  const std::size_t agents = net.agents();
  Vec u(agents * p, 0.0);
  Vec rel(n);
  std::vector<Vec> sums(agents, Vec(n, 0.0));
  for (const auto& [parent, child] : net.graph.edges()) {
    for (std::size_t k = 0; k < n; ++k) sums[child][k] += x[child * n + k] - x[parent * n + k];
  }
  for (std::size_t i = 0; i < agents; ++i) {
    if (net.leader && *net.leader == i) continue;
    for (std::size_t r = 0; r < p; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += net.k(r, k) * sums[i][k];
      u[i * p + r] = net.c * s;
    }
  }
  return u;
}

namespace {

Vec agent_dynamics(const Network& net, std::span<const double> x, std::span<const double> u,
                   std::span<const double> omega) {
  const AgentModel& m = net.model;
  const std::size_t n = m.n();
  const std::size_t p = m.inputs();
  const std::size_t m1 = m.disturbances();
  Vec dx(x.size(), 0.0);
  Vec f(n);
  for (std::size_t i = 0; i < net.agents(); ++i) {
    const auto xi = x.subspan(i * n, n);
    m.f.eval(xi, f);
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += m.a(r, k) * xi[k] + m.d1(r, k) * f[k];
      for (std::size_t k = 0; k < p; ++k) s += m.b(r, k) * u[i * p + k];
      if (!omega.empty())
        for (std::size_t k = 0; k < m1; ++k) s += m.d2(r, k) * omega[i * m1 + k];
      dx[i * n + r] = s;
    }
  }
  return dx;
}

void check_state_size(const Network& net, std::span<const double> x) {
  if (x.size() != net.agents() * net.n()) fail(ErrorCode::kInvalidArgument, "stacked state has the wrong size");
}

}  // namespace

Vec rhs_leaderless(const Network& net, std::span<const double> x) {
  check_state_size(net, x);
  return agent_dynamics(net, x, protocol_inputs(net, x), {});
}

Vec rhs_disturbed(const Network& net, std::span<const double> x, std::span<const double> omega) {
  check_state_size(net, x);
  if (omega.size() != net.agents() * net.model.disturbances()) {
    fail(ErrorCode::kInvalidArgument, "stacked disturbance has the wrong size");
  }
  return agent_dynamics(net, x, protocol_inputs(net, x), omega);
}

Vec rhs_leader_follower(const Network& net, std::span<const double> x) {
  check_state_size(net, x);
  if (!net.leader) fail(ErrorCode::kInvalidArgument, "rhs_leader_follower needs a leader");
  return agent_dynamics(net, x, protocol_inputs(net, x), {});
}

double Trajectory::j_running(std::size_t k) const {
  const double g = gamma.value_or(0.0);
  return int_z2[k] - g * g * int_w2[k];
}

double Trajectory::max_pairwise_distance(std::size_t k) const {
  const Vec& x = states[k];
  double best = 0.0;
  for (std::size_t i = 0; i < agents; ++i)
    for (std::size_t j = i + 1; j < agents; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        const double d = x[i * n + c] - x[j * n + c];
        s += d * d;
      }
      best = std::max(best, std::sqrt(s));
    }
  return best;
}

Mat random_initial_states(std::size_t agents, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat x(agents, n);
  for (std::size_t i = 0; i < agents; ++i)
    for (std::size_t k = 0; k < n; ++k) x(i, k) = u(rng);
  return x;
}

namespace {

struct Observer {
  std::size_t agents = 0;
  std::size_t n = 0;
  Vec weights;                         // r (leaderless) or q on followers (leader-follower)
  std::optional<std::size_t> leader;
  Mat p_inv;
  Mat c_out;

  Vec errors(const Vec& x) const {
    Vec e(x.size());
    Vec ref(n, 0.0);
    if (leader) {
      for (std::size_t k = 0; k < n; ++k) ref[k] = x[*leader * n + k];
    } else {
      for (std::size_t i = 0; i < agents; ++i)
        for (std::size_t k = 0; k < n; ++k) ref[k] += weights[i] * x[i * n + k];
    }
    for (std::size_t i = 0; i < agents; ++i)
      for (std::size_t k = 0; k < n; ++k) e[i * n + k] = x[i * n + k] - ref[k];
    return e;
  }

  Vec perf(const Vec& x) const {
    const std::size_t m2 = c_out.rows();
    Vec z(agents * m2, 0.0);
    if (m2 == 0) return z;
    Vec mean(n, 0.0);
    for (std::size_t i = 0; i < agents; ++i)
      for (std::size_t k = 0; k < n; ++k) mean[k] += x[i * n + k] / static_cast<double>(agents);
    for (std::size_t i = 0; i < agents; ++i)
      for (std::size_t r = 0; r < m2; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += c_out(r, k) * (x[i * n + k] - mean[k]);
        z[i * m2 + r] = s;
      }
    return z;
  }

  double lyapunov(const Vec& e) const {
    if (p_inv.empty()) return 0.0;
    double v = 0.0;
    for (std::size_t i = 0; i < agents; ++i) {
      if (leader && *leader == i) continue;
      double q = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) q += e[i * n + a] * p_inv(a, b) * e[i * n + b];
      v += weights[i] * q;
    }
    return v;
  }
};

Observer make_observer(const Scenario& sc) {
  Observer o;
  o.agents = sc.graph.size();
  o.n = sc.model.n();
  o.c_out = sc.model.c_out;
  if (sc.design.cert.p.rows() == o.n && is_positive_definite(sc.design.cert.p)) o.p_inv = inverse(sc.design.cert.p);
  o.weights.assign(o.agents, 1.0 / static_cast<double>(o.agents));
  if (sc.design.mode == DesignMode::kLeaderFollower) {
    o.leader = sc.design.leader;
    const LeaderFollowerData lf = leader_follower_data(sc.graph, *sc.design.leader);
    o.weights.assign(o.agents, 0.0);
    for (std::size_t k = 0; k < lf.followers.size(); ++k) o.weights[lf.followers[k]] = lf.q[k];
  } else if (classify(sc.graph).strongly_connected && o.agents >= 2) {
    o.weights = left_perron(laplacian(sc.graph));
  }
  return o;
}

void validate_scenario(const Scenario& sc) {
  sc.model.validate();
  if (!(sc.dt > 0.0) || !std::isfinite(sc.dt)) fail(ErrorCode::kInvalidArgument, "dt must be positive");
  if (!(sc.t_end >= sc.dt) || !std::isfinite(sc.t_end)) fail(ErrorCode::kInvalidArgument, "t_end must be >= dt");
  if (sc.x0.rows() != sc.graph.size() || sc.x0.cols() != sc.model.n()) {
    std::ostringstream os;
    os << "initial states must be " << sc.graph.size() << "x" << sc.model.n() << ", got " << sc.x0.rows() << "x"
       << sc.x0.cols();
    fail(ErrorCode::kInvalidArgument, os.str());
  }
  if (sc.disturbance.active()) {
    if (sc.design.mode == DesignMode::kLeaderFollower) {
      fail(ErrorCode::kInvalidArgument, "disturbed leader-follower networks are not supported");
    }
    if (sc.model.d2.empty()) fail(ErrorCode::kInvalidArgument, "a disturbance needs D2 in the model");
    if (sc.disturbance.gains.size() != sc.graph.size()) {
      fail(ErrorCode::kInvalidArgument, "disturbance gains must have one entry per agent");
    }
    const double per_unit = 1.0 / sc.dt;
    if (std::abs(per_unit - std::round(per_unit)) > 1e-9 * per_unit) {
      fail(ErrorCode::kInvalidArgument, "with a square-wave disturbance dt must divide 1 s");
    }
  }
}

}  // namespace

Trajectory integrate(const Scenario& sc, const Tolerances& tol) {
  validate_scenario(sc);
  const Network net = make_network(sc.model, sc.graph, sc.design);
  const Observer obs = make_observer(sc);
  const std::size_t agents = net.agents();
  const std::size_t n = net.n();
  const std::size_t m1 = sc.model.disturbances();
  const bool disturbed = sc.disturbance.active();
  const auto steps = static_cast<std::size_t>(std::ceil(sc.t_end / sc.dt - 1e-9));

  Trajectory tr;
  tr.agents = agents;
  tr.n = n;
  tr.z_dim = sc.model.outputs();
  tr.gamma = sc.gamma ? sc.gamma : sc.design.gamma;
  tr.r = obs.weights;
  for (auto* v : {&tr.times, &tr.v_lyap, &tr.int_z2, &tr.int_w2}) v->reserve(steps + 1);
  tr.states.reserve(steps + 1);
  tr.errors.reserve(steps + 1);
  tr.perf.reserve(steps + 1);

  Vec x(sc.x0.data().begin(), sc.x0.data().end());
  auto record = [&](double t, double z2_inc, double w2_inc) {
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.errors.push_back(obs.errors(x));
    tr.perf.push_back(obs.perf(x));
    tr.v_lyap.push_back(obs.lyapunov(tr.errors.back()));
    const double prev_z = tr.int_z2.empty() ? 0.0 : tr.int_z2.back();
    const double prev_w = tr.int_w2.empty() ? 0.0 : tr.int_w2.back();
    tr.int_z2.push_back(prev_z + z2_inc);
    tr.int_w2.push_back(prev_w + w2_inc);
  };
  record(0.0, 0.0, 0.0);

  Vec omega(disturbed ? agents * m1 : 0);
  auto rhs = [&](const Vec& s) -> Vec {
    if (disturbed) return rhs_disturbed(net, s, omega);
    if (net.leader) return rhs_leader_follower(net, s);
    return rhs_leaderless(net, s);
  };

  Vec tmp(x.size());
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * sc.dt;
    double w2 = 0.0;
    if (disturbed) {
      const double w = square_wave(t + 0.5 * sc.dt, sc.disturbance.wave);
      for (std::size_t i = 0; i < agents; ++i)
        for (std::size_t k = 0; k < m1; ++k) {
          omega[i * m1 + k] = sc.disturbance.gains[i] * w;
          w2 += omega[i * m1 + k] * omega[i * m1 + k];
        }
    }
    const Vec k1 = rhs(x);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * sc.dt * k1[i];
    const Vec k2 = rhs(tmp);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * sc.dt * k2[i];
    const Vec k3 = rhs(tmp);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + sc.dt * k3[i];
    const Vec k4 = rhs(tmp);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += sc.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double nx = norm2(x);
    if (!(nx <= tol.blowup_norm)) {
      std::ostringstream os;
      os << "simulation blow-up: ‖x‖ = " << nx << " at t = " << t + sc.dt << " s (last valid time " << t << " s)";
      fail(ErrorCode::kBlowUp, os.str());
    }
    const Vec& z_prev = tr.perf.back();
    const Vec z_now = obs.perf(x);
    const double z2 = 0.5 * sc.dt * (dot(z_prev, z_prev) + dot(z_now, z_now));
    record(static_cast<double>(step + 1) * sc.dt, z2, w2 * sc.dt);
  }
  return tr;
}

HinfCost hinf_cost(const Trajectory& traj, double gamma) {
  if (traj.samples() == 0) fail(ErrorCode::kInvalidArgument, "empty trajectory");
  HinfCost h;
  h.int_z2 = traj.int_z2.back();
  h.int_w2 = traj.int_w2.back();
  h.j = h.int_z2 - gamma * gamma * h.int_w2;
  if (h.int_w2 > 0.0) h.empirical_gain = std::sqrt(h.int_z2 / h.int_w2);
  return h;
}

LyapunovReport lyapunov_diag(const Trajectory& traj, double step_rel_tol) {
  LyapunovReport r;
  if (traj.v_lyap.empty()) return r;
  r.v0 = traj.v_lyap.front();
  r.v_final = traj.v_lyap.back();
  r.tolerance = step_rel_tol * r.v0;
  for (std::size_t k = 0; k + 1 < traj.v_lyap.size(); ++k) {
    const double inc = traj.v_lyap[k + 1] - traj.v_lyap[k];
    r.max_increase = k == 0 ? inc : std::max(r.max_increase, inc);
    if (inc > r.tolerance) ++r.increases;
  }
  const std::size_t steps = traj.v_lyap.size() - 1;
  r.increase_fraction = steps ? static_cast<double>(r.increases) / static_cast<double>(steps) : 0.0;
  r.non_increasing = r.increases == 0;
  return r;
}

void write_csv(std::ostream& out, const Trajectory& traj, const CsvOptions& opts) {
  const std::size_t dec = std::max<std::size_t>(1, opts.decimation);
  out << "t";
  for (const char* prefix : {"x", "e"})
    for (std::size_t i = 0; i < traj.agents; ++i)
      for (std::size_t k = 0; k < traj.n; ++k) out << ',' << prefix << i + 1 << '_' << k + 1;
  for (std::size_t i = 0; i < traj.agents; ++i)
    for (std::size_t k = 0; k < traj.z_dim; ++k) out << ",z" << i + 1 << '_' << k + 1;
  out << ",V,J_running\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out << buf;
  };
  for (std::size_t s = 0; s < traj.samples(); ++s) {
    if (s % dec != 0 && s + 1 != traj.samples()) continue;
    put(traj.times[s]);
    for (double v : traj.states[s]) out << ',', put(v);
    for (double v : traj.errors[s]) out << ',', put(v);
    for (double v : traj.perf[s]) out << ',', put(v);
    out << ',';
    put(traj.v_lyap[s]);
    out << ',';
    put(traj.j_running(s));
    out << '\n';
  }
}

}  // namespace lipcons
