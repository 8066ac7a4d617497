#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lipcons/error.hpp"
#include "lipcons/sim.hpp"
#include "support.hpp"

using namespace lipcons;

namespace {

AgentModel linear_scalar(double a) {
  AgentModel m;
  m.a = Mat{{a}};
  m.b = Mat{{1}};
  m.d1 = Mat{{1}};
  m.d2 = Mat{{1}};
  m.c_out = Mat{{1}};
  m.alpha = 0.0;
  return m;
}

ProtocolDesign manual_design(double k, double c) {
  ProtocolDesign d;
  d.k = Mat{{k}};
  d.c = c;
  d.cert.p = Mat{{1}};
  d.cert.scalar = 1.0;
  return d;
}

Scenario manipulator_scenario(double t_end, double dt) {
  Scenario sc;
  sc.model = manipulator_model();
  sc.graph = manipulator_graph();
  SynthesisOptions o;
  o.cert = manipulator_reference_certificate();
  sc.design = algorithm2(sc.model, analyze(sc.graph), 2.0, o);
  sc.x0 = random_initial_states(6, 4, 42);
  sc.t_end = t_end;
  sc.dt = dt;
  return sc;
}

Vec stacked_kron_rhs(const Network& net, const Vec& x) {
  // (I⊗A + c L⊗BK) x + (I⊗D1) F(x)
  const std::size_t n = net.n(), agents = net.agents();
  const Mat lin = kron(Mat::identity(agents), net.model.a) + net.c * kron(laplacian(net.graph), net.model.b * net.k);
  Vec dx = lin * x;
  const Mat d1 = kron(Mat::identity(agents), net.model.d1);
  Vec f;
  for (std::size_t i = 0; i < agents; ++i) {
    const Vec fi = net.model.f(std::span<const double>(x).subspan(i * n, n));
    f.insert(f.end(), fi.begin(), fi.end());
  }
  const Vec df = d1 * f;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += df[i];
  return dx;
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("square wave") {
    CHECK(square_wave(0.0) == 1.0);
    CHECK(square_wave(0.5) == 1.0);
    CHECK(square_wave(1.0) == -1.0);
    CHECK(square_wave(1.5) == -1.0);
    CHECK(square_wave(2.0) == 0.0);
    CHECK(square_wave(3.0) == 0.0);
    CHECK(square_wave(-0.5) == 0.0);
    CHECK(square_wave(1.5, Waveform::kUnipolar) == 1.0);
    CHECK(square_wave(2.5, Waveform::kUnipolar) == 0.0);
    CHECK(square_wave(0.5, Waveform::kNone) == 0.0);
    CHECK(waveform_from_string("bipolar") == Waveform::kBipolar);
    CHECK_THROWS_AS(waveform_from_string("triangle"), Error);
  }

  TEST_CASE("manipulator disturbance gains") {
    const Disturbance d = manipulator_disturbance();
    const Vec expect{1.0, -1.0, 1.5, 3.0, -0.6, 2.0};
    CHECK(d.gains == expect);
    CHECK(d.active());
  }

  TEST_CASE("protocol inputs on a two-node graph") {
    // Node 1 hears node 0: u1 = c K (x1 - x0), u0 = 0.
    const Network net = make_network(linear_scalar(0.0), DiGraph(2, {{0, 1}}), manual_design(-0.5, 2.0));
    const Vec x{3.0, 1.0};
    const Vec u = protocol_inputs(net, x);
    CHECK(u[0] == 0.0);
    CHECK(u[1] == doctest::Approx(2.0));
  }

  TEST_CASE("per-agent right-hand side matches the stacked Kronecker form") {
    std::mt19937_64 rng(11);
    const AgentModel m = manipulator_model();
    const DiGraph g = manipulator_graph();
    ProtocolDesign d;
    d.k = oracle::random_matrix(1, 4, rng);
    d.c = 3.7;
    const Network net = make_network(m, g, d);
    for (int trial = 0; trial < 20; ++trial) {
      const Mat xm = oracle::random_matrix(6, 4, rng, 5.0);
      const Vec x(xm.data().begin(), xm.data().end());
      const Vec a = rhs_leaderless(net, x);
      const Vec b = stacked_kron_rhs(net, x);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10 * (1.0 + std::abs(b[i])));
    }
  }

  TEST_CASE("consensus manifold is invariant") {
    const AgentModel m = manipulator_model();
    ProtocolDesign d;
    d.k = Mat{{1, 2, 3, 4}};
    d.c = 10.0;
    const Network net = make_network(m, manipulator_graph(), d);
    const Vec s{0.3, -0.2, 0.9, 0.1};
    Vec x;
    for (int i = 0; i < 6; ++i) x.insert(x.end(), s.begin(), s.end());
    const Vec dx = rhs_leaderless(net, x);
    Vec expect = m.a * s;
    const Vec fs = m.d1 * m.f(s);
    for (std::size_t k = 0; k < 4; ++k) expect[k] += fs[k];
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t k = 0; k < 4; ++k) CHECK(dx[i * 4 + k] == doctest::Approx(expect[k]));
  }

  TEST_CASE("disturbed right-hand side") {
    const AgentModel m = manipulator_model();
    ProtocolDesign d;
    d.k = Mat{{1, 2, 3, 4}};
    d.c = 1.0;
    const Network net = make_network(m, manipulator_graph(), d);
    std::mt19937_64 rng(3);
    const Mat xm = oracle::random_matrix(6, 4, rng);
    const Vec x(xm.data().begin(), xm.data().end());
    CHECK(rhs_disturbed(net, x, Vec(6 * m.disturbances(), 0.0)) == rhs_leaderless(net, x));
    const Vec zero(24, 0.0);
    Vec omega(6 * m.disturbances());
    for (std::size_t i = 0; i < omega.size(); ++i) omega[i] = 0.5 * static_cast<double>(i) - 1.0;
    const Vec dx = rhs_disturbed(net, zero, omega);
    for (std::size_t i = 0; i < 6; ++i) {
      const Vec di = m.d2 * std::span<const double>(omega).subspan(i * m.disturbances(), m.disturbances());
      for (std::size_t k = 0; k < 4; ++k) CHECK(dx[i * 4 + k] == doctest::Approx(di[k]));
    }
    CHECK_THROWS_AS(rhs_disturbed(net, x, Vec(3, 0.0)), Error);
  }

  TEST_CASE("property: protocol inputs are translation invariant") {
    std::mt19937_64 rng(5);
    ProtocolDesign d;
    d.k = Mat{{-1, 0.5, 2, -3}};
    d.c = 2.5;
    for (int trial = 0; trial < 30; ++trial) {
      const DiGraph g = oracle::random_digraph(5, rng, 0.4);
      const Network net = make_network(manipulator_model(), g, d);
      const Mat xm = oracle::random_matrix(5, 4, rng);
      Vec x(xm.data().begin(), xm.data().end());
      const Vec u0 = protocol_inputs(net, x);
      const Mat shift = oracle::random_matrix(1, 4, rng, 10.0);
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 4; ++k) x[i * 4 + k] += shift(0, k);
      const Vec u1 = protocol_inputs(net, x);
      for (std::size_t i = 0; i < u0.size(); ++i) CHECK(std::abs(u0[i] - u1[i]) < 1e-9);
    }
  }

  TEST_CASE("leader-follower: leader is open loop and the synchronized state is invariant") {
    ProtocolDesign d = manual_design(-0.5, 4.0);
    d.mode = DesignMode::kLeaderFollower;
    d.leader = 0;
    const Network net = make_network(linear_scalar(0.3), DiGraph(3, {{0, 1}, {1, 2}}), d);
    const Vec dx = rhs_leader_follower(net, Vec{2.0, 2.0, 2.0});
    for (double v : dx) CHECK(v == doctest::Approx(0.6));
    const Vec dy = rhs_leader_follower(net, Vec{1.0, 5.0, -3.0});
    CHECK(dy[0] == doctest::Approx(0.3));
  }

  TEST_CASE("RK4 on x' = -x reaches e^-1") {
    Scenario sc;
    sc.model = linear_scalar(-1.0);
    sc.graph = DiGraph(2, {{0, 1}, {1, 0}});
    sc.design = manual_design(0.0, 0.0);
    sc.x0 = Mat{{1.0}, {-2.0}};
    sc.t_end = 1.0;
    sc.dt = 0.01;
    const Trajectory tr = integrate(sc);
    CHECK(tr.samples() == 101);
    CHECK(std::abs(tr.times.back() - 1.0) < 1e-12);
    CHECK(std::abs(tr.states.back()[0] - std::exp(-1.0)) < 1e-8);
    CHECK(std::abs(tr.states.back()[1] + 2.0 * std::exp(-1.0)) < 1e-8);
  }

  TEST_CASE("property: weighted consensus errors sum to zero") {
    const Scenario sc = manipulator_scenario(1.0, 1e-3);
    const Trajectory tr = integrate(sc);
    for (std::size_t s = 0; s < tr.samples(); s += 10)
      for (std::size_t k = 0; k < 4; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 6; ++i) acc += tr.r[i] * tr.errors[s][i * 4 + k];
        CHECK(std::abs(acc) < 1e-10);
      }
  }

  TEST_CASE("identical initial states stay synchronized") {
    Scenario sc = manipulator_scenario(1.0, 1e-3);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t k = 0; k < 4; ++k) sc.x0(i, k) = 0.1 * static_cast<double>(k + 1);
    const Trajectory tr = integrate(sc);
    for (std::size_t s = 0; s < tr.samples(); ++s) {
      CHECK(tr.max_pairwise_distance(s) < 1e-12);
      CHECK(tr.v_lyap[s] < 1e-20);
    }
  }

  TEST_CASE("H-infinity cost from running integrals") {
    Trajectory tr;
    tr.times = {0.0, 1.0};
    tr.int_z2 = {0.0, 1.0};
    tr.int_w2 = {0.0, 1.0};
    HinfCost h = hinf_cost(tr, 2.0);
    CHECK(h.j == doctest::Approx(-3.0));
    REQUIRE(h.empirical_gain);
    CHECK(*h.empirical_gain == doctest::Approx(1.0));
    tr.int_w2 = {0.0, 0.0};
    h = hinf_cost(tr, 2.0);
    CHECK(h.j == doctest::Approx(1.0));
    CHECK_FALSE(h.empirical_gain);
    CHECK_THROWS_AS(hinf_cost(Trajectory{}, 2.0), Error);
  }

  TEST_CASE("undisturbed run: J equals the output energy") {
    const Trajectory tr = integrate(manipulator_scenario(2.0, 1e-3));
    const HinfCost h = hinf_cost(tr, 2.0);
    CHECK(h.int_w2 == 0.0);
    CHECK(h.j == h.int_z2);
    CHECK(h.j >= 0.0);
  }

  TEST_CASE("disturbed run starting at consensus") {
    Scenario sc = manipulator_scenario(10.0, 1e-3);
    sc.x0 = Mat(6, 4);
    sc.disturbance = manipulator_disturbance();
    const Trajectory tr = integrate(sc);
    const HinfCost h = hinf_cost(tr, 2.0);
    // ∫ω² over the 2 s pulse, exact under the mid-step hold.
    const double expect_w2 = 2.0 * (1 + 1 + 2.25 + 9 + 0.36 + 4) * static_cast<double>(manipulator_model().disturbances());
    CHECK(h.int_w2 == doctest::Approx(expect_w2).epsilon(1e-12));
    CHECK(h.j < 0.0);
    REQUIRE(h.empirical_gain);
    CHECK(*h.empirical_gain < 2.0);
  }

  TEST_CASE("Lyapunov function is non-increasing for a certified design") {
    const Trajectory tr = integrate(manipulator_scenario(5.0, 1e-3));
    const LyapunovReport r = lyapunov_diag(tr);
    CHECK(r.v0 > 0.0);
    CHECK(r.v_final < r.v0);
    CHECK(r.increases == 0);
    CHECK(r.non_increasing);
  }

  TEST_CASE("CSV header and decimation") {
    Scenario sc;
    sc.model = linear_scalar(-1.0);
    sc.graph = DiGraph(2, {{0, 1}, {1, 0}});
    sc.design = manual_design(-0.5, 1.0);
    sc.x0 = Mat{{1.0}, {0.0}};
    sc.t_end = 1.0;
    sc.dt = 0.1;
    const Trajectory tr = integrate(sc);
    std::ostringstream os;
    write_csv(os, tr, CsvOptions{3});
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x1_1,x2_1,e1_1,e2_1,z1_1,z2_1,V,J_running");
    std::size_t rows = 0;
    std::string last;
    while (std::getline(in, line)) {
      ++rows;
      last = line;
    }
    CHECK(rows == 5);  // samples 0, 3, 6, 9 and the final one
    CHECK(last.rfind("1,", 0) == 0);
  }

  TEST_CASE("property: integration is deterministic") {
    const Trajectory a = integrate(manipulator_scenario(1.0, 1e-3));
    const Trajectory b = integrate(manipulator_scenario(1.0, 1e-3));
    CHECK(a.states.back() == b.states.back());
    CHECK(random_initial_states(3, 2, 7).data().front() == random_initial_states(3, 2, 7).data().front());
  }

  TEST_CASE("blow-up is reported") {
    Scenario sc;
    sc.model = linear_scalar(100.0);
    sc.graph = DiGraph(2, {{0, 1}, {1, 0}});
    sc.design = manual_design(0.0, 0.0);
    sc.x0 = Mat{{1.0}, {1.0}};
    sc.t_end = 1.0;
    sc.dt = 1e-3;
    try {
      integrate(sc);
      FAIL("expected blow-up");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBlowUp);
      CHECK(std::string(e.what()).find("last valid time") != std::string::npos);
    }
  }

  TEST_CASE("scenario validation") {
    Scenario sc = manipulator_scenario(1.0, 3e-3);
    sc.disturbance = manipulator_disturbance();
    CHECK_THROWS_AS(integrate(sc), Error);  // 3e-3 does not divide 1 s
    sc.dt = 1e-2;
    sc.disturbance.gains.pop_back();
    CHECK_THROWS_AS(integrate(sc), Error);
    Scenario bad = manipulator_scenario(1.0, 1e-3);
    bad.x0 = Mat(5, 4);
    CHECK_THROWS_AS(integrate(bad), Error);
    bad = manipulator_scenario(1.0, 0.0);
    CHECK_THROWS_AS(integrate(bad), Error);
  }

  TEST_CASE("Lipschitz condition of the manipulator nonlinearity") {
    AgentModel m = manipulator_model();
    CHECK(check_lipschitz(m).pass);
    CHECK(check_lipschitz(m).worst_ratio <= m.alpha + 1e-9);
    m.alpha = 0.1;
    CHECK_FALSE(check_lipschitz(m).pass);
  }
}
