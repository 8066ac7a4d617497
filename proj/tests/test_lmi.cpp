#include <doctest.h>

#include <random>

#include "lipcons/error.hpp"
#include "lipcons/lmi.hpp"
#include "lipcons/model.hpp"
#include "support.hpp"

using namespace lipcons;

namespace {

AgentModel scalar_model(double a, double b, double d1, double alpha) {
  AgentModel m;
  m.a = Mat{{a}};
  m.b = Mat{{b}};
  m.d1 = Mat{{d1}};
  m.d2 = Mat(1, 0);
  m.c_out = Mat(0, 1);
  m.alpha = alpha;
  return m;
}

// Unbordered form AP + PAᵀ - sBBᵀ + α²D1D1ᵀ + P², written out by hand.
Mat schur_form(const AgentModel& m, const Mat& p, double s) {
  return m.a * p + p * m.a.transpose() - s * (m.b * m.b.transpose()) +
         (m.alpha * m.alpha) * (m.d1 * m.d1.transpose()) + p * p;
}

}  // namespace

TEST_SUITE("lmi") {
  TEST_CASE("assemble: scalar consensus example") {
    const Mat f = assemble(LmiProblem::consensus(scalar_model(-1, 1, 1, 0)), Mat{{1}}, 1.0);
    CHECK(oracle::max_abs_diff(f, Mat{{-3, 1}, {1, -1}}) < 1e-15);
  }

  TEST_CASE("assemble: zero data gives [[0, I], [I, -I]]") {
    AgentModel m;
    m.a = Mat(2, 2);
    m.b = Mat(2, 1);
    m.d1 = Mat(2, 2);
    m.d2 = Mat(2, 0);
    m.c_out = Mat(0, 2);
    m.alpha = 0.0;
    const Mat f = assemble(LmiProblem::consensus(m), Mat::identity(2), 0.0);
    Mat expect(4, 4);
    expect.set_block(0, 2, Mat::identity(2));
    expect.set_block(2, 0, Mat::identity(2));
    expect.set_block(2, 2, -1.0 * Mat::identity(2));
    CHECK(oracle::max_abs_diff(f, expect) == 0.0);
  }

  TEST_CASE("assemble: H-infinity block layout") {
    const AgentModel m = manipulator_model();
    const LmiProblem prob = LmiProblem::hinf(m, 2.0);
    const Mat q = manipulator_reference_certificate().p;
    const Mat f = assemble(prob, q, 29.6636);
    REQUIRE(f.rows() == 4 + 4 + 1 + 1);
    CHECK(oracle::max_abs_diff(f.block(0, 4, 4, 4), q) == 0.0);
    CHECK(oracle::max_abs_diff(f.block(0, 8, 4, 1), q * m.c_out.transpose()) < 1e-15);
    CHECK(oracle::max_abs_diff(f.block(0, 9, 4, 1), m.d2) == 0.0);
    CHECK(f(9, 9) == -4.0);
    CHECK(f(8, 8) == -1.0);
    CHECK(asymmetry(f) == 0.0);
  }

  TEST_CASE("the reference certificate satisfies the H-infinity LMI") {
    const LmiProblem prob = LmiProblem::hinf(manipulator_model(), 2.0);
    const LmiCertificate c = manipulator_reference_certificate();
    const Mat f = assemble(prob, c.p, c.scalar);
    const double top = max_eig(f);
    CHECK((top < 0.0 || std::abs(top) < 1e-2 * f.frobenius()));
    const LmiVerifyReport v = verify(prob, c, 0.0);
    CHECK(v.p_positive);
    CHECK(v.scalar_positive);
    CHECK(v.lmi_negative);
  }

  TEST_CASE("verify: scalar witness passes, p = 0 fails") {
    const LmiProblem prob = LmiProblem::consensus(scalar_model(-1, 1, 1, 0));
    LmiCertificate c;
    c.p = Mat{{1}};
    c.scalar = 1.0;
    const LmiVerifyReport ok = verify(prob, c);
    CHECK(ok.pass);
    CHECK(ok.lmi_max_eig < 0.0);
    c.p = Mat{{0}};
    const LmiVerifyReport bad = verify(prob, c);
    CHECK_FALSE(bad.p_positive);
    CHECK_FALSE(bad.pass);
  }

  TEST_CASE("solve: scalar feasible example") {
    const LmiProblem prob = LmiProblem::consensus(scalar_model(-1, 1, 1, 0));
    const LmiCertificate c = solve(prob);
    REQUIRE(c.feasible);
    CHECK(verify(prob, c).pass);
    CHECK(c.margin > 0.0);
    CHECK(std::abs(max_eig(assemble(prob, c.p, c.scalar)) + c.margin) < 1e-9);
  }

  TEST_CASE("solve: uncontrollable unstable scalar is infeasible within budget") {
    const LmiCertificate c = solve(LmiProblem::consensus(scalar_model(1, 0, 1, 1)));
    CHECK_FALSE(c.feasible);
    CHECK(c.margin <= 0.0);
  }

  TEST_CASE("solve: manipulator H-infinity LMI at gamma 2 and 4") {
    const AgentModel m = manipulator_model();
    for (double gamma : {2.0, 4.0}) {
      const LmiProblem prob = LmiProblem::hinf(m, gamma);
      const LmiCertificate c = solve(prob);
      REQUIRE(c.feasible);
      const LmiVerifyReport v = verify(prob, c);
      CHECK(v.pass);
      CHECK(-v.lmi_max_eig > v.required_margin);
    }
  }

  TEST_CASE("solve is deterministic") {
    const LmiProblem prob = LmiProblem::hinf(manipulator_model(), 2.0);
    const LmiCertificate a = solve(prob), b = solve(prob);
    CHECK(a.scalar == b.scalar);
    CHECK(oracle::max_abs_diff(a.p, b.p) == 0.0);
  }

  TEST_CASE("property: every feasible certificate from the solver passes verify") {
    std::mt19937_64 rng(21);
    int feasible = 0;
    for (int trial = 0; trial < 12; ++trial) {
      const std::size_t n = 2 + trial % 3;
      AgentModel m;
      m.a = oracle::random_matrix(n, n, rng, 2.0);
      m.b = oracle::random_matrix(n, 1 + trial % 2, rng);
      m.d1 = Mat::identity(n);
      m.d2 = oracle::random_matrix(n, 1, rng);
      m.c_out = oracle::random_matrix(1, n, rng);
      m.alpha = 0.3;
      for (const LmiProblem& prob : {LmiProblem::consensus(m), LmiProblem::hinf(m, 3.0)}) {
        const LmiCertificate c = solve(prob);
        if (!c.feasible) continue;
        ++feasible;
        CHECK(verify(prob, c).pass);
      }
    }
    CHECK(feasible > 10);
  }

  TEST_CASE("property: Schur complement equivalence") {
    std::mt19937_64 rng(22);
    int agree = 0;
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 2 + trial % 3;
      AgentModel m;
      m.a = oracle::random_matrix(n, n, rng, 1.5);
      m.b = oracle::random_matrix(n, 1, rng);
      m.d1 = Mat::identity(n);
      m.d2 = Mat(n, 0);
      m.c_out = Mat(0, n);
      m.alpha = 0.2;
      const LmiProblem prob = LmiProblem::consensus(m);
      // Mix solver certificates with random scaled identities.
      LmiCertificate c = solve(prob);
      if (trial % 2 == 1 || !c.feasible) {
        std::uniform_real_distribution<double> u(0.05, 1.0);
        c.p = u(rng) * Mat::identity(n);
        c.scalar = 50.0 * u(rng);
      }
      const double lhs = max_eig(symmetrize(schur_form(m, c.p, c.scalar)));
      const double rhs = max_eig(assemble(prob, c.p, c.scalar));
      if (std::abs(lhs) < 1e-8 || std::abs(rhs) < 1e-8) continue;
      CHECK((lhs < 0.0) == (rhs < 0.0));
      ++agree;
    }
    CHECK(agree > 30);
  }

  TEST_CASE("property: scaling the Consensus LMI behaves per the Schur complement") {
    // With α = 0, (βP, βs) satisfies AP+PAᵀ-sBBᵀ+P²/β ≺ 0 after scaling, which is
    // the assembled LMI with border -βI. Check against the unbordered form.
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 3; ++trial) {
      AgentModel m;
      m.a = oracle::random_matrix(2, 2, rng);
      m.b = oracle::random_matrix(2, 1, rng);
      m.d1 = Mat::identity(2);
      m.d2 = Mat(2, 0);
      m.c_out = Mat(0, 2);
      m.alpha = 0.0;
      const LmiProblem prob = LmiProblem::consensus(m);
      const LmiCertificate c = solve(prob);
      REQUIRE(c.feasible);
      const double beta = 3.0;
      const Mat p = beta * c.p;
      const double s = beta * c.scalar;
      const Mat unbordered = m.a * p + p * m.a.transpose() - s * (m.b * m.b.transpose()) + (1.0 / beta) * (p * p);
      CHECK(max_eig(symmetrize(unbordered)) < 0.0);
      Mat bordered = assemble(prob, p, s);
      bordered.set_block(2, 2, -beta * Mat::identity(2));
      CHECK(max_eig(bordered) < 0.0);
    }
  }
}
