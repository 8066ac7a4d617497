#include <doctest.h>

#include "lipcons/error.hpp"
#include "lipcons/io.hpp"
#include "support.hpp"

using namespace lipcons;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("manipulator model round trip is lossless") {
    ModelFile mf{manipulator_model(), 2.0, manipulator_graph()};
    const std::string text = format_model_file(mf);
    const ModelFile back = parse_model_file(text);
    CHECK(back == mf);
    CHECK(format_model_file(back) == text);
  }

  TEST_CASE("zero-extent matrices and missing optional fields survive") {
    AgentModel m;
    m.a = Mat{{-1, 0}, {0, -2}};
    m.b = Mat{{1}, {0}};
    m.d1 = Mat::identity(2);
    m.d2 = Mat(2, 0);
    m.c_out = Mat(0, 2);
    m.f = Nonlinearity(2, {});
    ModelFile mf{m, std::nullopt, std::nullopt};
    const ModelFile back = parse_model_file(format_model_file(mf));
    CHECK(back == mf);
    CHECK(back.model.d2.rows() == 2);
    CHECK(back.model.d2.cols() == 0);
    CHECK_FALSE(back.gamma);
    CHECK_FALSE(back.graph);
  }

  TEST_CASE("empty arrays stand for matrices with a zero extent") {
    const ModelFile mf = parse_model_file(R"({"format": "lipcons-model", "version": 1,
      "dimensions": {"n": 2, "inputs": 1, "disturbances": 0, "outputs": 0},
      "a": [[-1, 0], [0, -1]], "b": [[1], [1]], "d2": [], "c": [], "alpha": 0})");
    CHECK(mf.model.d2.rows() == 2);
    CHECK(mf.model.d2.cols() == 0);
    CHECK(mf.model.c_out.rows() == 0);
    CHECK(code_of([] {
            parse_model_file(R"({"format": "lipcons-model", "version": 1,
              "dimensions": {"n": 2, "inputs": 1, "disturbances": 1, "outputs": 0},
              "a": [[-1, 0], [0, -1]], "b": [[1], [1]], "d2": [], "alpha": 0})");
          }) == ErrorCode::kParse);
  }

  TEST_CASE("property: random models round trip") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    for (int trial = 0; trial < 25; ++trial) {
      AgentModel m;
      const std::size_t n = dim(rng), p = dim(rng), m1 = dim(rng) - 1, m2 = dim(rng) - 1;
      m.a = oracle::random_matrix(n, n, rng, 3.0);
      m.b = oracle::random_matrix(n, p, rng);
      m.d1 = oracle::random_matrix(n, n, rng);
      m.d2 = oracle::random_matrix(n, m1, rng);
      m.c_out = oracle::random_matrix(m2, n, rng);
      m.alpha = 0.25 * static_cast<double>(trial);
      m.f = Nonlinearity(n, {{NonlinearKind::kTanh, n - 1, 0, -0.123456789012345}});
      ModelFile mf{m, 1.0 + trial, oracle::random_digraph(n + 1, rng, 0.5)};
      CHECK(parse_model_file(format_model_file(mf)) == mf);
    }
  }

  TEST_CASE("model parse errors") {
    CHECK(code_of([] { parse_model_file("{not json"); }) == ErrorCode::kParse);
    CHECK(code_of([] { parse_model_file("[]"); }) == ErrorCode::kParse);
    Json j = model_to_json(ModelFile{manipulator_model(), std::nullopt, std::nullopt});
    j["a"][0].erase(0);
    CHECK(code_of([&] { model_from_json(j); }) == ErrorCode::kParse);
    j = model_to_json(ModelFile{manipulator_model(), std::nullopt, std::nullopt});
    j["nonlinearity"]["terms"][0]["kind"] = "cosh";
    CHECK(code_of([&] { model_from_json(j); }) == ErrorCode::kParse);
    j = model_to_json(ModelFile{manipulator_model(), std::nullopt, std::nullopt});
    j["a"][1][1] = "x";
    CHECK(code_of([&] { model_from_json(j); }) == ErrorCode::kParse);
  }

  TEST_CASE("certificate parsing") {
    const LmiCertificate c = manipulator_reference_certificate();
    const LmiCertificate back = certificate_from_json(certificate_to_json(c));
    CHECK(oracle::max_abs_diff(back.p, c.p) == 0.0);
    CHECK(back.scalar == c.scalar);
    const LmiCertificate s = parse_certificate(R"({"p": [[2]], "scalar": 0.5, "comment": "x"})");
    CHECK(s.p(0, 0) == 2.0);
    CHECK(s.scalar == 0.5);
    CHECK(code_of([] { parse_certificate(R"({"p": [[1, 2]], "scalar": 1})"); }) == ErrorCode::kParse);
    CHECK(code_of([] { parse_certificate(R"({"p": [[1]]})"); }) == ErrorCode::kParse);
  }

  TEST_CASE("report sections are finite and round trip") {
    const DiGraph g = manipulator_graph();
    const GraphSpectra s = analyze(g);
    const Json gs = graph_section(g, s);
    CHECK(all_numbers_finite(gs));
    CHECK(Json::parse(dump_pretty(gs)) == gs);
    CHECK(gs["flags"]["balanced"] == true);
    SynthesisOptions o;
    o.cert = manipulator_reference_certificate();
    const ProtocolDesign d = algorithm2(manipulator_model(), s, 2.0, o);
    const Json ds = design_section(d, verify(LmiProblem::hinf(manipulator_model(), 2.0), d.cert, 0.0));
    CHECK(all_numbers_finite(ds));
    CHECK(Json::parse(dump_pretty(ds)) == ds);
    Json bad = ds;
    bad["c"] = std::nan("");
    CHECK_FALSE(all_numbers_finite(bad));
  }

  TEST_CASE("config hash is stable and sensitive") {
    const Json a = Json::parse(R"({"dt": 0.001, "seed": 42})");
    const Json b = Json::parse(R"({"dt": 0.001, "seed": 43})");
    CHECK(config_hash(a) == config_hash(a));
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
    const Json p = provenance(a, 42);
    CHECK(p["config_hash"] == config_hash(a));
    CHECK(p["seed"] == 42);
    CHECK(provenance(a, std::nullopt)["seed"].is_null());
  }

  TEST_CASE("file errors") {
    CHECK(code_of([] { read_text_file("/nonexistent/dir/file.json"); }) == ErrorCode::kIo);
    CHECK(code_of([] { write_text_file("/nonexistent/dir/file.json", "x"); }) == ErrorCode::kIo);
  }
}
