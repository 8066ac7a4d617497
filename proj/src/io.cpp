#include "lipcons/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lipcons/error.hpp"

#ifndef LIPCONS_VERSION
#define LIPCONS_VERSION "0.0.0"
#endif

namespace lipcons {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { fail(ErrorCode::kParse, "model file: " + what); }

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

std::size_t dim_field(const Json& dims, const char* key) {
  const Json& v = field(dims, key);
  if (!v.is_number_unsigned()) parse_fail(std::string("dimension '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

double number(const Json& v, const std::string& name) {
  if (!v.is_number()) parse_fail("'" + name + "' must be a number");
  return v.get<double>();
}

Json vec_json(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

}  // namespace

bool operator==(const ModelFile& a, const ModelFile& b) {
  auto same = [](const Mat& x, const Mat& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::equal(x.data().begin(), x.data().end(), y.data().begin());
  };
  const AgentModel& p = a.model;
  const AgentModel& q = b.model;
  return same(p.a, q.a) && same(p.b, q.b) && same(p.d1, q.d1) && same(p.d2, q.d2) &&
         same(p.c_out, q.c_out) && p.alpha == q.alpha && p.f == q.f && a.gamma == b.gamma &&
         a.graph == b.graph;
}

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Mat mat_from_json(const Json& j, std::size_t rows, std::size_t cols, const std::string& name) {
  // A matrix with no entries may be written as [].
  if (rows * cols == 0 && j.is_array() && j.empty()) return Mat(rows, cols);
  if (!j.is_array() || j.size() != rows) {
    parse_fail("'" + name + "' must be an array of " + std::to_string(rows) + " rows");
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const Json& r = j[i];
    if (!r.is_array() || r.size() != cols) {
      parse_fail("'" + name + "' row " + std::to_string(i + 1) + " must have " + std::to_string(cols) + " entries");
    }
    for (const Json& v : r) {
      double x = number(v, name);
      if (!std::isfinite(x)) parse_fail("'" + name + "' has a non-finite entry");
      data.push_back(x);
    }
  }
  return Mat(rows, cols, std::move(data));
}

Json model_to_json(const ModelFile& mf) {
  const AgentModel& m = mf.model;
  Json terms = Json::array();
  for (const auto& t : m.f.terms()) {
    terms.push_back({{"kind", to_string(t.kind)},
                     {"output", t.output + 1},
                     {"input", t.input + 1},
                     {"coefficient", t.coefficient}});
  }
  Json j = {
      {"format", "lipcons-model"},
      {"version", 1},
      {"dimensions",
       {{"n", m.n()}, {"inputs", m.inputs()}, {"disturbances", m.disturbances()}, {"outputs", m.outputs()}}},
      {"a", mat_to_json(m.a)},
      {"b", mat_to_json(m.b)},
      {"d1", mat_to_json(m.d1)},
      {"d2", mat_to_json(m.d2)},
      {"c", mat_to_json(m.c_out)},
      {"alpha", m.alpha},
      {"nonlinearity", {{"terms", terms}}},
  };
  if (mf.gamma) j["gamma"] = *mf.gamma;
  if (mf.graph) {
    const Mat adj = mf.graph->adjacency();
    Json rows = Json::array();
    for (std::size_t i = 0; i < adj.rows(); ++i) {
      Json r = Json::array();
      for (std::size_t k = 0; k < adj.cols(); ++k) r.push_back(static_cast<int>(adj(i, k)));
      rows.push_back(std::move(r));
    }
    j["adjacency"] = rows;
  }
  return j;
}

ModelFile model_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("top level must be an object");
  if (auto it = j.find("format"); it != j.end() && *it != "lipcons-model") parse_fail("unknown format tag");
  const Json& dims = field(j, "dimensions");
  const std::size_t n = dim_field(dims, "n");
  const std::size_t p = dim_field(dims, "inputs");
  const std::size_t m1 = dim_field(dims, "disturbances");
  const std::size_t m2 = dim_field(dims, "outputs");

  ModelFile mf;
  AgentModel& m = mf.model;
  m.a = mat_from_json(field(j, "a"), n, n, "a");
  m.b = mat_from_json(field(j, "b"), n, p, "b");
  m.d1 = j.contains("d1") ? mat_from_json(j["d1"], n, n, "d1") : Mat::identity(n);
  m.d2 = j.contains("d2") ? mat_from_json(j["d2"], n, m1, "d2") : Mat(n, m1);
  m.c_out = j.contains("c") ? mat_from_json(j["c"], m2, n, "c") : Mat(m2, n);
  m.alpha = number(field(j, "alpha"), "alpha");

  std::vector<NonlinearTerm> terms;
  if (auto nl = j.find("nonlinearity"); nl != j.end()) {
    for (const Json& t : field(*nl, "terms")) {
      NonlinearTerm term;
      try {
        term.kind = nonlinear_kind_from_string(field(t, "kind").get<std::string>());
      } catch (const Error& e) {
        parse_fail(e.what());
      }
      const auto out = field(t, "output").get<long long>();
      const auto in = field(t, "input").get<long long>();
      if (out < 1 || in < 1 || static_cast<std::size_t>(out) > n || static_cast<std::size_t>(in) > n) {
        parse_fail("nonlinearity term index outside 1..n");
      }
      term.output = static_cast<std::size_t>(out - 1);
      term.input = static_cast<std::size_t>(in - 1);
      term.coefficient = number(field(t, "coefficient"), "coefficient");
      terms.push_back(term);
    }
  }
  m.f = Nonlinearity(n, std::move(terms));
  m.validate();

  if (auto g = j.find("gamma"); g != j.end()) {
    double gamma = number(*g, "gamma");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) parse_fail("gamma must be positive");
    mf.gamma = gamma;
  }
  if (auto adj = j.find("adjacency"); adj != j.end()) {
    const std::size_t nodes = adj->is_array() ? adj->size() : 0;
    Mat a = mat_from_json(*adj, nodes, nodes, "adjacency");
    for (double v : a.data()) {
      if (v != 0.0 && v != 1.0) parse_fail("adjacency entries must be 0 or 1");
    }
    mf.graph = DiGraph::from_adjacency(a);
  }
  return mf;
}

ModelFile parse_model_file(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    parse_fail(e.what());
  } catch (const Json::exception& e) {
    parse_fail(e.what());
  }
  try {
    return model_from_json(j);
  } catch (const Json::exception& e) {
    parse_fail(e.what());
  }
}

std::string format_model_file(const ModelFile& mf) { return dump_pretty(model_to_json(mf)) + "\n"; }

ModelFile load_model_file(const std::string& path) { return parse_model_file(read_text_file(path)); }

Json certificate_to_json(const LmiCertificate& cert) {
  return {{"p", mat_to_json(cert.p)},
          {"scalar", cert.scalar},
          {"margin", cert.margin},
          {"feasible", cert.feasible},
          {"iterations", cert.iterations},
          {"note", cert.note}};
}

LmiCertificate certificate_from_json(const Json& j) {
  auto bad = [](const std::string& w) { fail(ErrorCode::kParse, "certificate file: " + w); };
  if (!j.is_object() || !j.contains("p") || !j.contains("scalar")) bad("needs fields 'p' and 'scalar'");
  const Json& p = j["p"];
  if (!p.is_array() || p.empty()) bad("'p' must be a non-empty square array");
  LmiCertificate c;
  try {
    c.p = mat_from_json(p, p.size(), p.size(), "p");
  } catch (const Error& e) {
    bad(e.what());
  }
  if (!j["scalar"].is_number()) bad("'scalar' must be a number");
  c.scalar = j["scalar"].get<double>();
  c.note = "injected";
  return c;
}

LmiCertificate parse_certificate(const std::string& text) {
  try {
    return certificate_from_json(Json::parse(text));
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParse, std::string("certificate file: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

Json graph_section(const DiGraph& g, const GraphSpectra& s) {
  Json edges = Json::array();
  for (auto [p, c] : g.edges()) edges.push_back({p + 1, c + 1});
  Json flags = {{"strongly_connected", s.flags.strongly_connected},
                {"balanced", s.flags.balanced},
                {"has_spanning_tree", s.flags.has_spanning_tree},
                {"scc_count", s.flags.scc_count}};
  flags["leader_follower_root"] =
      s.flags.leader_follower_root ? Json(*s.flags.leader_follower_root + 1) : Json();
  Json out = {{"nodes", g.size()},
              {"edges", edges},
              {"flags", flags},
              {"laplacian", mat_to_json(s.laplacian)},
              {"laplacian_rank", s.laplacian_rank}};
  if (s.r) out["r"] = vec_json(*s.r);
  if (s.a_of_l) out["a_of_l"] = *s.a_of_l;
  if (s.lambda2_sym) out["lambda2_sym"] = *s.lambda2_sym;

  Json warnings = Json::array();
  if (!s.flags.has_spanning_tree) warnings.push_back("graph has no directed spanning tree; consensus is not possible");
  else if (!s.flags.strongly_connected) warnings.push_back("graph is not strongly connected");
  if (s.flags.strongly_connected && !s.flags.balanced) warnings.push_back("graph is not balanced; the H-infinity design does not apply");
  out["warnings"] = warnings;

  if (s.flags.leader_follower_root) {
    try {
      LeaderFollowerData lf = leader_follower_data(g, *s.flags.leader_follower_root);
      Json followers = Json::array();
      for (auto f : lf.followers) followers.push_back(f + 1);
      Json lfj = {{"leader", lf.leader + 1},
                  {"followers", followers},
                  {"l1", mat_to_json(lf.l1)},
                  {"q", vec_json(lf.q)},
                  {"h", mat_to_json(lf.h)},
                  {"lambda1_h", lf.lambda1_h},
                  {"min_q", lf.min_q}};
      if (lf.lambda1_sym_l1) lfj["lambda1_sym_l1"] = *lf.lambda1_sym_l1;
      out["leader_follower"] = lfj;
    } catch (const Error& e) {
      out["warnings"].push_back(std::string("leader-follower data unavailable: ") + e.what());
    }
  }
  return out;
}

Json design_section(const ProtocolDesign& d, const LmiVerifyReport& v) {
  Json out = {{"mode", to_string(d.mode)},
              {"k", mat_to_json(d.k)},
              {"c", d.c},
              {"c_threshold", d.c_threshold},
              {"certificate", certificate_to_json(d.cert)},
              {"certificate_injected", d.cert_injected},
              {"verify",
               {{"p_min_eig", v.p_min_eig},
                {"scalar", v.scalar},
                {"lmi_max_eig", v.lmi_max_eig},
                {"required_margin", v.required_margin},
                {"p_positive", v.p_positive},
                {"scalar_positive", v.scalar_positive},
                {"lmi_negative", v.lmi_negative},
                {"pass", v.pass}}}};
  if (d.gamma) out["gamma"] = *d.gamma;
  if (d.leader) out["leader"] = *d.leader + 1;
  if (d.c_threshold_simplified) out["c_threshold_simplified"] = *d.c_threshold_simplified;
  return out;
}

Json simulation_section(const Trajectory& traj, const std::optional<HinfCost>& cost, const LyapunovReport& lyap) {
  const std::size_t last = traj.samples() - 1;
  double err = 0.0;
  for (double v : traj.errors[last]) err = std::max(err, std::abs(v));
  Json out = {{"samples", traj.samples()},
              {"t_end", traj.times[last]},
              {"final_max_pairwise_distance", traj.max_pairwise_distance(last)},
              {"final_max_abs_error", err},
              {"lyapunov",
               {{"v0", lyap.v0},
                {"v_final", lyap.v_final},
                {"increases", lyap.increases},
                {"increase_fraction", lyap.increase_fraction},
                {"max_increase", lyap.max_increase},
                {"tolerance", lyap.tolerance},
                {"non_increasing", lyap.non_increasing}}}};
  // First time the network is within 1e-3 and stays there.
  std::optional<double> settle;
  for (std::size_t k = traj.samples(); k-- > 0;) {
    if (traj.max_pairwise_distance(k) >= 1e-3) break;
    settle = traj.times[k];
  }
  if (settle) out["settling_time_1e-3"] = *settle;
  if (cost) {
    Json c = {{"j", cost->j}, {"int_z2", cost->int_z2}, {"int_w2", cost->int_w2}};
    if (cost->empirical_gain) c["empirical_gain"] = *cost->empirical_gain;
    if (traj.gamma) c["gamma"] = *traj.gamma;
    out["hinf"] = c;
  }
  return out;
}

std::string config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json provenance(const Json& config, std::optional<std::uint64_t> seed) {
  Json out = {{"tool", "lipcons"}, {"version", LIPCONS_VERSION}, {"config_hash", config_hash(config)}};
  out["seed"] = seed ? Json(*seed) : Json();
  return out;
}

namespace {

bool is_flat(const Json& j) {
  for (const auto& v : j) {
    if (v.is_structured()) return false;
  }
  return true;
}

void dump_into(std::string& out, const Json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  if (j.is_array()) {
    if (j.empty() || is_flat(j)) {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        out += j[i].dump();
      }
      out += ']';
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out += pad;
      dump_into(out, j[i], depth + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += close + ']';
  } else if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      out += pad + Json(it.key()).dump() + ": ";
      dump_into(out, it.value(), depth + 1);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += close + '}';
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string dump_pretty(const Json& j) {
  std::string out;
  dump_into(out, j, 0);
  return out;
}

bool all_numbers_finite(const Json& j) {
  switch (j.type()) {
    case Json::value_t::number_float:
      return std::isfinite(j.get<double>());
    case Json::value_t::array:
    case Json::value_t::object:
      for (const auto& v : j) {
        if (!all_numbers_finite(v)) return false;
      }
      return true;
    default:
      return true;
  }
}

}  // namespace lipcons
