// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lipcons/lipcons.h"

namespace {

// Exit codes: 0 ok, 2 precondition, 3 infeasible, 4 blow-up, 1 anything else.
int exit_code(lc_status s) {
  switch (s) {
    case LIPCONS_OK:
      return 0;
    case LIPCONS_PRECONDITION:
      return 2;
    case LIPCONS_INFEASIBLE:
      return 3;
    case LIPCONS_BLOW_UP:
      return 4;
    default:
      return 1;
  }
}

struct Failure {
  lc_status status;
};

void check(lc_status s, const std::string& context) {
  if (s == LIPCONS_OK) return;
  std::cerr << "lipcons: " << context << ": " << lc_last_error() << "\n";
  throw Failure{s};
}

struct ModelDel {
  void operator()(lc_model* p) const { lc_model_free(p); }
};
struct GraphDel {
  void operator()(lc_graph* p) const { lc_graph_free(p); }
};
struct DesignDel {
  void operator()(lc_design* p) const { lc_design_free(p); }
};
struct TrajDel {
  void operator()(lc_trajectory* p) const { lc_trajectory_free(p); }
};
using ModelPtr = std::unique_ptr<lc_model, ModelDel>;
using GraphPtr = std::unique_ptr<lc_graph, GraphDel>;
using DesignPtr = std::unique_ptr<lc_design, DesignDel>;
using TrajPtr = std::unique_ptr<lc_trajectory, TrajDel>;

std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  lc_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "lipcons: cannot open '" << path << "'\n";
    throw Failure{LIPCONS_IO};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) return c == '{';
  }
  return false;
}

// Explicit flag, then LIPCONS_OUT_DIR, then the working directory.
std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LIPCONS_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

bool output_dir_requested(const std::string& flag) {
  const char* env = std::getenv("LIPCONS_OUT_DIR");
  return !flag.empty() || (env != nullptr && *env != '\0');
}

std::string in_dir(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "lipcons: cannot create '" << dir << "': " << ec.message() << "\n";
    throw Failure{LIPCONS_IO};
  }
  return (std::filesystem::path(dir) / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text << "\n";
  if (!out) {
    std::cerr << "lipcons: cannot write '" << path << "'\n";
    throw Failure{LIPCONS_IO};
  }
}

lc_wave parse_wave(const std::string& s) {
  if (s == "none") return LIPCONS_WAVE_NONE;
  if (s == "bipolar") return LIPCONS_WAVE_BIPOLAR;
  return LIPCONS_WAVE_UNIPOLAR;
}

lc_mode parse_mode(const std::string& s) {
  if (s == "hinf") return LIPCONS_MODE_HINF;
  if (s == "leader-follower") return LIPCONS_MODE_LEADER_FOLLOWER;
  return LIPCONS_MODE_LEADERLESS;
}

struct Inputs {
  std::string model_path;
  std::string graph_path;
};

struct SynthFlags {
  std::string mode = "leaderless";
  double gamma = 0.0;
  double c_multiplier = 1.0;
  double c = 0.0;
  std::string cert_path;
  std::size_t leader = 0;
};

// A graph argument may be an edge list or a model file with an adjacency matrix.
GraphPtr load_graph(const std::string& path) {
  const std::string text = read_file(path);
  if (looks_like_json(text)) {
    lc_model* m = nullptr;
    check(lc_model_parse(text.c_str(), &m), path);
    ModelPtr model(m);
    lc_graph* g = nullptr;
    check(lc_model_graph(model.get(), &g), path);
    return GraphPtr(g);
  }
  lc_graph* g = nullptr;
  check(lc_graph_parse(text.c_str(), &g), path);
  return GraphPtr(g);
}

std::pair<ModelPtr, GraphPtr> load_inputs(const Inputs& in) {
  lc_model* m = nullptr;
  check(lc_model_load(in.model_path.c_str(), &m), in.model_path);
  ModelPtr model(m);
  if (!in.graph_path.empty()) return {std::move(model), load_graph(in.graph_path)};
  lc_graph* g = nullptr;
  check(lc_model_graph(model.get(), &g), in.model_path + " (no --graph given)");
  return {std::move(model), GraphPtr(g)};
}

DesignPtr run_synth(const lc_model* m, const lc_graph* g, const SynthFlags& f) {
  lc_synth_options o;
  lc_synth_options_init(&o);
  o.mode = parse_mode(f.mode);
  o.gamma = f.gamma;
  o.c_multiplier = f.c_multiplier;
  o.c = f.c;
  o.leader = f.leader;
  std::string cert;
  if (!f.cert_path.empty()) {
    cert = read_file(f.cert_path);
    o.cert_json = cert.c_str();
  }
  lc_design* d = nullptr;
  check(lc_synthesize(m, g, &o, &d), "synth");
  return DesignPtr(d);
}

void add_synth_flags(CLI::App* cmd, Inputs& in, SynthFlags& f) {
  cmd->add_option("--model", in.model_path, "model file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--graph", in.graph_path, "edge list, or a model file with an adjacency matrix")
      ->check(CLI::ExistingFile);
  cmd->add_option("--mode", f.mode, "design algorithm")
      ->check(CLI::IsMember({"leaderless", "hinf", "leader-follower"}))
      ->capture_default_str();
  cmd->add_option("--gamma", f.gamma, "H-infinity level (default: model file, else 2)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--c-multiplier", f.c_multiplier, "c = multiplier * threshold")
      ->check(CLI::Range(1.0, 1e12))
      ->capture_default_str();
  cmd->add_option("--c", f.c, "explicit coupling strength (must reach the threshold)")->check(CLI::PositiveNumber);
  cmd->add_option("--cert", f.cert_path, "certificate file {\"p\": [[...]], \"scalar\": s}")
      ->check(CLI::ExistingFile);
  cmd->add_option("--leader", f.leader, "leader node (1-based, default: the graph's root)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus protocol synthesis and simulation for Lipschitz nonlinear multi-agent networks"};
  app.set_version_flag("--version", std::string(lc_version()));
  app.require_subcommand(1);

  std::string out_flag;

  // graph
  std::string graph_file;
  auto* graph_cmd = app.add_subcommand("graph", "analyze a graph: flags, r, a(L), lambda2, leader-follower data");
  graph_cmd->add_option("graph", graph_file, "edge list, or a model file with an adjacency matrix")
      ->required()
      ->check(CLI::ExistingFile);
  graph_cmd->add_option("--out-dir", out_flag, "also write graph_report.json here");

  // synth
  Inputs synth_in;
  SynthFlags synth_flags;
  auto* synth_cmd = app.add_subcommand("synth", "design K and c with one of the three algorithms");
  add_synth_flags(synth_cmd, synth_in, synth_flags);
  synth_cmd->add_option("--out-dir", out_flag, "also write synth_report.json here");

  // simulate
  Inputs sim_in;
  SynthFlags sim_synth;
  double dt = 1e-3, t_end = 10.0;
  std::uint64_t seed = 42;
  std::string disturbance = "none";
  std::vector<double> gains;
  std::size_t decimation = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "design, then integrate the closed loop and write a CSV trajectory");
  add_synth_flags(sim_cmd, sim_in, sim_synth);
  sim_cmd->add_option("--dt", dt, "RK4 step [s]")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--t-end", t_end, "horizon [s]")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--seed", seed, "seed for the random initial states")->capture_default_str();
  sim_cmd->add_option("--disturbance", disturbance, "square-wave disturbance")
      ->check(CLI::IsMember({"bipolar", "unipolar", "none"}))
      ->capture_default_str();
  sim_cmd->add_option("--disturbance-gains", gains, "per-agent disturbance gains (default all 1)")->delimiter(',');
  sim_cmd->add_option("--decimation", decimation, "write every k-th sample")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--out-dir", out_flag, "output directory (default $LIPCONS_OUT_DIR, else .)");

  // repro
  lc_repro_options ro;
  lc_repro_options_init(&ro);
  std::string repro_dist = "bipolar";
  bool serial = false;
  auto* repro_cmd = app.add_subcommand("repro", "run the six-manipulator example end to end");
  repro_cmd->add_option("--seed", ro.seed, "seed for the random initial states")->capture_default_str();
  repro_cmd->add_option("--dt", ro.dt, "RK4 step [s]")->check(CLI::PositiveNumber)->capture_default_str();
  repro_cmd->add_option("--t-end", ro.t_end, "horizon [s]")->check(CLI::PositiveNumber)->capture_default_str();
  repro_cmd->add_option("--gamma", ro.gamma, "H-infinity level for the solver design")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  repro_cmd->add_option("--c-multiplier", ro.c_multiplier, "coupling headroom for the solver design")
      ->check(CLI::Range(1.0, 1e12))
      ->capture_default_str();
  repro_cmd->add_option("--c-reference", ro.c_reference, "coupling used with the reference certificate")
      ->capture_default_str();
  repro_cmd->add_option("--disturbance", repro_dist, "square-wave disturbance")
      ->check(CLI::IsMember({"bipolar", "unipolar"}))
      ->capture_default_str();
  repro_cmd->add_option("--decimation", ro.decimation, "write every k-th sample")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  repro_cmd->add_flag("--serial", serial, "run the four simulations one after another");
  repro_cmd->add_option("--out-dir", out_flag, "output directory (default $LIPCONS_OUT_DIR, else .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*graph_cmd) {
      GraphPtr g = load_graph(graph_file);
      const std::string report = take([&] {
        char* s = nullptr;
        check(lc_graph_report(g.get(), &s), "graph");
        return s;
      }());
      std::cout << report << "\n";
      if (output_dir_requested(out_flag)) write_file(in_dir(output_dir(out_flag), "graph_report.json"), report);
    } else if (*synth_cmd) {
      auto [m, g] = load_inputs(synth_in);
      DesignPtr d = run_synth(m.get(), g.get(), synth_flags);
      char* s = nullptr;
      check(lc_design_report(d.get(), &s), "synth");
      const std::string report = take(s);
      std::cout << report << "\n";
      if (output_dir_requested(out_flag)) write_file(in_dir(output_dir(out_flag), "synth_report.json"), report);
    } else if (*sim_cmd) {
      auto [m, g] = load_inputs(sim_in);
      DesignPtr d = run_synth(m.get(), g.get(), sim_synth);
      size_t nodes = 0;
      check(lc_graph_size(g.get(), &nodes), "simulate");
      if (!gains.empty() && gains.size() != nodes) {
        std::cerr << "lipcons: --disturbance-gains needs " << nodes << " values\n";
        return 1;
      }
      lc_sim_options so;
      lc_sim_options_init(&so);
      so.dt = dt;
      so.t_end = t_end;
      so.seed = seed;
      so.disturbance = parse_wave(disturbance);
      so.disturbance_gains = gains.empty() ? nullptr : gains.data();
      lc_trajectory* t = nullptr;
      check(lc_simulate(d.get(), &so, &t), "simulate");
      TrajPtr traj(t);
      const std::string dir = output_dir(out_flag);
      const std::string csv = in_dir(dir, "trajectory.csv");
      check(lc_trajectory_write_csv(traj.get(), csv.c_str(), decimation), "simulate");
      char* s = nullptr;
      check(lc_trajectory_report(traj.get(), &s), "simulate");
      const std::string report = take(s);
      write_file(in_dir(dir, "simulate_report.json"), report);
      std::cout << report << "\n";
      std::cerr << "wrote " << csv << " and " << in_dir(dir, "simulate_report.json") << "\n";
    } else if (*repro_cmd) {
      const std::string dir = output_dir(out_flag);
      ro.out_dir = dir.c_str();
      ro.disturbance = parse_wave(repro_dist);
      ro.parallel = serial ? 0 : 1;
      char* report = nullptr;
      char* table = nullptr;
      int all_pass = 0;
      check(lc_repro(&ro, &report, &table, &all_pass), "repro");
      lc_string_free(report);
      std::cout << take(table);
      std::cout << (all_pass ? "all rows pass" : "some rows differ from the reference values") << "; files in " << dir
                << "\n";
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return 0;
}
