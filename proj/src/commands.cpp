#include "lipcons/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "lipcons/error.hpp"

namespace lipcons {

namespace {

double resolve_gamma(const ModelFile& mf, const SynthConfig& cfg) {
  if (cfg.gamma) return *cfg.gamma;
  if (mf.gamma) return *mf.gamma;
  return 2.0;
}

std::size_t resolve_leader(const DiGraph& g, const GraphSpectra& s, const SynthConfig& cfg) {
  if (cfg.leader) {
    if (*cfg.leader >= g.size()) fail(ErrorCode::kInvalidArgument, "leader index out of range");
    return *cfg.leader;
  }
  if (!s.flags.leader_follower_root) {
    fail(ErrorCode::kPrecondition, "Theorem 3 requires Assumption 1 (spanning tree rooted at the leader)");
  }
  return *s.flags.leader_follower_root;
}

Json graph_json(const DiGraph& g) {
  Json edges = Json::array();
  for (auto [p, c] : g.edges()) edges.push_back({p + 1, c + 1});
  return {{"nodes", g.size()}, {"edges", edges}};
}

// Runs one stage and prefixes failures with its name.
template <class F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + name + "': " + e.what());
  }
}

}  // namespace

SynthOutcome synthesize(const ModelFile& mf, const DiGraph& g, const SynthConfig& cfg) {
  const AgentModel& m = mf.model;
  m.validate();
  if (g.size() < 2) fail(ErrorCode::kInvalidArgument, "a network needs at least two agents");
  SynthOutcome out;
  out.spectra = analyze(g);
  SynthesisOptions opts;
  opts.c_multiplier = cfg.c_multiplier;
  opts.c_override = cfg.c_override;
  opts.cert = cfg.cert;
  switch (cfg.mode) {
    case DesignMode::kLeaderless:
      out.design = algorithm1(m, out.spectra, opts);
      out.verify = verify(LmiProblem::consensus(m), out.design.cert);
      break;
    case DesignMode::kHinf: {
      const double gamma = resolve_gamma(mf, cfg);
      out.design = algorithm2(m, out.spectra, gamma, opts);
      out.verify = verify(LmiProblem::hinf(m, gamma), out.design.cert);
      break;
    }
    case DesignMode::kLeaderFollower: {
      const std::size_t leader = resolve_leader(g, out.spectra, cfg);
      out.design = algorithm3(m, leader_follower_data(g, leader), opts);
      out.verify = verify(LmiProblem::consensus(m), out.design.cert);
      break;
    }
  }
  return out;
}

SimOutcome simulate(const ModelFile& mf, const DiGraph& g, const ProtocolDesign& d, const SimConfig& cfg) {
  Scenario sc;
  sc.model = mf.model;
  sc.graph = g;
  sc.design = d;
  sc.dt = cfg.dt;
  sc.t_end = cfg.t_end;
  sc.disturbance.wave = cfg.disturbance;
  if (cfg.disturbance != Waveform::kNone) {
    sc.disturbance.gains = cfg.disturbance_gains.value_or(Vec(g.size(), 1.0));
  }
  if (cfg.x0) {
    sc.x0 = *cfg.x0;
  } else if (cfg.disturbance != Waveform::kNone) {
    sc.x0 = Mat(g.size(), mf.model.n());  // zero initial condition for the H∞ cost
  } else {
    sc.x0 = random_initial_states(g.size(), mf.model.n(), cfg.seed);
  }
  SimOutcome out;
  out.traj = integrate(sc);
  if (out.traj.gamma) out.cost = hinf_cost(out.traj, *out.traj.gamma);
  out.lyapunov = lyapunov_diag(out.traj);
  return out;
}

Json synth_config_json(const SynthConfig& cfg) {
  Json j = {{"mode", to_string(cfg.mode)}, {"c_multiplier", cfg.c_multiplier}};
  if (cfg.gamma) j["gamma"] = *cfg.gamma;
  if (cfg.c_override) j["c"] = *cfg.c_override;
  if (cfg.cert) j["cert"] = {{"p", mat_to_json(cfg.cert->p)}, {"scalar", cfg.cert->scalar}};
  if (cfg.leader) j["leader"] = *cfg.leader + 1;
  return j;
}

Json sim_config_json(const SimConfig& cfg) {
  Json j = {{"dt", cfg.dt}, {"t_end", cfg.t_end}, {"seed", cfg.seed}, {"disturbance", to_string(cfg.disturbance)}};
  if (cfg.disturbance_gains) j["disturbance_gains"] = *cfg.disturbance_gains;
  if (cfg.x0) j["x0"] = mat_to_json(*cfg.x0);
  return j;
}

Json graph_report(const DiGraph& g) {
  Json config = {{"command", "graph"}, {"graph", graph_json(g)}};
  return {{"graph", graph_section(g, analyze(g))}, {"provenance", provenance(config, std::nullopt)}};
}

Json synth_report(const ModelFile& mf, const DiGraph& g, const SynthConfig& cfg, const SynthOutcome& out) {
  Json config = {{"command", "synth"}, {"model", model_to_json(mf)}, {"graph", graph_json(g)},
                 {"synth", synth_config_json(cfg)}};
  return {{"graph", graph_section(g, out.spectra)},
          {"design", design_section(out.design, out.verify)},
          {"provenance", provenance(config, std::nullopt)}};
}

Json simulate_report(const ModelFile& mf, const DiGraph& g, const SynthConfig& scfg, const SynthOutcome& syn,
                     const SimConfig& cfg, const SimOutcome& sim) {
  Json config = {{"command", "simulate"}, {"model", model_to_json(mf)}, {"graph", graph_json(g)},
                 {"synth", synth_config_json(scfg)}, {"sim", sim_config_json(cfg)}};
  const bool seeded = !cfg.x0 && cfg.disturbance == Waveform::kNone;
  Json sim_json = simulation_section(sim.traj, sim.cost, sim.lyapunov);
  sim_json["config"] = sim_config_json(cfg);
  sim_json["initial_state"] = cfg.x0 ? "given" : (seeded ? "seeded uniform [-1,1]" : "zero");
  return {{"graph", graph_section(g, syn.spectra)},
          {"design", design_section(syn.design, syn.verify)},
          {"simulation", sim_json},
          {"provenance", provenance(config, seeded ? std::optional<std::uint64_t>(cfg.seed) : std::nullopt)}};
}

ReproOutcome repro(const ReproConfig& cfg) {
  const ReferenceValues reference;
  ModelFile mf;
  mf.model = manipulator_model();
  mf.gamma = cfg.gamma;
  const DiGraph g = manipulator_graph();

  ReproOutcome out;
  const Json graph = stage("graph", [&] { return graph_section(g, analyze(g)); });

  SynthConfig solver_cfg;
  solver_cfg.mode = DesignMode::kHinf;
  solver_cfg.gamma = cfg.gamma;
  solver_cfg.c_multiplier = cfg.c_multiplier;
  const SynthOutcome solver = stage("synthesis (solver)", [&] { return synthesize(mf, g, solver_cfg); });

  SynthConfig ref_cfg = solver_cfg;
  ref_cfg.gamma = 2.0;  // the reference certificate is for γ = 2
  ref_cfg.c_multiplier = 1.0;
  ref_cfg.cert = manipulator_reference_certificate();
  ref_cfg.c_override = cfg.c_reference;
  const SynthOutcome ref = stage("synthesis (reference certificate)", [&] { return synthesize(mf, g, ref_cfg); });

  SimConfig calm;
  calm.dt = cfg.dt;
  calm.t_end = cfg.t_end;
  calm.seed = cfg.seed;
  SimConfig gusty = calm;
  gusty.disturbance = cfg.disturbance;
  gusty.disturbance_gains = manipulator_disturbance(cfg.disturbance).gains;

  struct Run {
    std::string name;
    const SynthOutcome* syn;
    const SynthConfig* scfg;
    SimConfig sim;
  };
  const std::vector<Run> runs = {{"undisturbed_solver", &solver, &solver_cfg, calm},
                                 {"undisturbed_reference", &ref, &ref_cfg, calm},
                                 {"disturbed_solver", &solver, &solver_cfg, gusty},
                                 {"disturbed_reference", &ref, &ref_cfg, gusty}};
  auto run_one = [&](const Run& r) {
    return stage("simulation " + r.name, [&] { return simulate(mf, g, r.syn->design, r.sim); });
  };
  std::vector<SimOutcome> sims;
  if (cfg.parallel) {
    std::vector<std::future<SimOutcome>> jobs;
    for (const Run& r : runs) jobs.push_back(std::async(std::launch::async, run_one, std::cref(r)));
    for (auto& j : jobs) sims.push_back(j.get());
  } else {
    for (const Run& r : runs) sims.push_back(run_one(r));
  }

  // Comparison against the reference values, then the properties the
  // theorems guarantee.
  auto row = [&](std::string q, double computed, double reference, double tol) {
    out.comparison.push_back({std::move(q), computed, reference, tol, false,
                              std::abs(computed - reference) <= tol});
  };
  auto bound = [&](std::string q, double computed, double limit) {
    out.comparison.push_back({std::move(q), computed, limit, 0.0, true, computed < limit});
  };
  row("lambda2((L+L^T)/2)", *ref.spectra.lambda2_sym, reference.lambda2, 1e-3);
  row("c_threshold (reference certificate)", ref.design.c_threshold, reference.c_threshold, 1e-3);
  for (std::size_t i = 0; i < reference.k.size(); ++i) {
    row("K[" + std::to_string(i + 1) + "] (reference certificate)", ref.design.k(0, i), reference.k[i], 5e-3);
  }
  bound("final max distance, undisturbed (solver)", sims[0].traj.max_pairwise_distance(sims[0].traj.samples() - 1),
        1e-3);
  bound("final max distance, undisturbed (reference)", sims[1].traj.max_pairwise_distance(sims[1].traj.samples() - 1),
        1e-3);
  if (sims[2].cost && sims[3].cost) {
    bound("J, disturbed (solver)", sims[2].cost->j, 0.0);
    bound("J, disturbed (reference)", sims[3].cost->j, 0.0);
    if (sims[2].cost->empirical_gain && sims[3].cost->empirical_gain) {
      bound("empirical gain, disturbed (solver)", *sims[2].cost->empirical_gain, cfg.gamma);
      bound("empirical gain, disturbed (reference)", *sims[3].cost->empirical_gain, 2.0);
    }
  }

  Json comparison = Json::array();
  for (const auto& r : out.comparison) {
    comparison.push_back({{"quantity", r.quantity},
                          {"computed", r.computed},
                          {"reference", r.reference},
                          {"relation", r.bound ? "below" : "within"},
                          {"tolerance", r.tolerance},
                          {"pass", r.pass}});
  }

  Json simulations = Json::object();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    Json s = simulation_section(sims[i].traj, sims[i].cost, sims[i].lyapunov);
    s["design"] = runs[i].syn == &solver ? "solver" : "reference";
    s["config"] = sim_config_json(runs[i].sim);
    s["initial_state"] = runs[i].sim.disturbance == Waveform::kNone ? "seeded uniform [-1,1]" : "zero";
    simulations[runs[i].name] = s;
  }

  Json config = {{"command", "repro"},
                 {"seed", cfg.seed},
                 {"dt", cfg.dt},
                 {"t_end", cfg.t_end},
                 {"gamma", cfg.gamma},
                 {"c_multiplier", cfg.c_multiplier},
                 {"c_reference", cfg.c_reference},
                 {"disturbance", to_string(cfg.disturbance)}};
  out.report = {{"graph", graph},
                {"designs",
                 {{"solver", design_section(solver.design, solver.verify)},
                  {"reference", design_section(ref.design, ref.verify)}}},
                {"simulations", simulations},
                {"comparison", comparison},
                {"provenance", provenance(config, cfg.seed)}};

  if (!cfg.out_dir.empty()) {
    stage("output", [&] {
      std::error_code ec;
      std::filesystem::create_directories(cfg.out_dir, ec);
      if (ec) fail(ErrorCode::kIo, "cannot create '" + cfg.out_dir + "': " + ec.message());
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string path = (std::filesystem::path(cfg.out_dir) / ("repro_" + runs[i].name + ".csv")).string();
        std::ofstream f(path);
        if (!f) fail(ErrorCode::kIo, "cannot write '" + path + "'");
        write_csv(f, sims[i].traj, CsvOptions{cfg.decimation});
        out.files.push_back(path);
      }
      const std::string rpath = (std::filesystem::path(cfg.out_dir) / "repro_report.json").string();
      write_text_file(rpath, dump_pretty(out.report) + "\n");
      out.files.push_back(rpath);
      const std::string tpath = (std::filesystem::path(cfg.out_dir) / "repro_comparison.txt").string();
      write_text_file(tpath, format_comparison(out.comparison));
      out.files.push_back(tpath);
      return 0;
    });
  }
  return out;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-44s %14s %14s %12s  %s\n", "quantity", "computed", "reference", "|diff|",
                "result");
  os << line;
  for (const auto& r : rows) {
    std::string ref = r.bound ? "< " : "";
    char refbuf[32];
    std::snprintf(refbuf, sizeof refbuf, "%.6g", r.reference);
    ref += refbuf;
    char diff[32];
    if (r.bound) {
      std::snprintf(diff, sizeof diff, "%s", "-");
    } else {
      std::snprintf(diff, sizeof diff, "%.2e", std::abs(r.computed - r.reference));
    }
    std::snprintf(line, sizeof line, "%-44s %14.6g %14s %12s  %s", r.quantity.c_str(), r.computed, ref.c_str(), diff,
                  r.pass ? "PASS" : "FAIL");
    os << line;
    if (!r.bound) {
      std::snprintf(line, sizeof line, " (tol %.0e)", r.tolerance);
      os << line;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace lipcons
