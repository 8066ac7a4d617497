#include "lipcons/lipcons.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <fstream>
#include <new>
#include <string>

#include "lipcons/commands.hpp"
#include "lipcons/error.hpp"

struct lc_model {
  lipcons::ModelFile file;
};

struct lc_graph {
  lipcons::DiGraph graph;
};

struct lc_design {
  lipcons::ModelFile model;
  lipcons::DiGraph graph;
  lipcons::SynthConfig config;
  lipcons::SynthOutcome outcome;
};

struct lc_trajectory {
  lc_design design;
  lipcons::SimConfig config;
  lipcons::SimOutcome outcome;
};

namespace {

thread_local std::string g_last_error;

template <class F>
lc_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return LIPCONS_OK;
  } catch (const lipcons::Error& e) {
    g_last_error = e.what();
    return static_cast<lc_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return LIPCONS_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr) lipcons::fail(lipcons::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lipcons::Waveform to_wave(lc_wave w) {
  switch (w) {
    case LIPCONS_WAVE_NONE:
      return lipcons::Waveform::kNone;
    case LIPCONS_WAVE_BIPOLAR:
      return lipcons::Waveform::kBipolar;
    case LIPCONS_WAVE_UNIPOLAR:
      return lipcons::Waveform::kUnipolar;
  }
  lipcons::fail(lipcons::ErrorCode::kInvalidArgument, "unknown disturbance waveform");
}

}  // namespace

extern "C" {

const char* lc_version(void) { return LIPCONS_VERSION; }

const char* lc_last_error(void) { return g_last_error.c_str(); }

void lc_string_free(char* s) { std::free(s); }

lc_status lc_model_parse(const char* json_text, lc_model** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new lc_model{lipcons::parse_model_file(json_text)};
  });
}

lc_status lc_model_load(const char* path, lc_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lc_model{lipcons::load_model_file(path)};
  });
}

lc_status lc_model_manipulator(lc_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lc_model{{lipcons::manipulator_model(), 2.0, lipcons::manipulator_graph()}};
  });
}

lc_status lc_model_to_json(const lc_model* m, char** out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    *out = dup_string(lipcons::format_model_file(m->file));
  });
}

lc_status lc_model_dim(const lc_model* m, size_t* n) {
  return guarded([&] {
    require(m, "model");
    require(n, "n");
    *n = m->file.model.n();
  });
}

lc_status lc_model_graph(const lc_model* m, lc_graph** out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    if (!m->file.graph) lipcons::fail(lipcons::ErrorCode::kInvalidArgument, "model file has no adjacency matrix");
    *out = new lc_graph{*m->file.graph};
  });
}

void lc_model_free(lc_model* m) { delete m; }

lc_status lc_graph_parse(const char* edge_list_text, lc_graph** out) {
  return guarded([&] {
    require(edge_list_text, "edge_list_text");
    require(out, "out");
    *out = new lc_graph{lipcons::parse_edge_list(edge_list_text)};
  });
}

lc_status lc_graph_load(const char* path, lc_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lc_graph{lipcons::load_edge_list(path)};
  });
}

lc_status lc_graph_manipulator(lc_graph** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lc_graph{lipcons::manipulator_graph()};
  });
}

lc_status lc_graph_from_edges(size_t nodes, const size_t* parents, const size_t* children, size_t count,
                              lc_graph** out) {
  return guarded([&] {
    require(out, "out");
    if (count > 0) {
      require(parents, "parents");
      require(children, "children");
    }
    std::vector<lipcons::DiGraph::Edge> edges;
    for (size_t i = 0; i < count; ++i) {
      if (parents[i] == 0 || children[i] == 0) {
        lipcons::fail(lipcons::ErrorCode::kInvalidArgument, "node indices are 1-based");
      }
      edges.emplace_back(parents[i] - 1, children[i] - 1);
    }
    *out = new lc_graph{lipcons::DiGraph(nodes, std::move(edges))};
  });
}

lc_status lc_graph_size(const lc_graph* g, size_t* nodes) {
  return guarded([&] {
    require(g, "graph");
    require(nodes, "nodes");
    *nodes = g->graph.size();
  });
}

lc_status lc_graph_report(const lc_graph* g, char** json_out) {
  return guarded([&] {
    require(g, "graph");
    require(json_out, "json_out");
    *json_out = dup_string(lipcons::dump_pretty(lipcons::graph_report(g->graph)));
  });
}

void lc_graph_free(lc_graph* g) { delete g; }

void lc_synth_options_init(lc_synth_options* o) {
  if (o == nullptr) return;
  *o = lc_synth_options{LIPCONS_MODE_LEADERLESS, 0.0, 1.0, 0.0, nullptr, 0};
}

lc_status lc_synthesize(const lc_model* m, const lc_graph* g, const lc_synth_options* o, lc_design** out) {
  return guarded([&] {
    require(m, "model");
    require(g, "graph");
    require(o, "options");
    require(out, "out");
    lipcons::SynthConfig cfg;
    switch (o->mode) {
      case LIPCONS_MODE_LEADERLESS:
        cfg.mode = lipcons::DesignMode::kLeaderless;
        break;
      case LIPCONS_MODE_HINF:
        cfg.mode = lipcons::DesignMode::kHinf;
        break;
      case LIPCONS_MODE_LEADER_FOLLOWER:
        cfg.mode = lipcons::DesignMode::kLeaderFollower;
        break;
      default:
        lipcons::fail(lipcons::ErrorCode::kInvalidArgument, "unknown mode");
    }
    if (o->gamma > 0.0) cfg.gamma = o->gamma;
    cfg.c_multiplier = o->c_multiplier == 0.0 ? 1.0 : o->c_multiplier;
    if (o->c > 0.0) cfg.c_override = o->c;
    if (o->cert_json != nullptr && o->cert_json[0] != '\0') cfg.cert = lipcons::parse_certificate(o->cert_json);
    if (o->leader > 0) cfg.leader = o->leader - 1;
    auto d = std::make_unique<lc_design>(lc_design{m->file, g->graph, cfg, {}});
    d->outcome = lipcons::synthesize(d->model, d->graph, cfg);
    *out = d.release();
  });
}

lc_status lc_design_report(const lc_design* d, char** json_out) {
  return guarded([&] {
    require(d, "design");
    require(json_out, "json_out");
    *json_out = dup_string(lipcons::dump_pretty(lipcons::synth_report(d->model, d->graph, d->config, d->outcome)));
  });
}

lc_status lc_design_gain(const lc_design* d, double* buf, size_t cap, size_t* rows, size_t* cols) {
  return guarded([&] {
    require(d, "design");
    require(rows, "rows");
    require(cols, "cols");
    const lipcons::Mat& k = d->outcome.design.k;
    *rows = k.rows();
    *cols = k.cols();
    if (buf != nullptr) {
      if (cap < k.rows() * k.cols()) lipcons::fail(lipcons::ErrorCode::kInvalidArgument, "gain buffer too small");
      std::copy(k.data().begin(), k.data().end(), buf);
    }
  });
}

lc_status lc_design_coupling(const lc_design* d, double* c, double* c_threshold) {
  return guarded([&] {
    require(d, "design");
    if (c != nullptr) *c = d->outcome.design.c;
    if (c_threshold != nullptr) *c_threshold = d->outcome.design.c_threshold;
  });
}

void lc_design_free(lc_design* d) { delete d; }

void lc_sim_options_init(lc_sim_options* o) {
  if (o == nullptr) return;
  *o = lc_sim_options{1e-3, 10.0, 42, LIPCONS_WAVE_NONE, nullptr, nullptr};
}

lc_status lc_simulate(const lc_design* d, const lc_sim_options* o, lc_trajectory** out) {
  return guarded([&] {
    require(d, "design");
    require(o, "options");
    require(out, "out");
    lipcons::SimConfig cfg;
    cfg.dt = o->dt;
    cfg.t_end = o->t_end;
    cfg.seed = o->seed;
    cfg.disturbance = to_wave(o->disturbance);
    const std::size_t agents = d->graph.size();
    const std::size_t n = d->model.model.n();
    if (o->disturbance_gains != nullptr) cfg.disturbance_gains = lipcons::Vec(o->disturbance_gains, o->disturbance_gains + agents);
    if (o->x0 != nullptr) cfg.x0 = lipcons::Mat(agents, n, std::vector<double>(o->x0, o->x0 + agents * n));
    auto t = std::make_unique<lc_trajectory>();
    t->design = *d;
    t->config = cfg;
    t->outcome = lipcons::simulate(d->model, d->graph, d->outcome.design, cfg);
    *out = t.release();
  });
}

lc_status lc_trajectory_report(const lc_trajectory* t, char** json_out) {
  return guarded([&] {
    require(t, "trajectory");
    require(json_out, "json_out");
    const lc_design& d = t->design;
    *json_out = dup_string(lipcons::dump_pretty(
        lipcons::simulate_report(d.model, d.graph, d.config, d.outcome, t->config, t->outcome)));
  });
}

lc_status lc_trajectory_write_csv(const lc_trajectory* t, const char* path, size_t decimation) {
  return guarded([&] {
    require(t, "trajectory");
    require(path, "path");
    std::ofstream f(path);
    if (!f) lipcons::fail(lipcons::ErrorCode::kIo, std::string("cannot write '") + path + "'");
    lipcons::write_csv(f, t->outcome.traj, lipcons::CsvOptions{decimation == 0 ? 1 : decimation});
    if (!f) lipcons::fail(lipcons::ErrorCode::kIo, std::string("write failed for '") + path + "'");
  });
}

lc_status lc_trajectory_samples(const lc_trajectory* t, size_t* samples) {
  return guarded([&] {
    require(t, "trajectory");
    require(samples, "samples");
    *samples = t->outcome.traj.samples();
  });
}

void lc_trajectory_free(lc_trajectory* t) { delete t; }

void lc_repro_options_init(lc_repro_options* o) {
  if (o == nullptr) return;
  const lipcons::ReproConfig def;
  *o = lc_repro_options{def.seed, def.dt, def.t_end, def.gamma, def.c_multiplier, def.c_reference,
                        LIPCONS_WAVE_BIPOLAR, def.decimation, nullptr, 1};
}

lc_status lc_repro(const lc_repro_options* o, char** report_json, char** table_text, int* all_pass) {
  return guarded([&] {
    require(o, "options");
    lipcons::ReproConfig cfg;
    cfg.seed = o->seed;
    cfg.dt = o->dt;
    cfg.t_end = o->t_end;
    cfg.gamma = o->gamma;
    cfg.c_multiplier = o->c_multiplier;
    cfg.c_reference = o->c_reference;
    cfg.disturbance = to_wave(o->disturbance);
    cfg.decimation = o->decimation == 0 ? 1 : o->decimation;
    cfg.out_dir = o->out_dir != nullptr ? o->out_dir : "";
    cfg.parallel = o->parallel != 0;
    const lipcons::ReproOutcome r = lipcons::repro(cfg);
    if (all_pass != nullptr) {
      *all_pass = 1;
      for (const auto& row : r.comparison) {
        if (!row.pass) *all_pass = 0;
      }
    }
    if (report_json != nullptr) *report_json = dup_string(lipcons::dump_pretty(r.report));
    if (table_text != nullptr) *table_text = dup_string(lipcons::format_comparison(r.comparison));
  });
}

}  // extern "C"
