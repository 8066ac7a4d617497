/* C interface to the lipcons library.
 *
 * Objects are opaque handles released with their matching *_free function.
 * Every function that can fail returns an lc_status; on failure the message
 * is available from lc_last_error() until the next call on the same thread.
 * Strings returned through char** are heap-allocated and released with
 * lc_string_free. Node indices are 1-based.
 */
#ifndef LIPCONS_H
#define LIPCONS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LC_API __declspec(dllexport)
#else
#define LC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lc_status {
  LIPCONS_OK = 0,
  LIPCONS_INVALID_ARGUMENT = 1,
  LIPCONS_PRECONDITION = 2,  /* graph or certificate does not meet a theorem hypothesis */
  LIPCONS_INFEASIBLE = 3,    /* LMI infeasible within the solver budget */
  LIPCONS_BLOW_UP = 4,       /* simulation state exceeded the blow-up bound */
  LIPCONS_PARSE = 5,
  LIPCONS_NUMERIC = 6,
  LIPCONS_IO = 7,
  LIPCONS_INTERNAL = 99
} lc_status;

typedef enum lc_mode { LIPCONS_MODE_LEADERLESS = 0, LIPCONS_MODE_HINF = 1, LIPCONS_MODE_LEADER_FOLLOWER = 2 } lc_mode;

typedef enum lc_wave { LIPCONS_WAVE_NONE = 0, LIPCONS_WAVE_BIPOLAR = 1, LIPCONS_WAVE_UNIPOLAR = 2 } lc_wave;

typedef struct lc_model lc_model;
typedef struct lc_graph lc_graph;
typedef struct lc_design lc_design;
typedef struct lc_trajectory lc_trajectory;

LC_API const char* lc_version(void);
LC_API const char* lc_last_error(void);
LC_API void lc_string_free(char* s);

/* Models (JSON model file format). */
LC_API lc_status lc_model_parse(const char* json_text, lc_model** out);
LC_API lc_status lc_model_load(const char* path, lc_model** out);
LC_API lc_status lc_model_manipulator(lc_model** out);
LC_API lc_status lc_model_to_json(const lc_model* m, char** out);
/* Writes the state dimension n. */
LC_API lc_status lc_model_dim(const lc_model* m, size_t* n);
/* The adjacency matrix embedded in the model file, if any (LIPCONS_INVALID_ARGUMENT otherwise). */
LC_API lc_status lc_model_graph(const lc_model* m, lc_graph** out);
LC_API void lc_model_free(lc_model* m);

/* Graphs (edge-list format). */
LC_API lc_status lc_graph_parse(const char* edge_list_text, lc_graph** out);
LC_API lc_status lc_graph_load(const char* path, lc_graph** out);
LC_API lc_status lc_graph_manipulator(lc_graph** out);
LC_API lc_status lc_graph_from_edges(size_t nodes, const size_t* parents, const size_t* children, size_t count,
                                     lc_graph** out);
LC_API lc_status lc_graph_size(const lc_graph* g, size_t* nodes);
/* Report JSON with flags, r, a(L), lambda2, leader-follower data. */
LC_API lc_status lc_graph_report(const lc_graph* g, char** json_out);
LC_API void lc_graph_free(lc_graph* g);

typedef struct lc_synth_options {
  lc_mode mode;
  double gamma;           /* <= 0: take it from the model file, else 2 */
  double c_multiplier;    /* c = multiplier * threshold; 0 means 1 */
  double c;               /* > 0: explicit coupling strength (must reach the threshold) */
  const char* cert_json;  /* optional injected certificate {"p": [[...]], "scalar": s} */
  size_t leader;          /* 1-based leader, 0: the graph's root */
} lc_synth_options;

LC_API void lc_synth_options_init(lc_synth_options* o);
LC_API lc_status lc_synthesize(const lc_model* m, const lc_graph* g, const lc_synth_options* o, lc_design** out);
/* Report JSON with graph, certificate, design and verification sections. */
LC_API lc_status lc_design_report(const lc_design* d, char** json_out);
/* Copies K (row-major) into buf when cap is large enough; rows/cols are always written. */
LC_API lc_status lc_design_gain(const lc_design* d, double* buf, size_t cap, size_t* rows, size_t* cols);
LC_API lc_status lc_design_coupling(const lc_design* d, double* c, double* c_threshold);
LC_API void lc_design_free(lc_design* d);

typedef struct lc_sim_options {
  double dt;                      /* default 1e-3 */
  double t_end;                   /* default 10 */
  uint64_t seed;                  /* seeded uniform [-1,1] initial states when undisturbed */
  lc_wave disturbance;
  const double* disturbance_gains; /* optional, one per agent */
  const double* x0;                /* optional, agents*n row-major */
} lc_sim_options;

LC_API void lc_sim_options_init(lc_sim_options* o);
LC_API lc_status lc_simulate(const lc_design* d, const lc_sim_options* o, lc_trajectory** out);
/* Report JSON for the run, including the design it used. */
LC_API lc_status lc_trajectory_report(const lc_trajectory* t, char** json_out);
LC_API lc_status lc_trajectory_write_csv(const lc_trajectory* t, const char* path, size_t decimation);
LC_API lc_status lc_trajectory_samples(const lc_trajectory* t, size_t* samples);
LC_API void lc_trajectory_free(lc_trajectory* t);

typedef struct lc_repro_options {
  uint64_t seed;
  double dt;
  double t_end;
  double gamma;
  double c_multiplier;
  double c_reference;
  lc_wave disturbance;
  size_t decimation;
  const char* out_dir; /* NULL or empty: no files */
  int parallel;
} lc_repro_options;

LC_API void lc_repro_options_init(lc_repro_options* o);
/* Runs the manipulator example end to end. report_json gets the full report,
 * table_text the comparison table; all_pass is 1 when every row passes. */
LC_API lc_status lc_repro(const lc_repro_options* o, char** report_json, char** table_text, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif /* LIPCONS_H */
