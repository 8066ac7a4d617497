#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lipcons/io.hpp"

namespace lipcons {

struct SynthConfig {
  DesignMode mode = DesignMode::kLeaderless;
  std::optional<double> gamma;             // hinf only; falls back to the model file, then 2
  double c_multiplier = 1.0;
  std::optional<double> c_override;
  std::optional<LmiCertificate> cert;      // injected certificate
  std::optional<std::size_t> leader;       // 0-based; default: the graph's root
};

struct SynthOutcome {
  GraphSpectra spectra;
  ProtocolDesign design;
  LmiVerifyReport verify;
};

SynthOutcome synthesize(const ModelFile& mf, const DiGraph& g, const SynthConfig& cfg);

struct SimConfig {
  double dt = 1e-3;
  double t_end = 10.0;
  std::uint64_t seed = 42;
  Waveform disturbance = Waveform::kNone;
  std::optional<Vec> disturbance_gains;  // one per agent; default all ones
  std::optional<Mat> x0;                  // default: zero when disturbed, else seeded draw
};

struct SimOutcome {
  Trajectory traj;
  std::optional<HinfCost> cost;
  LyapunovReport lyapunov;
};

SimOutcome simulate(const ModelFile& mf, const DiGraph& g, const ProtocolDesign& d, const SimConfig& cfg);

Json synth_config_json(const SynthConfig& cfg);
Json sim_config_json(const SimConfig& cfg);

/// Report for `graph`: graph section and provenance.
Json graph_report(const DiGraph& g);
/// Report for `synth`: graph, certificate/design, provenance.
Json synth_report(const ModelFile& mf, const DiGraph& g, const SynthConfig& cfg, const SynthOutcome& out);
/// Report for `simulate`: adds the simulation summary.
Json simulate_report(const ModelFile& mf, const DiGraph& g, const SynthConfig& scfg, const SynthOutcome& syn,
                     const SimConfig& cfg, const SimOutcome& sim);

struct ReproConfig {
  std::uint64_t seed = 42;
  double dt = 1e-3;
  double t_end = 10.0;
  double gamma = 2.0;
  double c_multiplier = 1.0;  // solver-found design
  double c_reference = 37.0;      // coupling used with the reference certificate
  Waveform disturbance = Waveform::kBipolar;
  std::size_t decimation = 10;
  std::string out_dir;        // empty: no files written
  bool parallel = true;
};

struct ComparisonRow {
  std::string quantity;
  double computed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;  // |computed - reference| ≤ tolerance, or computed < reference when bound
  bool bound = false;
  bool pass = false;
};

struct ReproOutcome {
  Json report;
  std::vector<ComparisonRow> comparison;
  std::vector<std::string> files;
};

/// Full manipulator scenario: graph analysis, solver-found and reference
/// certificates, undisturbed and disturbed runs for both designs.
ReproOutcome repro(const ReproConfig& cfg);

std::string format_comparison(const std::vector<ComparisonRow>& rows);

/// Reference values of the manipulator example.
struct ReferenceValues {
  double lambda2 = 0.8139;
  double c_threshold = 36.4462;
  std::vector<double> k = {-2.4920, -0.1957, 1.4115, -3.8216};
};

}  // namespace lipcons
