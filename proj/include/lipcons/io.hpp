#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "lipcons/graph.hpp"
#include "lipcons/lmi.hpp"
#include "lipcons/model.hpp"
#include "lipcons/sim.hpp"
#include "lipcons/synthesis.hpp"

namespace lipcons {

using Json = nlohmann::ordered_json;

/// Agent model file: dimensions, matrices as nested row arrays, alpha, the
/// nonlinearity terms (1-based indices), and optionally gamma and a full
/// adjacency matrix for the network.
struct ModelFile {
  AgentModel model;
  std::optional<double> gamma;
  std::optional<DiGraph> graph;

  friend bool operator==(const ModelFile& a, const ModelFile& b);
};

Json mat_to_json(const Mat& m);
/// Parses nested rows; `rows`/`cols` come from the declared dimensions so
/// that matrices with a zero extent survive the round trip.
Mat mat_from_json(const Json& j, std::size_t rows, std::size_t cols, const std::string& name);

Json model_to_json(const ModelFile& mf);
ModelFile model_from_json(const Json& j);
ModelFile parse_model_file(const std::string& text);
std::string format_model_file(const ModelFile& mf);
ModelFile load_model_file(const std::string& path);

/// Certificate file: {"p": [[...]], "scalar": s}. Extra fields are ignored.
Json certificate_to_json(const LmiCertificate& cert);
LmiCertificate certificate_from_json(const Json& j);
LmiCertificate parse_certificate(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Report sections.
Json graph_section(const DiGraph& g, const GraphSpectra& s);
Json design_section(const ProtocolDesign& d, const LmiVerifyReport& v);
Json simulation_section(const Trajectory& traj, const std::optional<HinfCost>& cost,
                        const LyapunovReport& lyap);

/// FNV-1a 64-bit over the compact dump, as 16 hex digits.
std::string config_hash(const Json& config);
Json provenance(const Json& config, std::optional<std::uint64_t> seed);

/// Indented dump that keeps arrays of scalars (matrix rows, vectors) on one line.
std::string dump_pretty(const Json& j);

/// True when every number in the tree is finite (NaN and ±inf serialize to null).
bool all_numbers_finite(const Json& j);

}  // namespace lipcons
