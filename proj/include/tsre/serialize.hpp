#pragma once

#include <filesystem>

#include <json.hpp>

#include "tsre/gauge.hpp"
#include "tsre/graph.hpp"
#include "tsre/harness.hpp"
#include "tsre/stats.hpp"

namespace tsre {

using Json = nlohmann::json;

/// Parses a file; malformed JSON or I/O failure raises ConfigError.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Rounds to 12 significant digits; non-finite values become null.
Json number12(double v);

/// {"type": "chain"|"ring"|"custom", "n": N, "edges": [[j,k],...] (custom
/// only), "mu": x or [...], "lambda": x or [...]}. Errors: ConfigError for a
/// malformed document, graph-module errors for invalid graphs.
InteractionGraph graph_from_json(const Json& j);
Json graph_to_json(const InteractionGraph& g);

/// Bonds as {"edge": [j, k], "matrix": row-major 9 numbers}, fields as
/// 3-element arrays in vertex order, plus seed metadata.
Json sample_to_json(const TsreSample& s);
TsreSample sample_from_json(const Json& j);

Json canonical_to_json(const CanonicalForm& form);
Json fit_to_json(const FitResult& fit);

SweepConfig sweep_config_from_json(const Json& j);
Json sweep_config_to_json(const SweepConfig& c);

}  // namespace tsre
