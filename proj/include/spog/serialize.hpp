#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "spog/graph.hpp"
#include "spog/init.hpp"
#include "spog/metrics.hpp"
#include "spog/model.hpp"
#include "spog/nngp.hpp"
#include "spog/spog.hpp"
#include "spog/train.hpp"

namespace spog {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Throws ValidationError naming `where` when `j` is not an object or holds a key outside `allowed`.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

InitScheme init_from_json(const json& j);
json to_json(const InitScheme& s);

/// Model section; input_dim and num_classes come from the dataset.
ModelSpec model_from_json(const json& j, std::size_t input_dim, std::size_t num_classes);
json to_json(const ModelSpec& m);

SpogConfig spog_from_json(const json& j, Arch arch);
json to_json(const SpogConfig& c);

/// Missing epochs/patience fall back to the depth-dependent defaults.
TrainConfig train_from_json(const json& j, std::size_t depth);
json to_json(const TrainConfig& c);

SynthParams synth_from_json(const json& j);
json to_json(const SynthParams& p);

Activation activation_from_json(const json& j, const std::string& where);

json to_json(const MetricSummary& s);
json to_json(const SpReport& r);
json to_json(const SpogResult& r);
json to_json(const TrainResult& r);
json to_json(const VerificationReport& r);
json to_json(const ModelParams& p);
ModelParams params_from_json(const json& j);

/// Writes `text` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& text);
json read_json_file(const std::filesystem::path& path);

}  // namespace spog
