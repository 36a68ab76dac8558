#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "cpcr/analysis.hpp"
#include "cpcr/context.hpp"
#include "cpcr/cross_validation.hpp"
#include "cpcr/data.hpp"
#include "cpcr/encoder.hpp"
#include "cpcr/mlp.hpp"
#include "cpcr/optimize.hpp"

namespace cpcr {

using json = nlohmann::json;

// Reading is lenient about missing keys (defaults apply) but strict about
// values: bad enum names or invalid combinations throw ConfigError.
void to_json(json& j, const Pairing& p);
void from_json(const json& j, Pairing& p);
void to_json(json& j, const IntensitySchedule& s);
void from_json(const json& j, IntensitySchedule& s);
void to_json(json& j, const EncodingConfig& c);
void from_json(const json& j, EncodingConfig& c);
void to_json(json& j, const TrainConfig& c);
void from_json(const json& j, TrainConfig& c);
void to_json(json& j, const ContextOptions& c);
void from_json(const json& j, ContextOptions& c);
void to_json(json& j, const SearchSpec& s);
void from_json(const json& j, SearchSpec& s);
void to_json(json& j, const SearchCandidate& c);
void from_json(const json& j, SearchCandidate& c);
void to_json(json& j, const SearchTrace& t);
void from_json(const json& j, SearchTrace& t);
void to_json(json& j, const FoldPlan& p);
void to_json(json& j, const CvReport& r);
void to_json(json& j, const IccCell& c);
void to_json(json& j, const IccReport& r);
void to_json(json& j, const FrequencyTable& t);
void to_json(json& j, const DiscretePoint& p);
void to_json(json& j, const EpochStats& e);

json read_json(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json(const json& j, const std::string& path);
void write_text(const std::string& text, const std::string& path);

/// Mean image as `<stem>.json` (geometry, label, contributing cases) plus
/// `<stem>.f64` (raw little-endian doubles).
void save_mean(const MeanImage& m, const std::string& stem);
MeanImage load_mean(const std::string& stem);

/// Checkpoint: "CPCRMLP1", a u64 little-endian header length, the JSON
/// header, then every weight matrix (row-major) and bias vector as
/// little-endian float32, layer by layer.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace cpcr
