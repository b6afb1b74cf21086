#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rbmo_lab/czo.hpp"
#include "rbmo_lab/geometry.hpp"
#include "rbmo_lab/measure.hpp"
#include "rbmo_lab/rbmo.hpp"
#include "rbmo_lab/verify.hpp"

namespace rbmo_lab::io {

using Json = nlohmann::ordered_json;

/// Header comment of the theorem-report CSV; bump the version with the columns.
inline constexpr const char* kCsvHeaderComment = "# rbmo_lab theorem-report csv v1";

Json read_json_file(const std::filesystem::path& path);
/// Writes text with LF endings and a trailing newline.
void write_text_file(const std::filesystem::path& path, const std::string& text);
/// Two-space indented dump with a trailing newline.
std::string dump(const Json& json);

Json to_json(const AtomicMeasure& measure);
AtomicMeasure measure_from_json(const Json& json);
AtomicMeasure load_measure(const std::filesystem::path& path);

Json to_json(const SampledFunction& f);
SampledFunction function_from_json(const Json& json);
SampledFunction load_function(const std::filesystem::path& path);

Json to_json(const FamilyParams& params);
Json to_json(const CubeFamily& family);
Json to_json(const NormEstimate& estimate);
Json to_json(const JnProfile& profile);
Json to_json(const KernelReport& report, const std::map<double, double>& l2_opnorm);
Json to_json(const TheoremReport& report);

/// One row per (function, eps) entry of per_function; every cell is copied
/// from the JSON form of the report, formatted identically.
std::string theorem_csv(const Json& report);

}  // namespace rbmo_lab::io
