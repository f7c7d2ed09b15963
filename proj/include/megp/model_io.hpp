#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "megp/cluster.hpp"
#include "megp/gp_config.hpp"

namespace megp {

// Config sections are strict: unknown keys raise InputError, missing keys keep
// the value already present in `into`.
nlohmann::json to_json(const GpConfig& config);
void merge_json(const nlohmann::json& doc, GpConfig& into);
nlohmann::json to_json(const MegpConfig& config);
void merge_json(const nlohmann::json& doc, MegpConfig& into);

/// Model file document. The unbounded epsilon of a catch-all cluster is
/// written as the string "inf".
nlohmann::json model_to_json(const MegpModel& model);
MegpModel model_from_json(const nlohmann::json& doc);

std::string dump_model(const MegpModel& model);
void save_model(const std::filesystem::path& path, const MegpModel& model);
MegpModel load_model(const std::filesystem::path& path);

} // namespace megp
