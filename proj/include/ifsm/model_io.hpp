#pragma once

#include <cstdint>
#include <string>

#include "ifsm/model.hpp"

namespace ifsm {

// JSON model documents; see docs/model_schema.md. Parse and schema errors
// raise ModelError, unreadable files raise IoError.
IfsmModel model_from_string(const std::string& text);
std::string model_to_string(const IfsmModel& model);

IfsmModel load_model(const std::string& path);
void save_model(const IfsmModel& model, const std::string& path);

// FNV-1a 64 of the canonical serialization.
std::uint64_t model_hash(const IfsmModel& model);
std::string hex64(std::uint64_t v);

}  // namespace ifsm
