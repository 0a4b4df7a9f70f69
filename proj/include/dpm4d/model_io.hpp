#pragma once

#include <filesystem>
#include <string>

#include "dpm4d/parts_model.hpp"

namespace dpm4d {

inline constexpr std::uint32_t model_format_version = 1;

// Layout: "4DDPM", u32 version, u32 header length, JSON header (skeleton,
// types, filter shapes, tensor index), then every weight as a little-endian
// float32 in model order.
std::string serialize_model(const PartsModel& model);
PartsModel deserialize_model(const std::string& bytes);

void save_model(const PartsModel& model, const std::filesystem::path& path);
PartsModel load_model(const std::filesystem::path& path);

}  // namespace dpm4d
