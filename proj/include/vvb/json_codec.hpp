#pragma once

#include <json.hpp>

#include "vvb/dataset.hpp"
#include "vvb/grid.hpp"
#include "vvb/noise.hpp"

namespace vvb {

// ADL hooks so nlohmann::json can (de)serialize the config structs. Doubles
// round-trip exactly (dumped with max_digits10 precision).
void to_json(nlohmann::json& j, const GridSpec& g);
void from_json(const nlohmann::json& j, GridSpec& g);

void to_json(nlohmann::json& j, const NoiseConfig& c);
void from_json(const nlohmann::json& j, NoiseConfig& c);

void to_json(nlohmann::json& j, const LabelSpec& s);
void from_json(const nlohmann::json& j, LabelSpec& s);

void to_json(nlohmann::json& j, const Provenance& p);
void from_json(const nlohmann::json& j, Provenance& p);

} // namespace vvb
