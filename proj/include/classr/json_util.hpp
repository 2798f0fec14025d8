#pragma once

#include <json.hpp>

#include "classr/units.hpp"

namespace classr {

UnitVector unit_vector_from_json(const nlohmann::json& j);
nlohmann::json unit_vector_to_json(const UnitVector& u);

}  // namespace classr
