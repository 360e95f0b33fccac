#pragma once

#include "json.hpp"
#include "melm/optimizer.hpp"

namespace melm::detail {

nlohmann::ordered_json optim_to_json(const OptimConfig& cfg);
OptimConfig optim_from_json(const nlohmann::json& j);

}  // namespace melm::detail
