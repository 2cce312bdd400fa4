#pragma once

#include <string>
#include <string_view>

#include "conbandit/env.hpp"

namespace conbandit {

// {"T":..,"K":..,"m":..,"loss_means":[[..]],"constraint_means":[[[..]]]}
// with every float printed to 17 significant digits, so a round trip is
// bit-exact.
std::string instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(std::string_view text);

}  // namespace conbandit
