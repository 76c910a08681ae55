#pragma once

#include <stackgame/model_params.hpp>

#include <istream>
#include <string>

namespace stackgame {

/// INI-style scenario text with sections [market], [claims], [reinsurer],
/// [insurer1], [insurer2]. Comments start with '#' or ';'.
/// Unknown sections or keys, duplicates and missing keys are ScenarioParseError.
/// insurer2.eta may be omitted, in which case it is derived.
ScenarioConfig parse_scenario(std::istream& in, const std::string& source = "<input>");
ScenarioConfig load_scenario(const std::string& path);

/// Inverse of parse_scenario in the direct claim form.
std::string format_scenario(const ScenarioConfig& cfg);

}  // namespace stackgame
