#pragma once

#include <string>

#include "isomix/config.hpp"
#include "isomix/simulation.hpp"

namespace isomix {

/// Fixed-precision general format: `digits` significant digits, '.' separator,
/// independent of the C locale.
std::string format_number(double x, int digits = 17);

/// Writes monitors.csv, fields_<step>.csv and run.json into `directory`
/// (created if needed). Throws IoError.
void emit_outputs(const TimeSeries& series, const RunConfig& config, const std::string& directory);

}  // namespace isomix
