#pragma once

#include <string>

#include "mcal/driver.hpp"

namespace mcal {

/// CSV artifacts with a header row, '.' decimal separator and 17 significant
/// digits (lossless round-trip of 64-bit floats).
void write_iterations_csv(const std::string& path, const RunReport& report);
void write_potential_csv(const std::string& path, const RunReport& report);
void write_density_csv(const std::string& path, const RunReport& report);
void write_summary_json(const std::string& path, const RunReport& report);

std::string format_double(double v);

}  // namespace mcal
