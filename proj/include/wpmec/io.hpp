#pragma once

// JSON serialization of instances, solve reports and experiment configs.
// Complex numbers are [re, im] pairs. Parse failures throw ParseError with
// the line and column of a syntax error or the key path of a bad value.

#include <string>

#include "wpmec/experiments.hpp"
#include "wpmec/model.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/solver.hpp"

namespace wpmec {

Instance instance_from_json(const std::string& text);
std::string instance_to_json(const Instance& inst, int indent = 2);

/// Missing keys take the defaults of ExperimentConfig; unknown keys are
/// rejected so that typos do not pass silently.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

std::string report_to_json(const SolveReport& report, const KktReport* kkt = nullptr, int indent = 2);
std::string validation_to_json(const ValidationReport& report, int indent = 2);

/// Throws IoError when the file cannot be read.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& body);

}  // namespace wpmec
