#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "lambdamem/model.hpp"

// Plain-text configuration: `section.key = value` lines, '#' comments.
// Frequencies are given in ordinary MHz and converted to rad/ns on resolve;
// every key corresponds to one ExperimentConfig field. Unknown keys are
// rejected with their names so typos cannot silently revert to defaults.

namespace lambdamem {

// A configuration problem attributable to user input (file contents or
// --set overrides); carries the offending key when there is one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

// Applies one `section.key = value` assignment. Throws ConfigError for
// unknown keys or unparseable values.
void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value);

// Parses a whole config stream, applying assignments in file order
// (last wins, matching override semantics).
void apply_config_text(ExperimentConfig& config, std::istream& in);

// Canonical emission: every key with its current value, suitable both for
// `print-defaults` and for the manifest snapshot. Parsing the emitted text
// reproduces the configuration exactly.
std::string to_config_text(const ExperimentConfig& config);

// Validates ranges and derives the solver inputs: rates to rad/ns, Doppler
// width from (T, mass, λ), collisional broadening from the pressure
// coefficient, photon-normalized signal envelope. Throws ConfigError on
// violated invariants.
PhysicsPoint resolve(const ExperimentConfig& config);

}  // namespace lambdamem
