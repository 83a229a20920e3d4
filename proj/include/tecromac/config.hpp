#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

#include "tecromac/baselines.hpp"
#include "tecromac/detection.hpp"
#include "tecromac/simulation.hpp"
#include "tecromac/solver.hpp"

namespace tecromac {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` lines; blank lines and `#` comments are skipped.
KeyValues parse_key_values(std::istream &in);
KeyValues load_key_values(const std::filesystem::path &path);

/// Everything a CLI run can be configured with. Keys mirror the long CLI
/// flag names (gamma, k, method, algorithm, lambda1, lambda2, rank, seed, ...).
struct RunSettings {
  DetectorConfig detector;
  SolverConfig solver;
  CloudSimParams sim;
  ExperimentOptions experiment;
  Method method = Method::tecromac;
};

/// Apply one setting; throws ConfigError for unknown keys or bad values.
void apply_setting(RunSettings &settings, const std::string &key, const std::string &value);
void apply_settings(RunSettings &settings, const KeyValues &values);

}  // namespace tecromac
