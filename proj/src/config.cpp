#include "tecromac/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tecromac/io.hpp"

namespace tecromac {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string &key, const std::string &value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception &) {
  }
  throw ConfigError("setting '" + key + "' expects a number, got '" + value + "'");
}

long long to_integer(const std::string &key, const std::string &value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("setting '" + key + "' expects an integer, got '" + value + "'");
  return v;
}

bool to_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("setting '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<Index> to_index_list(const std::string &key, const std::string &value) {
  std::vector<Index> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<Index>(to_integer(key, item)));
  }
  return out;
}

}  // namespace

KeyValues parse_key_values(std::istream &in) {
  KeyValues out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + " has an empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValues load_key_values(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_key_values(in);
}

void apply_setting(RunSettings &s, const std::string &key, const std::string &value) {
  try {
    if (key == "gamma") s.detector.gamma = to_double(key, value);
    else if (key == "k") s.detector.k_neighbors = static_cast<Index>(to_integer(key, value));
    else if (key == "method") s.method = parse_method(value);
    else if (key == "algorithm") s.solver.algorithm = parse_algorithm(value);
    else if (key == "loss") s.solver.loss = parse_loss(value);
    else if (key == "lambda1") s.solver.lambda1 = to_double(key, value);
    else if (key == "lambda2") s.solver.lambda2 = to_double(key, value);
    else if (key == "rank") s.solver.rank = static_cast<Index>(to_integer(key, value));
    else if (key == "mu0") s.solver.mu0 = to_double(key, value);
    else if (key == "rho") s.solver.rho = to_double(key, value);
    else if (key == "mu_max_factor") s.solver.mu_max_factor = to_double(key, value);
    else if (key == "primal_tol") s.solver.primal_tol = to_double(key, value);
    else if (key == "max_outer") s.solver.max_outer = static_cast<int>(to_integer(key, value));
    else if (key == "inner_tol") s.solver.inner_tol = to_double(key, value);
    else if (key == "max_inner") s.solver.max_inner = static_cast<int>(to_integer(key, value));
    else if (key == "step_eta") {
      if (value == "auto") s.solver.step_eta.reset();
      else s.solver.step_eta = to_double(key, value);
    } else if (key == "seed") {
      const auto seed = static_cast<std::uint64_t>(to_integer(key, value));
      s.solver.seed = seed;
      s.sim.seed = seed;
    } else if (key == "coverage") s.sim.coverage = to_double(key, value);
    else if (key == "full_cover_frames") s.sim.full_cover_frames = to_index_list(key, value);
    else if (key == "min_blobs") s.sim.min_blobs = static_cast<Index>(to_integer(key, value));
    else if (key == "max_blobs") s.sim.max_blobs = static_cast<Index>(to_integer(key, value));
    else if (key == "min_blob_scale") s.sim.min_blob_scale = to_double(key, value);
    else if (key == "max_blob_scale") s.sim.max_blob_scale = to_double(key, value);
    else if (key == "min_intensity") s.sim.min_intensity = to_double(key, value);
    else if (key == "max_intensity") s.sim.max_intensity = to_double(key, value);
    else if (key == "scale_lambdas") s.experiment.scale_lambdas = to_bool(key, value);
    else if (key == "corruption_fraction") s.experiment.corruption_fraction = to_double(key, value);
    else throw ConfigError("unknown setting '" + key + "'");
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw ConfigError("setting '" + key + "': " + e.what());
  }
}

void apply_settings(RunSettings &settings, const KeyValues &values) {
  for (const auto &[key, value] : values) apply_setting(settings, key, value);
}

}  // namespace tecromac
