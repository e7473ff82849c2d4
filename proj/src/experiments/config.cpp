#include "rrf/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace rrf::experiments {

using nlohmann::json;

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {
      "example1-fixed",      "example1-adaptive",  "example1-hdep",  "example1-effectivity",
      "example1-cputable",   "example2-helmholtz", "example4-gfem"};
  return ids;
}

namespace {

std::vector<int> range(int first, int last, int step) {
  std::vector<int> out;
  for (int v = first; v <= last; v += step) out.push_back(v);
  return out;
}

void apply_defaults(ExperimentConfig& c) {
  const std::string& id = c.experiment;
  if (id == "example1-fixed") {
    c.n_values = range(1, 12, 1);
  } else if (id == "example1-adaptive") {
    c.tolerances = {1e-2, 1e-4, 1e-6};
    c.n_t_values = {10};
  } else if (id == "example1-hdep") {
    c.geometry.half_length = 0.5;
    c.inverse_h_values = {20, 40, 80, 160};
    c.n_values = range(2, 12, 2);
    c.n_t_values = {10};
  } else if (id == "example1-effectivity") {
    c.n_t_values = {5, 10, 20, 40, 80};
  } else if (id == "example1-cputable") {
    c.geometry = {1.0, 8.0, 200, 0.0};
    c.tolerances = {1e-4};
    c.n_t_values = {20};
    c.runs = 1;
  } else if (id == "example2-helmholtz") {
    c.geometry.inverse_h = 80;
    c.kappa_values = {0, 10, 20, 30, 40};
    c.runs = 1;
  } else if (id == "example4-gfem") {
    c.tolerances = {1e-2, 1e-4};
    c.n_t_values = {20};
    c.runs = 10;
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "schema_version", "experiment",   "geometry",     "n_values",     "tolerances",
      "n_t_values",     "inverse_h_values", "kappa_values", "spectrum_count", "basis_size",
      "eps_algofail",   "eps_testfail", "gfem",         "seed",         "runs",
      "threads",        "output"};
  return keys;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().count(item.key())) throw ConfigError("unknown config field '" + item.key() + "'");
  }
  if (!j.contains("schema_version")) throw ConfigError("config lacks schema_version");
  if (!j.contains("experiment")) throw ConfigError("config lacks experiment");

  ExperimentConfig c;
  try {
    read(j, "schema_version", c.schema_version);
    read(j, "experiment", c.experiment);
    if (std::find(experiment_ids().begin(), experiment_ids().end(), c.experiment) ==
        experiment_ids().end()) {
      throw ConfigError("unknown experiment '" + c.experiment + "'");
    }
    apply_defaults(c);

    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      for (const auto& item : g.items()) {
        static const std::set<std::string> keys = {"half_length", "width", "inverse_h", "kappa"};
        if (!keys.count(item.key())) throw ConfigError("unknown geometry field '" + item.key() + "'");
      }
      read(g, "half_length", c.geometry.half_length);
      read(g, "width", c.geometry.width);
      read(g, "inverse_h", c.geometry.inverse_h);
      read(g, "kappa", c.geometry.kappa);
    }
    if (j.contains("gfem")) {
      const json& g = j.at("gfem");
      for (const auto& item : g.items()) {
        if (item.key() != "example" && item.key() != "inverse_h") {
          throw ConfigError("unknown gfem field '" + item.key() + "'");
        }
      }
      read(g, "example", c.gfem_example);
      read(g, "inverse_h", c.gfem_inverse_h);
    }
    read(j, "n_values", c.n_values);
    read(j, "tolerances", c.tolerances);
    read(j, "n_t_values", c.n_t_values);
    read(j, "inverse_h_values", c.inverse_h_values);
    read(j, "kappa_values", c.kappa_values);
    read(j, "spectrum_count", c.spectrum_count);
    read(j, "basis_size", c.basis_size);
    read(j, "eps_algofail", c.eps_algofail);
    read(j, "eps_testfail", c.eps_testfail);
    read(j, "seed", c.seed);
    read(j, "runs", c.runs);
    read(j, "threads", c.threads);
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  auto positive_all = [](const auto& v) {
    return std::all_of(v.begin(), v.end(), [](auto x) { return x > 0; });
  };
  const std::string& id = c.experiment;
  require(c.schema_version == kSchemaVersion,
          "unsupported schema_version " + std::to_string(c.schema_version));
  require(std::find(experiment_ids().begin(), experiment_ids().end(), id) != experiment_ids().end(),
          "unknown experiment '" + id + "'");
  require(c.runs >= 1, "runs must be at least 1");
  require(c.threads >= 1, "threads must be at least 1");
  require(c.geometry.half_length > 0 && c.geometry.width > 0, "geometry lengths must be positive");
  require(c.geometry.inverse_h >= 1, "inverse_h must be positive");
  require(c.geometry.kappa >= 0, "kappa must be non-negative");
  require(c.eps_algofail > 0 && c.eps_algofail < 1, "eps_algofail must lie in (0, 1)");
  require(c.eps_testfail > 0 && c.eps_testfail < 1, "eps_testfail must lie in (0, 1)");
  require(positive_all(c.n_t_values), "n_t_values must be positive");
  require(positive_all(c.tolerances), "tolerances must be positive");
  require(positive_all(c.inverse_h_values), "inverse_h_values must be positive");
  require(std::all_of(c.n_values.begin(), c.n_values.end(), [](int n) { return n >= 0; }),
          "n_values must be non-negative");
  require(std::all_of(c.kappa_values.begin(), c.kappa_values.end(), [](double k) { return k >= 0; }),
          "kappa_values must be non-negative");

  if (id == "example1-fixed") require(!c.n_values.empty(), "example1-fixed needs n_values");
  if (id == "example1-adaptive") {
    require(!c.tolerances.empty() && !c.n_t_values.empty(),
            "example1-adaptive needs tolerances and n_t_values");
  }
  if (id == "example1-hdep") {
    require(!c.inverse_h_values.empty() && !c.n_values.empty() && !c.n_t_values.empty(),
            "example1-hdep needs inverse_h_values, n_values and n_t_values");
  }
  if (id == "example1-effectivity") {
    require(!c.n_t_values.empty(), "example1-effectivity needs n_t_values");
    require(c.basis_size >= 0, "basis_size must be non-negative");
  }
  if (id == "example1-cputable") {
    require(c.tolerances.size() == 1 && c.n_t_values.size() == 1,
            "example1-cputable needs exactly one tolerance and one n_t");
  }
  if (id == "example2-helmholtz") {
    require(!c.kappa_values.empty(), "example2-helmholtz needs kappa_values");
    require(c.spectrum_count >= 1, "spectrum_count must be positive");
  }
  if (id == "example4-gfem") {
    require(c.gfem_example == "poisson" || c.gfem_example == "channels",
            "gfem.example must be poisson or channels");
    require(c.gfem_inverse_h >= 10 && c.gfem_inverse_h % 10 == 0,
            "gfem.inverse_h must be a positive multiple of 10");
    require(!c.tolerances.empty(), "example4-gfem needs tolerances");
    require(c.n_t_values.size() == 1, "example4-gfem needs exactly one n_t");
  }
}

}  // namespace rrf::experiments
