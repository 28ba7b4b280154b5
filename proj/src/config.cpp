#include "mpsdp/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "mpsdp/errors.hpp"

namespace mpsdp {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

const json* block(const json& root, const char* name) {
  if (!root.contains(name)) return nullptr;
  const json& b = root[name];
  if (!b.is_object()) throw ConfigError(name, "must be an object");
  return &b;
}

double number(const json& obj, const std::string& path, const char* key) {
  const json& v = obj[key];
  if (!v.is_number()) throw ConfigError(path + "." + key, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + "." + key, "must be finite");
  return x;
}

std::uint64_t unsigned_integer(const json& obj, const std::string& path, const char* key) {
  const json& v = obj[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0 && x == std::floor(x) && x < 9.007199254740992e15) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(path + "." + key, "must be a nonnegative integer");
}

std::string text(const json& obj, const std::string& path, const char* key) {
  const json& v = obj[key];
  if (!v.is_string()) throw ConfigError(path + "." + key, "must be a string");
  return v.get<std::string>();
}

bool flag(const json& obj, const std::string& path, const char* key) {
  const json& v = obj[key];
  if (!v.is_boolean()) throw ConfigError(path + "." + key, "must be a boolean");
  return v.get<bool>();
}

std::optional<double> optional_number(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  return number(obj, path, key);
}

}  // namespace

const std::vector<std::string>& run_modes() {
  static const std::vector<std::string> modes = {"solve",   "oracle",    "enumerate",
                                                 "commuting", "net-stats", "baseline"};
  return modes;
}

RunConfig parse_config(const std::string& source) {
  json root;
  try {
    root = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("", "configuration must be a JSON object");
  reject_unknown(root, "", {"model", "solver", "run", "output"});

  RunConfig cfg;
  const json* model = block(root, "model");
  if (model == nullptr) throw ConfigError("model", "required block is missing");
  reject_unknown(*model, "model", {"name", "params", "n", "seed"});
  if (!model->contains("name")) throw ConfigError("model.name", "required field is missing");
  cfg.model.name = text(*model, "model", "name");
  if (!model->contains("n")) throw ConfigError("model.n", "required field is missing");
  cfg.model.n = unsigned_integer(*model, "model", "n");
  if (model->contains("seed")) cfg.model.seed = unsigned_integer(*model, "model", "seed");
  if (model->contains("params")) {
    const json& p = (*model)["params"];
    if (!p.is_object()) throw ConfigError("model.params", "must be an object");
    for (const auto& [key, value] : p.items()) {
      (void)value;
      cfg.model.params[key] = number(p, "model.params", key.c_str());
    }
  }

  if (const json* solver = block(root, "solver")) {
    reject_unknown(*solver, "solver", {"D", "delta", "epsilon_op", "target_error", "cap"});
    if (solver->contains("D")) cfg.solver.D = unsigned_integer(*solver, "solver", "D");
    if (solver->contains("delta")) cfg.solver.delta = number(*solver, "solver", "delta");
    cfg.solver.epsilon_op = optional_number(*solver, "solver", "epsilon_op");
    cfg.solver.target_error = optional_number(*solver, "solver", "target_error");
    if (solver->contains("cap")) cfg.solver.cap = number(*solver, "solver", "cap");
  }

  if (const json* run = block(root, "run")) {
    reject_unknown(*run, "run", {"mode", "sweeps", "start", "seed_state", "perturbation", "state_seed"});
    if (run->contains("mode")) cfg.run.mode = text(*run, "run", "mode");
    if (run->contains("sweeps")) cfg.run.sweeps = unsigned_integer(*run, "run", "sweeps");
    if (run->contains("start")) cfg.run.start = text(*run, "run", "start");
    if (run->contains("seed_state")) cfg.run.seed_state = text(*run, "run", "seed_state");
    if (run->contains("perturbation")) cfg.run.perturbation = number(*run, "run", "perturbation");
    if (run->contains("state_seed")) cfg.run.state_seed = unsigned_integer(*run, "run", "state_seed");
  }

  if (const json* out = block(root, "output")) {
    reject_unknown(*out, "output", {"path", "emit_mps", "mps_path"});
    if (out->contains("path")) cfg.output.path = text(*out, "output", "path");
    if (out->contains("emit_mps")) cfg.output.emit_mps = flag(*out, "output", "emit_mps");
    if (out->contains("mps_path")) cfg.output.mps_path = text(*out, "output", "mps_path");
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  const auto& names = model_names();
  if (std::find(names.begin(), names.end(), cfg.model.name) == names.end()) {
    throw ConfigError("model.name", "unknown model '" + cfg.model.name + "'");
  }
  const auto& modes = run_modes();
  if (std::find(modes.begin(), modes.end(), cfg.run.mode) == modes.end()) {
    throw ConfigError("run.mode", "unknown mode '" + cfg.run.mode + "'");
  }
  // Exact diagonalization also makes sense for a two-site chain.
  const std::size_t min_n = cfg.run.mode == "oracle" ? 2 : 3;
  if (cfg.model.n < min_n) {
    throw ConfigError("model.n", "must be at least " + std::to_string(min_n));
  }
  if (cfg.solver.D < 1) throw ConfigError("solver.D", "must be at least 1");
  if (!(cfg.solver.delta > 0.0 && cfg.solver.delta <= 0.5)) {
    throw ConfigError("solver.delta", "must lie in (0, 0.5]");
  }
  if (cfg.solver.epsilon_op && !(*cfg.solver.epsilon_op > 0.0)) {
    throw ConfigError("solver.epsilon_op", "must be positive");
  }
  if (cfg.solver.target_error && !(*cfg.solver.target_error > 0.0)) {
    throw ConfigError("solver.target_error", "must be positive");
  }
  if (!(cfg.solver.cap >= 1.0)) throw ConfigError("solver.cap", "must be at least 1");
  if (cfg.run.start != "all_up" && cfg.run.start != "all_down" && cfg.run.start != "random") {
    throw ConfigError("run.start", "must be all_up, all_down or random");
  }
  if (cfg.run.seed_state != "perturbed_ground" && cfg.run.seed_state != "solver") {
    throw ConfigError("run.seed_state", "must be perturbed_ground or solver");
  }
  if (!(cfg.run.perturbation >= 0.0)) throw ConfigError("run.perturbation", "must be nonnegative");
  if (cfg.output.emit_mps && cfg.output.mps_path.empty()) {
    throw ConfigError("output.mps_path", "required when emit_mps is true");
  }
  try {
    (void)build_model(cfg.model.name, cfg.model.params, std::max<std::size_t>(cfg.model.n, 2),
                      cfg.model.seed);
  } catch (const RangeError& e) {
    throw ConfigError("model.params", e.what());
  }
}

}  // namespace mpsdp
